#pragma once

#include "procnet/model.hpp"

#include <random>

namespace procnet::testing {

inline Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

inline Matrix scalar(double v) { return mat({{v}}); }

/// Scalar random walk x+ = a x + w.
inline SystemModel scalar_model(double a, double w, double p0, int period_ms = 10) {
  SystemModel m;
  m.n = 1;
  m.period_ms = period_ms;
  m.A = {scalar(a)};
  m.W = {scalar(w)};
  m.P0 = scalar(p0);
  return m;
}

inline SensorClass make_class(int id, int count, Step raw, Step proc, Step comm, Matrix v_raw, Matrix v_proc) {
  SensorClass c;
  c.class_id = id;
  c.name = "c" + std::to_string(id);
  c.count = count;
  c.delay_raw = raw;
  c.delay_proc = proc;
  c.delay_comm_raw = comm;
  c.delay_comm_proc = comm;
  c.V_raw = std::move(v_raw);
  c.V_proc = std::move(v_proc);
  return c;
}

/// Drone camera class from the tracking scenario: 40/140 ms at T = 10 ms, 10 ms link.
inline SensorClass drone_class(int count, double v_proc = 1.0) {
  return make_class(0, count, 4, 14, 1, 10.0 * Matrix::Identity(2, 2), v_proc * Matrix::Identity(2, 2));
}

inline Matrix random_spd(std::mt19937_64& rng, int n, double floor = 0.1, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix b(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) b(r, c) = g(rng);
  Matrix m = scale * (b * b.transpose()) / n + floor * Matrix::Identity(n, n);
  return 0.5 * (m + m.transpose());
}

inline Matrix random_matrix(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Matrix b(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) b(r, c) = g(rng);
  return b;
}

}  // namespace procnet::testing
