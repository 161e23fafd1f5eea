#include "procnet/scenario_io.hpp"

#include <cmath>

namespace procnet {

using nlohmann::json;

Step ms_to_steps(double ms, int period_ms) {
  if (period_ms <= 0) throw std::invalid_argument("period must be positive");
  return static_cast<Step>(std::floor(ms / period_ms + 0.5));
}

Matrix matrix_from_json(const json& j, int n) {
  if (n < 1 || n > kMaxStateDim) throw std::invalid_argument("matrix: bad dimension");
  if (j.is_number()) return j.get<double>() * Matrix::Identity(n, n);
  if (!j.is_array() || static_cast<int>(j.size()) != n) {
    throw std::invalid_argument("matrix: expected a scalar or " + std::to_string(n) + " rows");
  }
  Matrix m(n, n);
  for (int r = 0; r < n; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<int>(row.size()) != n) {
      throw std::invalid_argument("matrix: row " + std::to_string(r) + " has the wrong length");
    }
    for (int c = 0; c < n; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

// A single matrix or a per-step list of matrices.
std::vector<Matrix> matrix_sequence(const json& j, int n) {
  const bool is_sequence = j.is_array() && !j.empty() && j[0].is_array() && !j[0].empty() && j[0][0].is_array();
  if (!is_sequence) return {matrix_from_json(j, n)};
  std::vector<Matrix> out;
  for (const auto& m : j) out.push_back(matrix_from_json(m, n));
  return out;
}

json sequence_to_json(const std::vector<Matrix>& seq) {
  if (seq.size() == 1) return matrix_to_json(seq.front());
  json out = json::array();
  for (const auto& m : seq) out.push_back(matrix_to_json(m));
  return out;
}

SystemModel system_from_json(const json& j) {
  const int period = j.at("T_ms").get<int>();
  SystemModel model;
  if (j.contains("double_integrator")) {
    const auto& di = j.at("double_integrator");
    model = build_double_integrator(period, di.at("q").get<double>());
  } else {
    model.n = j.at("n").get<int>();
    model.period_ms = period;
    model.A = matrix_sequence(j.at("A"), model.n);
    model.W = matrix_sequence(j.at("W"), model.n);
  }
  if (j.contains("P0")) {
    model.P0 = matrix_from_json(j.at("P0"), model.n);
  } else {
    model.P0 = j.value("p0", 1.0) * Matrix::Identity(model.n, model.n);
  }
  return model;
}

SensorClass class_from_json(const json& j, int n, int period, int fallback_id) {
  SensorClass c;
  c.class_id = j.value("class_id", fallback_id);
  c.name = j.value("name", "class" + std::to_string(c.class_id));
  c.count = j.at("count").get<int>();
  c.delay_raw = ms_to_steps(j.at("delay_raw_ms").get<double>(), period);
  c.delay_proc = ms_to_steps(j.at("delay_proc_ms").get<double>(), period);
  const double comm = j.value("delay_comm_ms", 0.0);
  c.delay_comm_raw = ms_to_steps(j.value("delay_comm_raw_ms", comm), period);
  c.delay_comm_proc = ms_to_steps(j.value("delay_comm_proc_ms", comm), period);
  c.V_raw = matrix_from_json(j.at("v_raw"), n);
  c.V_proc = matrix_from_json(j.at("v_proc"), n);
  return c;
}

EpisodeConfig episode_from_json(const json& j, int period) {
  if (j.contains("boundaries_ms")) {
    EpisodeConfig cfg;
    cfg.horizon = ms_to_steps(j.at("horizon_ms").get<double>(), period);
    for (const auto& b : j.at("boundaries_ms")) cfg.boundaries.push_back(ms_to_steps(b.get<double>(), period));
    return cfg;
  }
  const auto windows = j.at("windows").get<std::size_t>();
  return EpisodeConfig::equal_windows(windows, ms_to_steps(j.at("window_ms").get<double>(), period));
}

}  // namespace

Scenario scenario_from_json(const json& j) {
  try {
    Scenario s;
    s.model = system_from_json(j.at("system"));
    const int period = s.model.period_ms;
    int next_id = 0;
    for (const auto& c : j.at("classes")) s.classes.push_back(class_from_json(c, s.model.n, period, next_id++));
    s.episode = episode_from_json(j.at("episode"), period);
    if (j.contains("fusion")) {
      const auto& f = j.at("fusion");
      s.fusion.cost_per_measurement = f.value("cost_per_measurement", 0.0);
      s.fusion.base_cost = f.value("base_cost", 0.0);
    }
    if (j.contains("power")) {
      const auto& p = j.at("power");
      s.power.p_active = p.value("p_active_w", 0.0);
      s.power.p_processing = p.value("p_processing_w", 0.0);
      s.power.p_sleep = p.value("p_sleep_w", 0.0);
    }
    return s;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("scenario: ") + e.what());
  }
}

json scenario_to_json(const Scenario& s) {
  const int T = s.model.period_ms;
  json system = {{"T_ms", T},
                 {"n", s.model.n},
                 {"A", sequence_to_json(s.model.A)},
                 {"W", sequence_to_json(s.model.W)},
                 {"P0", matrix_to_json(s.model.P0)}};
  json classes = json::array();
  for (const auto& c : s.classes) {
    classes.push_back({{"class_id", c.class_id},
                       {"name", c.name},
                       {"count", c.count},
                       {"delay_raw_ms", c.delay_raw * T},
                       {"delay_proc_ms", c.delay_proc * T},
                       {"delay_comm_raw_ms", c.delay_comm_raw * T},
                       {"delay_comm_proc_ms", c.delay_comm_proc * T},
                       {"v_raw", matrix_to_json(c.V_raw)},
                       {"v_proc", matrix_to_json(c.V_proc)}});
  }
  json boundaries = json::array();
  for (Step b : s.episode.boundaries) boundaries.push_back(b * T);
  return {{"system", system},
          {"classes", classes},
          {"episode", {{"horizon_ms", s.episode.horizon * T}, {"boundaries_ms", boundaries}}},
          {"fusion", {{"cost_per_measurement", s.fusion.cost_per_measurement}, {"base_cost", s.fusion.base_cost}}},
          {"power",
           {{"p_active_w", s.power.p_active},
            {"p_processing_w", s.power.p_processing},
            {"p_sleep_w", s.power.p_sleep}}}};
}

}  // namespace procnet
