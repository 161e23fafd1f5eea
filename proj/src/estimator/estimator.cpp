#include "procnet/estimator.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace procnet {

Matrix symmetrize(const Matrix& p) { return 0.5 * (p + p.transpose()); }

Matrix spd_inverse(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw std::invalid_argument(std::string(what) + " must be a non-empty square matrix");
  }
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    throw SingularMatrixError(std::string(what) + " is singular or not positive definite");
  }
  // LLT accepts numerically singular matrices with a vanishing pivot.
  const auto diag = llt.matrixLLT().diagonal();
  if (diag.minCoeff() <= 1e-12 * std::max(1.0, diag.maxCoeff())) {
    throw SingularMatrixError(std::string(what) + " is singular");
  }
  return symmetrize(llt.solve(Matrix::Identity(m.rows(), m.cols())));
}

Matrix predict_step(const SystemModel& model, const Matrix& p, Step k) {
  const Matrix& a = model.A_at(k);
  if (p.rows() != a.rows() || p.cols() != a.cols()) {
    throw std::invalid_argument("predict_step: covariance is " + std::to_string(p.rows()) + "x" +
                                std::to_string(p.cols()) + ", model is " + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()));
  }
  return symmetrize(a * p * a.transpose() + model.W_at(k));
}

Matrix predict_multi(const SystemModel& model, const Matrix& p, Step k_from, Step k_to) {
  if (k_to < k_from) {
    throw std::invalid_argument("predict_multi: target step " + std::to_string(k_to) + " precedes start step " +
                                std::to_string(k_from));
  }
  Matrix out = p;
  for (Step k = k_from; k < k_to; ++k) out = predict_step(model, out, k);
  return out;
}

Matrix information_update(const Matrix& p, const Matrix& information) {
  if (p.rows() != information.rows() || p.cols() != information.cols()) {
    throw std::invalid_argument("measurement update: dimension mismatch");
  }
  return spd_inverse(spd_inverse(p, "prior covariance P") + information, "posterior information");
}

Matrix measurement_update(const Matrix& p, const Matrix& v) {
  if (p.rows() != v.rows() || p.cols() != v.cols()) {
    throw std::invalid_argument("measurement update: dimension mismatch");
  }
  return information_update(p, spd_inverse(v, "measurement noise covariance V"));
}

Matrix fuse_batch(const SystemModel& model, const Matrix& p_anchor, Step anchor,
                  std::span<const Measurement> measurements, Step target) {
  if (target < anchor) throw std::invalid_argument("fuse_batch: target precedes anchor");
  std::vector<const Measurement*> order;
  order.reserve(measurements.size());
  for (const auto& m : measurements) {
    if (m.sample_time < anchor || m.sample_time > target) {
      throw std::invalid_argument("fuse_batch: measurement sampled at step " + std::to_string(m.sample_time) +
                                  " lies outside [" + std::to_string(anchor) + ", " + std::to_string(target) + "]");
    }
    order.push_back(&m);
  }
  std::stable_sort(order.begin(), order.end(),
                   [](const Measurement* a, const Measurement* b) { return a->sample_time < b->sample_time; });

  Matrix p = p_anchor;
  Step at = anchor;
  for (const Measurement* m : order) {
    p = predict_multi(model, p, at, m->sample_time);
    at = m->sample_time;
    p = measurement_update(p, m->noise_cov.get());
  }
  return predict_multi(model, p, at, target);
}

}  // namespace procnet
