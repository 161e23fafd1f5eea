#pragma once

#include "procnet/model.hpp"

#include <functional>
#include <span>
#include <stdexcept>

namespace procnet {

/// A sample delivered (or to be delivered) to the base station. The
/// measurement model is y = x + v, so only the noise covariance matters for
/// the error covariance recursion.
struct Measurement {
  int sensor_id = 0;
  int class_id = 0;
  Step sample_time = 0;
  SensingMode mode = SensingMode::Raw;
  std::reference_wrapper<const Matrix> noise_cov;
  Step reception_time = 0;
};

class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// (P + P^T) / 2
Matrix symmetrize(const Matrix& p);

/// Inverse of a symmetric positive definite matrix. `what` names the operand
/// in the error raised when the matrix is singular or indefinite.
Matrix spd_inverse(const Matrix& m, const char* what);

/// One open-loop step: A_k P A_k^T + W_k.
Matrix predict_step(const SystemModel& model, const Matrix& p, Step k);

/// Open-loop steps k_from .. k_to-1; identity when k_to == k_from.
Matrix predict_multi(const SystemModel& model, const Matrix& p, Step k_from, Step k_to);

/// Information-form update (P^-1 + V^-1)^-1 for y = x + v.
Matrix measurement_update(const Matrix& p, const Matrix& v);

/// Same update with the information V^-1 (or a sum of several) given directly.
Matrix information_update(const Matrix& p, const Matrix& information);

/// Covariance at `target` of the Kalman predictor started from `p_anchor` at
/// `anchor`, fusing `measurements` at their sample times. Input order is
/// irrelevant; measurements are replayed in sample-time order.
Matrix fuse_batch(const SystemModel& model, const Matrix& p_anchor, Step anchor,
                  std::span<const Measurement> measurements, Step target);

}  // namespace procnet
