#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace procnet {

// State dimension is bounded so covariance matrices never touch the heap.
inline constexpr int kMaxStateDim = 6;

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor,
                             kMaxStateDim, kMaxStateDim>;

// Discrete time index. Every delay and timestamp is an integer number of base periods.
using Step = std::int64_t;

enum class SensingMode : std::uint8_t { Raw, Processing, Sleep };

const char* to_string(SensingMode mode);

/// Linear time-varying dynamics x[k+1] = A_k x[k] + w_k, w_k ~ N(0, W_k).
///
/// `A` and `W` hold one matrix per step; the last entry is reused for every
/// later step, so an LTI model stores a single matrix in each.
struct SystemModel {
  int n = 0;
  std::vector<Matrix> A;
  std::vector<Matrix> W;
  Matrix P0;
  int period_ms = 0;

  const Matrix& A_at(Step k) const;
  const Matrix& W_at(Step k) const;
  double period_s() const { return period_ms / 1000.0; }
};

struct SensorClass {
  int class_id = 0;
  std::string name;
  int count = 0;
  Step delay_raw = 0;
  Step delay_proc = 0;
  Step delay_comm_raw = 0;
  Step delay_comm_proc = 0;
  Matrix V_raw;
  Matrix V_proc;

  Step acquisition_delay(SensingMode mode) const;
  Step communication_delay(SensingMode mode) const;
  Step reception_delay(SensingMode mode) const {
    return acquisition_delay(mode) + communication_delay(mode);
  }
  const Matrix& noise(SensingMode mode) const;
};

/// Homogeneous decision for one class: `transmitting` sensors are awake and
/// `processing` of them refine their samples before sending.
struct ClassDecision {
  int transmitting = 0;
  int processing = 0;

  int raw() const { return transmitting - processing; }
  bool valid_for(int count) const {
    return 0 <= processing && processing <= transmitting && transmitting <= count;
  }
  friend bool operator==(const ClassDecision&, const ClassDecision&) = default;
};

struct NetworkAction {
  std::vector<ClassDecision> decisions;

  friend bool operator==(const NetworkAction&, const NetworkAction&) = default;
};

std::string to_string(const NetworkAction& action);

/// Decision windows [boundaries[l], boundaries[l+1]) with the horizon as the
/// closing boundary. The first boundary is always step 0.
struct EpisodeConfig {
  Step horizon = 0;
  std::vector<Step> boundaries;

  std::size_t window_count() const { return boundaries.size(); }
  Step window_begin(std::size_t l) const { return boundaries.at(l); }
  Step window_end(std::size_t l) const {
    return l + 1 < boundaries.size() ? boundaries[l + 1] : horizon;
  }

  static EpisodeConfig equal_windows(std::size_t windows, Step window_length);
};

/// Base-station fusion time, ceil(base_cost + cost_per_measurement * batch) steps.
struct FusionModel {
  double cost_per_measurement = 0.0;
  double base_cost = 0.0;

  Step delay(std::size_t batch_size) const;
};

struct PowerModel {
  double p_active = 0.0;
  double p_processing = 0.0;
  double p_sleep = 0.0;
};

/// Everything the simulator needs to roll out one episode.
struct Scenario {
  SystemModel model;
  std::vector<SensorClass> classes;
  EpisodeConfig episode;
  FusionModel fusion;
  PowerModel power;

  int total_sensors() const;
};

SystemModel build_double_integrator(int period_ms, double q, double p0 = 1.0);

struct ValidationIssue {
  std::string where;  // e.g. "class 0: delay_proc" or "episode"
  std::string message;
};

/// Returns every violated invariant; an empty list means the scenario is usable.
std::vector<ValidationIssue> validate_scenario(const std::vector<SensorClass>& classes,
                                               const SystemModel& model,
                                               const EpisodeConfig& episode);

std::vector<ValidationIssue> validate_scenario(const Scenario& scenario);

/// Throws ScenarioError listing all issues when validation fails.
void require_valid(const Scenario& scenario);

class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(std::vector<ValidationIssue> issues);
  const std::vector<ValidationIssue>& issues() const { return issues_; }

 private:
  std::vector<ValidationIssue> issues_;
};

bool is_symmetric_psd(const Matrix& m, double tol = 1e-12);
bool is_positive_definite(const Matrix& m);

}  // namespace procnet
