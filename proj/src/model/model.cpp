#include "procnet/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace procnet {

const char* to_string(SensingMode mode) {
  switch (mode) {
    case SensingMode::Raw:
      return "raw";
    case SensingMode::Processing:
      return "processing";
    case SensingMode::Sleep:
      return "sleep";
  }
  return "?";
}

std::string to_string(const NetworkAction& action) {
  std::ostringstream out;
  out << '{';
  for (std::size_t m = 0; m < action.decisions.size(); ++m) {
    if (m) out << ',';
    out << '(' << action.decisions[m].transmitting << ',' << action.decisions[m].processing << ')';
  }
  out << '}';
  return out.str();
}

const Matrix& SystemModel::A_at(Step k) const {
  const auto i = static_cast<std::size_t>(std::max<Step>(k, 0));
  return i < A.size() ? A[i] : A.back();
}

const Matrix& SystemModel::W_at(Step k) const {
  const auto i = static_cast<std::size_t>(std::max<Step>(k, 0));
  return i < W.size() ? W[i] : W.back();
}

Step SensorClass::acquisition_delay(SensingMode mode) const {
  switch (mode) {
    case SensingMode::Raw:
      return delay_raw;
    case SensingMode::Processing:
      return delay_proc;
    case SensingMode::Sleep:
      break;
  }
  throw std::invalid_argument("sleeping sensors acquire nothing");
}

Step SensorClass::communication_delay(SensingMode mode) const {
  switch (mode) {
    case SensingMode::Raw:
      return delay_comm_raw;
    case SensingMode::Processing:
      return delay_comm_proc;
    case SensingMode::Sleep:
      break;
  }
  throw std::invalid_argument("sleeping sensors transmit nothing");
}

const Matrix& SensorClass::noise(SensingMode mode) const {
  if (mode == SensingMode::Sleep) throw std::invalid_argument("sleeping sensors have no noise model");
  return mode == SensingMode::Raw ? V_raw : V_proc;
}

EpisodeConfig EpisodeConfig::equal_windows(std::size_t windows, Step window_length) {
  EpisodeConfig cfg;
  cfg.horizon = static_cast<Step>(windows) * window_length;
  for (std::size_t l = 0; l < windows; ++l) cfg.boundaries.push_back(static_cast<Step>(l) * window_length);
  return cfg;
}

Step FusionModel::delay(std::size_t batch_size) const {
  const double d = base_cost + cost_per_measurement * static_cast<double>(batch_size);
  // Guard against 2.0000000001 style round-off pushing the ceiling up a step.
  return static_cast<Step>(std::ceil(d - 1e-9));
}

int Scenario::total_sensors() const {
  int total = 0;
  for (const auto& c : classes) total += c.count;
  return total;
}

SystemModel build_double_integrator(int period_ms, double q, double p0) {
  if (period_ms <= 0) throw std::invalid_argument("double integrator: period must be positive");
  if (!(q > 0.0)) throw std::invalid_argument("double integrator: noise intensity q must be positive");
  const double ts = period_ms / 1000.0;
  SystemModel model;
  model.n = 2;
  model.period_ms = period_ms;
  Matrix a(2, 2);
  a << 1.0, ts, 0.0, 1.0;
  Matrix w(2, 2);
  w << ts * ts * ts / 3.0, ts * ts / 2.0, ts * ts / 2.0, ts;
  model.A = {a};
  model.W = {q * w};
  model.P0 = p0 * Matrix::Identity(2, 2);
  return model;
}

bool is_symmetric_psd(const Matrix& m, double tol) {
  if (m.rows() != m.cols() || m.rows() == 0) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol * scale) return false;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff() >= -tol * scale;
}

bool is_positive_definite(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) return false;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff() > 0.0;
}

namespace {

std::string class_where(const SensorClass& c, const char* field) {
  return "class " + std::to_string(c.class_id) + ": " + field;
}

bool has_shape(const Matrix& m, int n) { return m.rows() == n && m.cols() == n; }

}  // namespace

std::vector<ValidationIssue> validate_scenario(const std::vector<SensorClass>& classes,
                                               const SystemModel& model,
                                               const EpisodeConfig& episode) {
  std::vector<ValidationIssue> issues;
  auto report = [&](std::string where, std::string msg) {
    issues.push_back({std::move(where), std::move(msg)});
  };

  const int n = model.n;
  if (n < 1 || n > kMaxStateDim) {
    report("system: n", "state dimension must be in [1, " + std::to_string(kMaxStateDim) + "]");
  }
  if (model.period_ms <= 0) report("system: T", "base period must be a positive number of milliseconds");
  if (model.A.empty()) report("system: A", "missing state matrix");
  if (model.W.empty()) report("system: W", "missing process noise covariance");
  for (std::size_t k = 0; k < model.A.size(); ++k) {
    if (!has_shape(model.A[k], n)) report("system: A[" + std::to_string(k) + "]", "dimension mismatch");
  }
  for (std::size_t k = 0; k < model.W.size(); ++k) {
    if (!has_shape(model.W[k], n)) {
      report("system: W[" + std::to_string(k) + "]", "dimension mismatch");
    } else if (!is_symmetric_psd(model.W[k])) {
      report("system: W[" + std::to_string(k) + "]", "process noise must be symmetric PSD");
    }
  }
  if (!has_shape(model.P0, n)) {
    report("system: P0", "dimension mismatch");
  } else if (!is_symmetric_psd(model.P0)) {
    report("system: P0", "initial covariance must be symmetric PSD");
  }

  if (classes.empty()) report("classes", "at least one sensor class is required");
  std::set<int> ids;
  for (const auto& c : classes) {
    if (!ids.insert(c.class_id).second) report(class_where(c, "class_id"), "duplicate class id");
    if (c.count < 1) report(class_where(c, "count"), "a class needs at least one sensor");
    if (c.delay_raw < 1) report(class_where(c, "delay_raw"), "raw acquisition delay must be at least one step");
    if (c.delay_proc <= c.delay_raw) {
      report(class_where(c, "delay_proc"), "delay ordering violated: processing delay must exceed raw delay");
    }
    if (c.delay_comm_raw < 0 || c.delay_comm_proc < 0) {
      report(class_where(c, "delay_comm"), "communication delays must be non-negative");
    }
    const bool raw_ok = has_shape(c.V_raw, n);
    const bool proc_ok = has_shape(c.V_proc, n);
    if (!raw_ok) report(class_where(c, "V_raw"), "dimension mismatch");
    if (!proc_ok) report(class_where(c, "V_proc"), "dimension mismatch");
    if (raw_ok && !is_positive_definite(c.V_raw)) {
      report(class_where(c, "V_raw"), "noise covariance must be symmetric positive definite");
    }
    if (proc_ok && !is_positive_definite(c.V_proc)) {
      report(class_where(c, "V_proc"), "noise covariance must be symmetric positive definite");
    }
    if (raw_ok && proc_ok && !is_positive_definite(c.V_raw - c.V_proc)) {
      report(class_where(c, "V_raw - V_proc"), "Löwner order violated: V_raw - V_proc must be positive definite");
    }
  }

  if (episode.horizon <= 0) report("episode: horizon", "horizon must be positive");
  if (episode.boundaries.empty()) {
    report("episode: boundaries", "at least one decision window is required");
  } else {
    if (episode.boundaries.front() != 0) report("episode: boundaries", "first decision must be taken at step 0");
    for (std::size_t l = 1; l < episode.boundaries.size(); ++l) {
      if (episode.boundaries[l] <= episode.boundaries[l - 1]) {
        report("episode: boundaries", "boundaries must be strictly increasing");
        break;
      }
    }
    if (episode.boundaries.back() >= episode.horizon) {
      report("episode: boundaries", "last boundary must precede the horizon");
    }
    for (std::size_t l = 0; l < episode.window_count(); ++l) {
      const Step len = episode.window_end(l) - episode.window_begin(l);
      for (const auto& c : classes) {
        if (len > 0 && c.delay_raw > len) {
          report("episode: window " + std::to_string(l),
                 "window shorter than the raw delay of class " + std::to_string(c.class_id));
        }
      }
    }
  }
  return issues;
}

std::vector<ValidationIssue> validate_scenario(const Scenario& scenario) {
  auto issues = validate_scenario(scenario.classes, scenario.model, scenario.episode);
  const auto& f = scenario.fusion;
  if (!(f.cost_per_measurement >= 0.0) || !(f.base_cost >= 0.0)) {
    issues.push_back({"fusion", "fusion costs must be non-negative"});
  }
  const auto& p = scenario.power;
  if (!(p.p_active >= 0.0) || !(p.p_processing >= 0.0) || !(p.p_sleep >= 0.0)) {
    issues.push_back({"power", "power draws must be non-negative"});
  }
  return issues;
}

namespace {

std::string join_issues(const std::vector<ValidationIssue>& issues) {
  std::string out = "invalid scenario:";
  for (const auto& i : issues) out += "\n  " + i.where + ": " + i.message;
  return out;
}

}  // namespace

ScenarioError::ScenarioError(std::vector<ValidationIssue> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues)) {}

void require_valid(const Scenario& scenario) {
  auto issues = validate_scenario(scenario);
  if (!issues.empty()) throw ScenarioError(std::move(issues));
}

}  // namespace procnet
