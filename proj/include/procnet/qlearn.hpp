#pragma once

#include "procnet/model.hpp"
#include "procnet/simulator.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace procnet {

/// Cartesian product over classes of every (n_t, n_p) with
/// 0 <= n_p <= n_t <= count, ordered lexicographically by (class, n_t, n_p).
std::vector<NetworkAction> enumerate_actions(const std::vector<SensorClass>& classes);

/// Product of (N_m + 1)(N_m + 2) / 2 over classes.
std::size_t action_count(const std::vector<SensorClass>& classes);

/// FNV-1a over the textual action list; detects a table trained on another
/// action order.
std::uint64_t action_fingerprint(std::span<const NetworkAction> actions);

/// M bins split by M - 1 increasing edges; an edge belongs to the bin above it.
struct Discretizer {
  std::vector<double> bin_edges;

  std::size_t bins() const { return bin_edges.size() + 1; }
};

std::size_t discretize(double trace_value, const Discretizer& d);
void validate_discretizer(const Discretizer& d);

struct Hyperparams {
  double alpha = 0.1;
  double eps_max = 0.9;
  double eps_min = 0.1;
  double gamma = 1.0;
  std::size_t episodes = 1000;
  std::uint64_t seed = 0;
};

void validate_hyperparams(const Hyperparams& h);

/// max(eps_max / sqrt(t + 1), eps_min)
double epsilon(std::size_t t, const Hyperparams& h);

class QTable {
 public:
  QTable() = default;
  QTable(std::size_t states, std::size_t actions);

  std::size_t states() const { return states_; }
  std::size_t actions() const { return actions_; }

  double& at(std::size_t s, std::size_t a);
  double at(std::size_t s, std::size_t a) const;
  std::span<const double> row(std::size_t s) const;
  std::uint64_t visits(std::size_t s, std::size_t a) const;

  const std::vector<double>& values() const { return values_; }
  const std::vector<std::uint64_t>& visit_counts() const { return visits_; }

  friend bool operator==(const QTable&, const QTable&) = default;

 private:
  friend void q_update(QTable&, std::size_t, std::size_t, double, std::size_t, bool, const Hyperparams&);
  friend QTable qtable_from_json(const nlohmann::json&, std::uint64_t, std::uint64_t);

  std::size_t states_ = 0;
  std::size_t actions_ = 0;
  std::vector<double> values_;
  std::vector<std::uint64_t> visits_;
};

/// Non-terminal: Q += alpha * (r + gamma * max Q(s', .) - Q).
/// Terminal: Q = (1 - alpha) * Q + alpha * r.
void q_update(QTable& q, std::size_t s, std::size_t a, double reward, std::size_t s_next, bool terminal,
              const Hyperparams& h);

/// Argmax of row s, lowest index on ties.
std::size_t greedy_action(const QTable& q, std::size_t s);

struct ConvergencePoint {
  std::size_t episode = 0;    // episodes completed
  double greedy_value = 0.0;  // sum of window rewards of the greedy rollout
};

using ConvergenceLog = std::vector<ConvergencePoint>;

struct TrainingResult {
  QTable q;
  ConvergenceLog log;
};

struct TrainingOptions {
  std::size_t checkpoint_every = 0;  // 0 disables the log
  std::function<void(std::size_t episode)> progress;
};

TrainingResult train(const Scenario& scenario, const Discretizer& d, const Hyperparams& h,
                     const TrainingOptions& options = {});

/// Deterministic greedy rollout.
EpisodeResult evaluate(const QTable& q, const Scenario& scenario, const Discretizer& d,
                       EpisodeOptions options = {});

/// Index into enumerate_actions(scenario.classes) for each window of a rollout.
std::vector<int> action_indices(const EpisodeResult& result, const std::vector<SensorClass>& classes);

nlohmann::json qtable_to_json(const QTable& q, const Scenario& scenario, const Discretizer& d, const Hyperparams& h);

/// Throws std::invalid_argument if the stored scenario hash or action
/// fingerprint differs from the expected ones.
QTable qtable_from_json(const nlohmann::json& j, std::uint64_t scenario_hash, std::uint64_t fingerprint);

/// FNV-1a of the canonical scenario JSON.
std::uint64_t scenario_hash(const Scenario& scenario);

void write_convergence_csv(std::ostream& out, const ConvergenceLog& log);

}  // namespace procnet
