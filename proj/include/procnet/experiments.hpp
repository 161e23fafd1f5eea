#pragma once

#include "procnet/model.hpp"
#include "procnet/qlearn.hpp"
#include "procnet/simulator.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace procnet {

/// Reduced settings for quick runs on a workstation.
struct DeskScale {
  int sensors = 0;
  std::size_t episodes = 0;
  double alpha = 0.0;
  Discretizer discretizer;
};

struct Preset {
  std::string name;
  Scenario scenario;
  Discretizer discretizer;
  Hyperparams hyper;
  int moving_average_window = 1;
  std::size_t checkpoint_every = 1000;
  std::optional<DeskScale> desk;
};

/// Structural errors throw std::invalid_argument; scenario semantics are
/// checked separately with validate_scenario.
Preset preset_from_json(const nlohmann::json& j);
nlohmann::json preset_to_json(const Preset& p);

std::vector<std::string> builtin_preset_names();
/// A built-in preset name or a path to a preset JSON file.
Preset load_preset(const std::string& name_or_path);

/// Applies the desk block (sensor count, episodes, learning rate, bins).
Preset desk_scale(const Preset& p);

/// Single-class scenarios only.
Scenario with_sensor_count(const Scenario& s, int count);
/// Sets V_proc = v * I in every class.
Scenario with_processed_noise(const Scenario& s, double v);

enum class BaselineKind { AllRaw, AllProcessing, AllSleep };

BaselineKind parse_baseline_kind(const std::string& text);
const char* to_string(BaselineKind kind);
NetworkAction baseline_action(BaselineKind kind, const std::vector<SensorClass>& classes);
EpisodeResult baseline(BaselineKind kind, const Scenario& s, EpisodeOptions options = {});

struct Optimum {
  std::vector<std::size_t> action_indices;
  std::vector<NetworkAction> sequence;
  double cost = 0.0;
  std::size_t evaluated = 0;
};

/// Exhaustive search over all action sequences; ties keep the
/// lexicographically first sequence. Throws std::length_error when
/// |actions|^L exceeds `cap`.
Optimum brute_force_optimum(const Scenario& s, std::size_t cap);

inline constexpr double kDefaultPercentileValues[] = {20.0, 40.0, 60.0, 80.0};
inline constexpr std::span<const double> kDefaultPercentiles{kDefaultPercentileValues};

/// Percentiles (nearest rank) of the boundary traces seen by a uniformly
/// random policy, each moved up to the midpoint with the next distinct trace.
/// Throws if two edges coincide.
Discretizer calibrate_bins(const Scenario& s, std::size_t warmup_episodes, std::uint64_t seed,
                           std::span<const double> percentiles = kDefaultPercentiles);

struct RunSummary {
  std::string policy;
  double mean_error_variance = 0.0;
  EnergyBreakdown energy;
  int moving_average_window = 1;
  std::vector<std::uint64_t> seeds;
  std::size_t episodes = 0;  // training episodes, 0 for fixed policies
};

RunSummary summarize(const std::string& policy, const EpisodeResult& result, const Scenario& s,
                     int moving_average_window, std::vector<std::uint64_t> seeds = {}, std::size_t episodes = 0);

/// summary.json: the summary plus per-window actions, rewards and sample counts.
nlohmann::json summary_to_json(const RunSummary& summary, const EpisodeResult& result, const Scenario& s);

/// Most frequent action over windows 1..L-1 (first one on ties); the
/// action of window 0 for single-window episodes.
NetworkAction steady_action(const EpisodeResult& result);
int processing_count(const NetworkAction& action);

struct TrainedPolicy {
  std::uint64_t seed = 0;
  TrainingResult training;
  EpisodeResult greedy;
};

/// Trains once per seed (in parallel where hardware allows) and returns
/// every run in seed order.
std::vector<TrainedPolicy> train_seeds(const Scenario& s, const Discretizer& d, const Hyperparams& h,
                                       std::span<const std::uint64_t> seeds, const TrainingOptions& options = {});

/// Lowest-cost greedy rollout among the runs.
const TrainedPolicy& best_of(const std::vector<TrainedPolicy>& runs);

struct AccuracyRow {
  double v_proc = 0.0;
  std::uint64_t seed = 0;  // seed of the reported policy
  double cost = 0.0;
  NetworkAction first_window;
  NetworkAction steady;
  EpisodeResult greedy;
};

/// Trains per processed-noise level; each row reports the best of `seeds`.
std::vector<AccuracyRow> accuracy_sweep(const Scenario& s, const Discretizer& d, const Hyperparams& h,
                                        std::span<const double> v_proc_values, std::span<const std::uint64_t> seeds);

struct ConvergenceRow {
  int sensors = 0;
  Discretizer discretizer;
  ConvergenceLog log;
  std::size_t episodes_to_converge = 0;
  double final_value = 0.0;
};

/// First checkpoint episode from which every later greedy value stays within
/// `rel_tol` of the final one.
std::size_t episodes_to_within(const ConvergenceLog& log, double rel_tol = 0.01);

/// Trains per sensor count with bins recalibrated for each count.
std::vector<ConvergenceRow> convergence_sweep(const Scenario& s, const Hyperparams& h, std::span<const int> counts,
                                              std::size_t checkpoint_every, std::size_t warmup_episodes);

}  // namespace procnet
