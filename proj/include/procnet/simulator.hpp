#pragma once

#include "procnet/fusion.hpp"
#include "procnet/model.hpp"
#include "procnet/sensors.hpp"

#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <variant>
#include <vector>

namespace procnet {

struct SampleRecord {
  int sensor_id = 0;
  int class_id = 0;
  Step sample_time = 0;
  SensingMode mode = SensingMode::Raw;
  Step completion_time = 0;
  enum class Outcome : std::uint8_t { Delivered, Discarded, Unfinished } outcome = Outcome::Unfinished;
};

/// Outcome of one rollout. Traces cover steps 0..K-1 and each window owns the
/// half-open step range [k_l, k_{l+1}), so the windows partition the series.
struct EpisodeResult {
  std::vector<double> trace_series;
  std::vector<double> window_rewards;
  std::vector<NetworkAction> actions;
  double episode_cost = 0.0;

  std::size_t started_count = 0;
  std::size_t delivered_count = 0;
  std::size_t discarded_count = 0;
  std::size_t unfinished_count = 0;  // still on board when the horizon ends

  // Per sensor (class-major ids), in steps.
  std::vector<Step> active_steps;
  std::vector<Step> processing_steps;
  std::vector<Step> sleep_steps;
  // Per window, summed over sensors, in sensor-steps.
  std::vector<Step> window_active_steps;
  std::vector<Step> window_processing_steps;
  std::vector<Step> window_sleep_steps;
  int period_ms = 0;

  // Filled only when EpisodeOptions::record_details is set.
  std::vector<SampleRecord> samples;
  std::vector<std::vector<Step>> switch_times;
  std::vector<FusionCenter::Cycle> cycles;
};

struct EpisodeOptions {
  bool record_details = false;
};

/// Incremental rollout: the caller supplies one NetworkAction per decision
/// window. Construction advances to the first boundary (step 0); each act()
/// applies the decision and advances to the next boundary or the horizon.
class Episode {
 public:
  explicit Episode(const Scenario& scenario, EpisodeOptions options = {});

  bool done() const { return window_ >= scenario_.episode.window_count(); }
  std::size_t window() const { return window_; }
  Step time() const { return t_; }
  /// Trace of the real-time covariance at the current boundary.
  double boundary_trace() const { return result_.trace_series.back(); }
  double last_reward() const { return result_.window_rewards.back(); }

  void act(const NetworkAction& action);

  const EpisodeResult& result() const { return result_; }
  EpisodeResult take_result() &&;

 private:
  void emit_completions();
  void observe();
  void start_idle_sensors();
  void account_step();
  void apply(const NetworkAction& action);

  const Scenario& scenario_;
  EpisodeOptions options_;
  FusionCenter fusion_;
  std::vector<SensorState> sensors_;
  std::vector<std::size_t> class_offset_;
  std::vector<std::size_t> class_index_;  // position in scenario_.classes per sensor
  std::vector<std::size_t> open_record_;  // index into result_.samples per sensor
  std::size_t window_ = 0;
  Step t_ = 0;
  EpisodeResult result_;
};

struct DecisionPoint {
  std::size_t window = 0;
  Step time = 0;
  double trace = 0.0;
};

using Policy = std::function<NetworkAction(const DecisionPoint&)>;
using ActionSource = std::variant<std::vector<NetworkAction>, Policy>;

/// Full rollout. Deterministic: the covariance recursion has no randomness.
EpisodeResult run_episode(const Scenario& scenario, const ActionSource& actions, EpisodeOptions options = {});

/// Negative mean trace over window l (0-based), i.e. over [k_l, k_{l+1}).
double window_reward(std::span<const double> trace_series, const EpisodeConfig& episode, std::size_t l);

/// Mean of the trace series, (1/K) * sum over the K horizon steps.
double episode_cost(std::span<const double> trace_series);

struct EnergyBreakdown {
  double sampling_transmission = 0.0;  // joules
  double processing = 0.0;
  double sleep = 0.0;
  double total() const { return sampling_transmission + processing + sleep; }
};

EnergyBreakdown energy(const EpisodeResult& result, const PowerModel& power);
/// Energy restricted to windows [first, last].
EnergyBreakdown energy(const EpisodeResult& result, const PowerModel& power, std::size_t first, std::size_t last);

/// `step,time_ms,trace,window_index,action_id`, one row per horizon step.
/// `action_ids` holds one id per window (or is empty, giving -1).
void write_trace_csv(std::ostream& out, const EpisodeResult& result, const EpisodeConfig& episode,
                     std::span<const int> action_ids);

}  // namespace procnet
