#pragma once

#include "procnet/estimator.hpp"
#include "procnet/model.hpp"

#include <deque>
#include <span>
#include <utility>
#include <vector>

namespace procnet {

/// Base-station estimator with sequential, non-overlapping fusion cycles.
///
/// A cycle starting at step s takes every received-but-unfused measurement with
/// reception_time <= s and completes at s + fusion.delay(batch). Completion
/// publishes the Kalman predictor covariance given every measurement fused so
/// far; between completions the published covariance is propagated open loop.
/// An idle base station starts the next cycle at the first step with pending
/// data.
///
/// Out-of-sequence data are handled by replaying from a checkpoint: prior
/// covariances are kept per step, and a cycle replays from the earliest sample
/// time in its batch.
class FusionCenter {
 public:
  struct Cycle {
    Step start = 0;
    Step completion = 0;
    std::size_t batch_size = 0;
  };

  FusionCenter(const SystemModel& model, const FusionModel& fusion, Step horizon);

  /// Queues a measurement; its reception time must not lie before the next step.
  void receive(const Measurement& m);

  /// Processes the next step and returns the real-time covariance at it.
  const Matrix& step();

  Step next_step() const { return next_; }
  const Matrix& current() const { return current_; }
  const std::vector<Cycle>& cycles() const { return cycles_; }
  std::size_t fused_count() const { return fused_count_; }
  std::size_t pending_count() const { return pending_.size(); }

 private:
  struct Pending {
    Step reception = 0;
    Step sample = 0;
    const Matrix* information = nullptr;
  };

  const Matrix* information_of(const Matrix& noise);
  void start_cycle(Step t);
  void complete_cycle(Step t);

  const SystemModel& model_;
  FusionModel fusion_;
  Step horizon_;
  Step next_ = 0;
  Matrix current_;

  std::vector<Pending> pending_;
  std::vector<Pending> batch_;
  bool busy_ = false;
  Step completion_ = 0;

  std::vector<Matrix> prior_;       // prior_[k]: covariance at k before fusing samples taken at k
  std::vector<Matrix> information_; // summed V^-1 of fused samples taken at k
  std::vector<char> has_information_;
  Step valid_upto_ = 0;

  std::deque<std::pair<const Matrix*, Matrix>> inverse_cache_;
  std::vector<Cycle> cycles_;
  std::size_t fused_count_ = 0;
};

/// Real-time covariance traces for steps 0..horizon-1 given a reception-ordered
/// measurement stream. Throws std::invalid_argument if the stream is unsorted.
std::vector<double> run_fusion_loop(std::span<const Measurement> received, const FusionModel& fusion,
                                    const SystemModel& model, Step horizon);

}  // namespace procnet
