#pragma once

#include "procnet/estimator.hpp"
#include "procnet/model.hpp"

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace procnet {

/// A sample being acquired or processed on board.
struct InFlight {
  Step sample_time = 0;
  SensingMode mode = SensingMode::Raw;
  Step completion_time = 0;
};

struct SensorState {
  int sensor_id = 0;
  int class_id = 0;
  SensingMode mode = SensingMode::Sleep;
  std::optional<InFlight> inflight;
};

/// Next sampling instant after a sample taken at `k` in `mode_at_k`: the first
/// step h >= k + delay(mode_at_k) whose commanded mode is not Sleep, or nullopt
/// if none exists up to `horizon`.
std::optional<Step> next_sample_time(Step k, SensingMode mode_at_k,
                                     const std::function<SensingMode(Step)>& mode_at,
                                     const SensorClass& cls, Step horizon);

struct SwitchOutcome {
  std::vector<SensorState> states;
  std::vector<Measurement> discarded;
  int switches = 0;
};

/// Reassigns modes in one class so that `target` holds while changing as few
/// sensors as possible. Sensors already in a still-needed mode keep it, lowest
/// sensor_id first; the rest fill open raw, then processing, then sleep slots
/// in ascending sensor_id. A switched sensor drops its in-flight sample and,
/// unless put to sleep, starts a new one at `time`.
SwitchOutcome apply_decision_switch(std::span<const SensorState> states, const SensorClass& cls,
                                    const ClassDecision& target, Step time);

/// True iff no mode change of the sensor falls strictly inside the sample's
/// acquisition interval. A change exactly at completion keeps the sample.
bool deliverable(const Measurement& m, const SensorClass& cls, std::span<const Step> switch_times);

}  // namespace procnet
