#include "procnet/sensors.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <string>

namespace procnet {

std::optional<Step> next_sample_time(Step k, SensingMode mode_at_k,
                                     const std::function<SensingMode(Step)>& mode_at,
                                     const SensorClass& cls, Step horizon) {
  if (mode_at_k == SensingMode::Sleep) {
    throw std::invalid_argument("next_sample_time: no sample is taken in sleep mode");
  }
  for (Step h = k + cls.acquisition_delay(mode_at_k); h <= horizon; ++h) {
    if (mode_at(h) != SensingMode::Sleep) return h;
  }
  return std::nullopt;
}

SwitchOutcome apply_decision_switch(std::span<const SensorState> states, const SensorClass& cls,
                                    const ClassDecision& target, Step time) {
  const int n = static_cast<int>(states.size());
  if (!target.valid_for(n)) {
    throw std::invalid_argument("decision (" + std::to_string(target.transmitting) + "," +
                                std::to_string(target.processing) + ") is invalid for a class of " +
                                std::to_string(n) + " sensors");
  }

  constexpr auto idx = [](SensingMode m) { return static_cast<std::size_t>(m); };
  std::array<int, 3> open{};
  open[idx(SensingMode::Raw)] = target.raw();
  open[idx(SensingMode::Processing)] = target.processing;
  open[idx(SensingMode::Sleep)] = n - target.transmitting;

  std::vector<std::size_t> order(states.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return states[a].sensor_id < states[b].sensor_id; });

  SwitchOutcome out;
  out.states.assign(states.begin(), states.end());
  std::vector<std::size_t> movers;
  for (std::size_t i : order) {
    auto& slot = open[idx(states[i].mode)];
    if (slot > 0) {
      --slot;
    } else {
      movers.push_back(i);
    }
  }

  for (std::size_t i : movers) {
    SensingMode next = SensingMode::Sleep;
    for (SensingMode m : {SensingMode::Raw, SensingMode::Processing, SensingMode::Sleep}) {
      if (open[idx(m)] > 0) {
        next = m;
        --open[idx(m)];
        break;
      }
    }
    auto& s = out.states[i];
    if (s.inflight) {
      const auto& f = *s.inflight;
      out.discarded.push_back(Measurement{s.sensor_id, s.class_id, f.sample_time, f.mode, cls.noise(f.mode),
                                          f.completion_time + cls.communication_delay(f.mode)});
      s.inflight.reset();
    }
    s.mode = next;
    if (next != SensingMode::Sleep) s.inflight = InFlight{time, next, time + cls.acquisition_delay(next)};
    ++out.switches;
  }
  return out;
}

bool deliverable(const Measurement& m, const SensorClass& cls, std::span<const Step> switch_times) {
  const Step done = m.sample_time + cls.acquisition_delay(m.mode);
  return std::none_of(switch_times.begin(), switch_times.end(),
                      [&](Step s) { return s > m.sample_time && s < done; });
}

}  // namespace procnet
