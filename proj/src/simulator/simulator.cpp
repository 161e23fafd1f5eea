#include "procnet/simulator.hpp"

#include <cstdio>
#include <numeric>
#include <ostream>
#include <string>

namespace procnet {

Episode::Episode(const Scenario& scenario, EpisodeOptions options)
    : scenario_(scenario),
      options_(options),
      fusion_(scenario.model, scenario.fusion, scenario.episode.horizon) {
  int id = 0;
  for (const auto& cls : scenario.classes) {
    class_offset_.push_back(sensors_.size());
    for (int i = 0; i < cls.count; ++i) {
      sensors_.push_back(SensorState{id++, cls.class_id, SensingMode::Sleep, {}});
      class_index_.push_back(class_offset_.size() - 1);
    }
  }
  class_offset_.push_back(sensors_.size());

  const std::size_t n = sensors_.size();
  const std::size_t windows = scenario.episode.window_count();
  result_.period_ms = scenario.model.period_ms;
  result_.trace_series.reserve(static_cast<std::size_t>(scenario.episode.horizon));
  result_.window_rewards.reserve(windows);
  result_.actions.reserve(windows);
  result_.active_steps.assign(n, 0);
  result_.processing_steps.assign(n, 0);
  result_.sleep_steps.assign(n, 0);
  result_.window_active_steps.assign(windows, 0);
  result_.window_processing_steps.assign(windows, 0);
  result_.window_sleep_steps.assign(windows, 0);
  if (options_.record_details) {
    result_.switch_times.assign(n, {});
    open_record_.assign(n, 0);
  }
  observe();
}

void Episode::emit_completions() {
  for (std::size_t i = 0; i < sensors_.size(); ++i) {
    auto& s = sensors_[i];
    if (!s.inflight || s.inflight->completion_time != t_) continue;
    const InFlight f = *s.inflight;
    s.inflight.reset();
    ++result_.delivered_count;
    if (options_.record_details) result_.samples[open_record_[i]].outcome = SampleRecord::Outcome::Delivered;
    const auto& cls = scenario_.classes[class_index_[i]];
    fusion_.receive(
        Measurement{s.sensor_id, s.class_id, f.sample_time, f.mode, cls.noise(f.mode), t_ + cls.communication_delay(f.mode)});
  }
}

void Episode::observe() { result_.trace_series.push_back(fusion_.step().trace()); }

void Episode::start_idle_sensors() {
  for (std::size_t m = 0; m + 1 < class_offset_.size(); ++m) {
    const auto& cls = scenario_.classes[m];
    for (std::size_t i = class_offset_[m]; i < class_offset_[m + 1]; ++i) {
      auto& s = sensors_[i];
      if (s.mode == SensingMode::Sleep || s.inflight) continue;
      s.inflight = InFlight{t_, s.mode, t_ + cls.acquisition_delay(s.mode)};
      ++result_.started_count;
      if (options_.record_details) {
        open_record_[i] = result_.samples.size();
        result_.samples.push_back(SampleRecord{s.sensor_id, s.class_id, t_, s.mode, s.inflight->completion_time,
                                               SampleRecord::Outcome::Unfinished});
      }
    }
  }
}

void Episode::account_step() {
  for (std::size_t i = 0; i < sensors_.size(); ++i) {
    switch (sensors_[i].mode) {
      case SensingMode::Processing:
        ++result_.processing_steps[i];
        ++result_.window_processing_steps[window_];
        [[fallthrough]];
      case SensingMode::Raw:
        ++result_.active_steps[i];
        ++result_.window_active_steps[window_];
        break;
      case SensingMode::Sleep:
        ++result_.sleep_steps[i];
        ++result_.window_sleep_steps[window_];
        break;
    }
  }
}

void Episode::apply(const NetworkAction& action) {
  if (action.decisions.size() != scenario_.classes.size()) {
    throw std::invalid_argument("action has " + std::to_string(action.decisions.size()) + " class decisions, scenario has " +
                                std::to_string(scenario_.classes.size()) + " classes");
  }
  for (std::size_t m = 0; m < scenario_.classes.size(); ++m) {
    if (!action.decisions[m].valid_for(scenario_.classes[m].count)) {
      throw std::invalid_argument("action " + to_string(action) + " is invalid for class " +
                                  std::to_string(scenario_.classes[m].class_id));
    }
  }
  for (std::size_t m = 0; m < scenario_.classes.size(); ++m) {
    const auto& cls = scenario_.classes[m];
    const std::span<SensorState> group(sensors_.data() + class_offset_[m], class_offset_[m + 1] - class_offset_[m]);
    auto outcome = apply_decision_switch(group, cls, action.decisions[m], t_);
    result_.discarded_count += outcome.discarded.size();
    for (std::size_t j = 0; j < group.size(); ++j) {
      const auto& before = group[j];
      const auto& after = outcome.states[j];
      const std::size_t i = class_offset_[m] + j;
      const bool started = after.inflight && after.inflight->sample_time == t_;
      if (options_.record_details) {
        if (before.mode != after.mode) result_.switch_times[i].push_back(t_);
        if (before.inflight && !(after.inflight && after.inflight->sample_time == before.inflight->sample_time)) {
          result_.samples[open_record_[i]].outcome = SampleRecord::Outcome::Discarded;
        }
        if (started) {
          open_record_[i] = result_.samples.size();
          result_.samples.push_back(SampleRecord{after.sensor_id, after.class_id, t_, after.mode,
                                                 after.inflight->completion_time, SampleRecord::Outcome::Unfinished});
        }
      }
      if (started) ++result_.started_count;
    }
    std::copy(outcome.states.begin(), outcome.states.end(), group.begin());
  }
}

void Episode::act(const NetworkAction& action) {
  if (done()) throw std::logic_error("episode already finished");
  apply(action);
  result_.actions.push_back(action);
  start_idle_sensors();
  account_step();

  const auto& cfg = scenario_.episode;
  const Step end = cfg.window_end(window_);
  for (++t_; t_ < end; ++t_) {
    emit_completions();
    observe();
    start_idle_sensors();
    account_step();
  }
  result_.window_rewards.push_back(window_reward(result_.trace_series, cfg, window_));
  ++window_;

  if (done()) {
    for (const auto& s : sensors_) result_.unfinished_count += s.inflight ? 1 : 0;
    result_.episode_cost = episode_cost(result_.trace_series);
    if (options_.record_details) result_.cycles = fusion_.cycles();
  } else {
    emit_completions();
    observe();
  }
}

EpisodeResult Episode::take_result() && { return std::move(result_); }

EpisodeResult run_episode(const Scenario& scenario, const ActionSource& actions, EpisodeOptions options) {
  require_valid(scenario);
  const std::size_t windows = scenario.episode.window_count();
  if (const auto* fixed = std::get_if<std::vector<NetworkAction>>(&actions); fixed && fixed->size() != windows) {
    throw std::invalid_argument("action sequence has " + std::to_string(fixed->size()) + " entries for " +
                                std::to_string(windows) + " windows");
  }
  Episode ep(scenario, options);
  while (!ep.done()) {
    const std::size_t l = ep.window();
    if (const auto* fixed = std::get_if<std::vector<NetworkAction>>(&actions)) {
      ep.act((*fixed)[l]);
    } else {
      ep.act(std::get<Policy>(actions)(DecisionPoint{l, ep.time(), ep.boundary_trace()}));
    }
  }
  return std::move(ep).take_result();
}

double window_reward(std::span<const double> trace_series, const EpisodeConfig& episode, std::size_t l) {
  if (l >= episode.window_count()) {
    throw std::out_of_range("window index " + std::to_string(l) + " outside [0, " +
                            std::to_string(episode.window_count()) + ")");
  }
  const Step begin = episode.window_begin(l);
  const Step end = episode.window_end(l);
  if (end > static_cast<Step>(trace_series.size())) throw std::out_of_range("trace series shorter than window");
  const double sum = std::accumulate(trace_series.begin() + begin, trace_series.begin() + end, 0.0);
  return -sum / static_cast<double>(end - begin);
}

double episode_cost(std::span<const double> trace_series) {
  if (trace_series.empty()) return 0.0;
  return std::accumulate(trace_series.begin(), trace_series.end(), 0.0) / static_cast<double>(trace_series.size());
}

namespace {

EnergyBreakdown to_energy(Step active, Step processing, Step sleep, double period_s, const PowerModel& power) {
  return EnergyBreakdown{power.p_active * static_cast<double>(active) * period_s,
                         power.p_processing * static_cast<double>(processing) * period_s,
                         power.p_sleep * static_cast<double>(sleep) * period_s};
}

}  // namespace

EnergyBreakdown energy(const EpisodeResult& result, const PowerModel& power) {
  const auto sum = [](const std::vector<Step>& v) { return std::accumulate(v.begin(), v.end(), Step{0}); };
  return to_energy(sum(result.active_steps), sum(result.processing_steps), sum(result.sleep_steps),
                   result.period_ms / 1000.0, power);
}

EnergyBreakdown energy(const EpisodeResult& result, const PowerModel& power, std::size_t first, std::size_t last) {
  if (first > last || last >= result.window_active_steps.size()) throw std::out_of_range("energy: bad window range");
  Step active = 0, processing = 0, sleep = 0;
  for (std::size_t l = first; l <= last; ++l) {
    active += result.window_active_steps[l];
    processing += result.window_processing_steps[l];
    sleep += result.window_sleep_steps[l];
  }
  return to_energy(active, processing, sleep, result.period_ms / 1000.0, power);
}

void write_trace_csv(std::ostream& out, const EpisodeResult& result, const EpisodeConfig& episode,
                     std::span<const int> action_ids) {
  out << "step,time_ms,trace,window_index,action_id\n";
  std::size_t l = 0;
  char buf[64];
  for (std::size_t k = 0; k < result.trace_series.size(); ++k) {
    while (l + 1 < episode.window_count() && static_cast<Step>(k) >= episode.window_begin(l + 1)) ++l;
    const int id = l < action_ids.size() ? action_ids[l] : -1;
    std::snprintf(buf, sizeof buf, "%.17g", result.trace_series[k]);
    out << k << ',' << static_cast<Step>(k) * result.period_ms << ',' << buf << ',' << l << ',' << id << '\n';
  }
}

}  // namespace procnet
