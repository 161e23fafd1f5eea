#include "procnet/fusion.hpp"
#include "procnet/sensors.hpp"
#include "procnet/simulator.hpp"
#include "support/fixtures.hpp"
#include "support/fusion_schedule.hpp"
#include "support/reference_kf.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <sstream>

using namespace procnet;
using namespace procnet::testing;

namespace {

SensorState state(int id, SensingMode mode) { return SensorState{id, 0, mode, {}}; }

std::vector<SensingMode> modes_of(const std::vector<SensorState>& s) {
  std::vector<SensingMode> out;
  for (const auto& x : s) out.push_back(x.mode);
  return out;
}

// Fewest sensors that must change mode to realise `target`, by trying every
// assignment.
int min_switches_exhaustive(const std::vector<SensingMode>& current, const ClassDecision& target) {
  const int n = static_cast<int>(current.size());
  int total = 1;
  for (int i = 0; i < n; ++i) total *= 3;
  int best = n + 1;
  for (int code = 0; code < total; ++code) {
    int c = code, raw = 0, proc = 0, changes = 0;
    for (int i = 0; i < n; ++i, c /= 3) {
      const auto m = static_cast<SensingMode>(c % 3);
      raw += m == SensingMode::Raw;
      proc += m == SensingMode::Processing;
      changes += m != current[static_cast<std::size_t>(i)];
    }
    if (raw == target.raw() && proc == target.processing) best = std::min(best, changes);
  }
  return best;
}

Scenario drone(int count, double v_proc = 1.0) {
  Scenario s;
  s.model = build_double_integrator(10, 1.0, 1.0);
  s.classes = {drone_class(count, v_proc)};
  s.episode = EpisodeConfig::equal_windows(10, 50);
  s.fusion = FusionModel{0.15, 1.0};
  s.power = PowerModel{3.99, 0.15, 0.0};
  return s;
}

std::vector<NetworkAction> constant(const Scenario& s, int transmitting, int processing) {
  return std::vector<NetworkAction>(s.episode.window_count(),
                                    NetworkAction{{ClassDecision{transmitting, processing}}});
}

// Reference traces rebuilt from the delivered samples of a detailed rollout.
std::vector<double> reference_traces(const Scenario& s, const EpisodeResult& r) {
  std::vector<ReferenceSample> delivered;
  for (const auto& rec : r.samples) {
    if (rec.outcome != SampleRecord::Outcome::Delivered) continue;
    const auto& cls = s.classes[static_cast<std::size_t>(rec.class_id)];
    delivered.push_back(ReferenceSample{rec.sample_time, cls.noise(rec.mode),
                                        rec.completion_time + cls.communication_delay(rec.mode)});
  }
  std::stable_sort(delivered.begin(), delivered.end(),
                   [](const auto& a, const auto& b) { return a.available_at < b.available_at; });
  std::vector<Step> receptions;
  for (const auto& d : delivered) receptions.push_back(d.available_at);
  const auto available = fusion_schedule(receptions, s.fusion, s.episode.horizon);
  for (std::size_t i = 0; i < delivered.size(); ++i) delivered[i].available_at = available[i];
  return TrajectoryPrior(s.model, s.episode.horizon).traces(delivered, s.episode.horizon);
}

}  // namespace

TEST_CASE("next sample time under a constant raw mode") {
  const auto cls = drone_class(1);
  const auto raw = [](Step) { return SensingMode::Raw; };
  std::vector<Step> seq{0};
  while (auto next = next_sample_time(seq.back(), SensingMode::Raw, raw, cls, 20)) seq.push_back(*next);
  CHECK(seq == std::vector<Step>{0, 4, 8, 12, 16, 20});
}

TEST_CASE("next sample time follows processing, sleep, raw decisions") {
  // Decisions p, p, s, r at k0 = 0, k1 = 14, k2 = 28, k3 = 42.
  const auto cls = drone_class(1);
  const auto mode_at = [](Step h) {
    if (h < 28) return SensingMode::Processing;
    if (h < 42) return SensingMode::Sleep;
    return SensingMode::Raw;
  };
  const auto s1 = next_sample_time(0, SensingMode::Processing, mode_at, cls, 100);
  REQUIRE(s1);
  CHECK(*s1 == 14);
  const auto s2 = next_sample_time(*s1, mode_at(*s1), mode_at, cls, 100);
  REQUIRE(s2);
  CHECK(*s2 == 42);
}

TEST_CASE("next sample time skips a sleep stretch") {
  auto cls = drone_class(1);
  cls.delay_raw = 3;
  const auto mode_at = [](Step h) { return h < 7 ? SensingMode::Sleep : SensingMode::Raw; };
  CHECK(next_sample_time(0, SensingMode::Raw, mode_at, cls, 50) == std::optional<Step>{7});
  CHECK_FALSE(next_sample_time(0, SensingMode::Raw, [](Step) { return SensingMode::Sleep; }, cls, 50));
  CHECK_THROWS_AS(next_sample_time(0, SensingMode::Sleep, mode_at, cls, 50), std::invalid_argument);
}

TEST_CASE("a target that already holds switches nobody") {
  const auto cls = drone_class(4);
  std::vector<SensorState> s{state(0, SensingMode::Raw), state(1, SensingMode::Raw), state(2, SensingMode::Processing),
                             state(3, SensingMode::Sleep)};
  s[0].inflight = InFlight{2, SensingMode::Raw, 6};
  const auto out = apply_decision_switch(s, cls, ClassDecision{3, 1}, 5);
  CHECK(out.switches == 0);
  CHECK(out.discarded.empty());
  CHECK(out.states[0].inflight->sample_time == 2);
}

TEST_CASE("a processing sensor commanded raw drops its sample and restarts") {
  const auto cls = drone_class(1);
  std::vector<SensorState> s{state(0, SensingMode::Processing)};
  s[0].inflight = InFlight{40, SensingMode::Processing, 54};
  const auto out = apply_decision_switch(s, cls, ClassDecision{1, 0}, 50);
  CHECK(out.switches == 1);
  REQUIRE(out.discarded.size() == 1);
  CHECK(out.discarded[0].sample_time == 40);
  CHECK(out.discarded[0].mode == SensingMode::Processing);
  CHECK(out.states[0].mode == SensingMode::Raw);
  REQUIRE(out.states[0].inflight);
  CHECK(out.states[0].inflight->sample_time == 50);
  CHECK(out.states[0].inflight->completion_time == 54);
}

TEST_CASE("two raw and one asleep to three processing takes three switches") {
  const auto cls = drone_class(3);
  std::vector<SensorState> s{state(0, SensingMode::Raw), state(1, SensingMode::Raw), state(2, SensingMode::Sleep)};
  const ClassDecision target{3, 3};
  const auto out = apply_decision_switch(s, cls, target, 30);
  CHECK(out.switches == 3);
  CHECK(min_switches_exhaustive(modes_of(s), target) == 3);
  for (const auto& x : out.states) {
    CHECK(x.mode == SensingMode::Processing);
    REQUIRE(x.inflight);
    CHECK(x.inflight->sample_time == 30);
  }
  CHECK_THROWS_AS(apply_decision_switch(s, cls, ClassDecision{4, 0}, 30), std::invalid_argument);
  CHECK_THROWS_AS(apply_decision_switch(s, cls, ClassDecision{1, 2}, 30), std::invalid_argument);
}

TEST_CASE("greedy switching is minimal over every start and target") {
  for (int n = 1; n <= 5; ++n) {
    const auto cls = drone_class(n);
    int total = 1;
    for (int i = 0; i < n; ++i) total *= 3;
    for (int code = 0; code < total; ++code) {
      std::vector<SensorState> s;
      for (int i = 0, c = code; i < n; ++i, c /= 3) s.push_back(state(i, static_cast<SensingMode>(c % 3)));
      for (int t = 0; t <= n; ++t) {
        for (int p = 0; p <= t; ++p) {
          const ClassDecision target{t, p};
          const auto out = apply_decision_switch(s, cls, target, 0);
          int raw = 0, proc = 0, changed = 0;
          for (std::size_t i = 0; i < s.size(); ++i) {
            raw += out.states[i].mode == SensingMode::Raw;
            proc += out.states[i].mode == SensingMode::Processing;
            changed += out.states[i].mode != s[i].mode;
          }
          CHECK(raw == target.raw());
          CHECK(proc == target.processing);
          CHECK(changed == out.switches);
          CHECK(out.switches == min_switches_exhaustive(modes_of(s), target));
        }
      }
    }
  }
}

TEST_CASE("deliverability against the switch schedule") {
  const auto cls = drone_class(1);
  const Matrix& v = cls.V_raw;
  const Measurement raw{0, 0, 10, SensingMode::Raw, std::cref(v), 15};
  const std::vector<Step> at_boundary{14};
  CHECK(deliverable(raw, cls, at_boundary));

  const Measurement proc{0, 0, 10, SensingMode::Processing, std::cref(v), 25};
  const std::vector<Step> mid{20};
  CHECK_FALSE(deliverable(proc, cls, mid));
  CHECK(deliverable(proc, cls, std::span<const Step>{}));
  const std::vector<Step> at_start{10};
  CHECK(deliverable(proc, cls, at_start));
}

TEST_CASE("a cycle fuses only what arrived before it started") {
  // Samples at 1 and 3 arrive by step 4; a sample at 2 arrives at 5, during
  // the cycle started at 4, and waits for the next one.
  const auto model = build_double_integrator(10, 20.0);
  const FusionModel fusion{0.0, 3.0};
  const Matrix v = Matrix::Identity(2, 2);
  std::vector<Measurement> stream{
      {0, 0, 1, SensingMode::Raw, std::cref(v), 4},
      {1, 0, 3, SensingMode::Raw, std::cref(v), 4},
      {2, 0, 2, SensingMode::Raw, std::cref(v), 5},
  };
  const auto traces = run_fusion_loop(stream, fusion, model, 14);
  const std::vector<Measurement> first{stream[0], stream[1]};
  CHECK(traces[6] == doctest::Approx(predict_multi(model, model.P0, 0, 6).trace()));
  CHECK(traces[7] == doctest::Approx(fuse_batch(model, model.P0, 0, first, 7).trace()).epsilon(1e-12));
  CHECK(traces[9] == doctest::Approx(fuse_batch(model, model.P0, 0, first, 9).trace()).epsilon(1e-12));
  CHECK(traces[10] == doctest::Approx(fuse_batch(model, model.P0, 0, stream, 10).trace()).epsilon(1e-12));

  FusionCenter center(model, fusion, 14);
  for (const auto& m : stream) center.receive(m);
  for (int i = 0; i < 14; ++i) center.step();
  REQUIRE(center.cycles().size() == 2);
  CHECK(center.cycles()[0].start == 4);
  CHECK(center.cycles()[0].completion == 7);
  CHECK(center.cycles()[1].start == 7);
  CHECK(center.cycles()[1].batch_size == 1);
}

TEST_CASE("instantaneous fusion uses everything received so far") {
  const auto model = build_double_integrator(10, 5.0);
  const Matrix v = 0.5 * Matrix::Identity(2, 2);
  std::vector<Measurement> stream;
  for (Step k = 0; k < 30; k += 3) stream.push_back(Measurement{0, 0, k, SensingMode::Raw, std::cref(v), k + 2});
  const auto traces = run_fusion_loop(stream, FusionModel{}, model, 35);
  for (Step t = 0; t < 35; ++t) {
    std::vector<Measurement> seen;
    for (const auto& m : stream) {
      if (m.reception_time <= t) seen.push_back(m);
    }
    CHECK(traces[static_cast<std::size_t>(t)] == doctest::Approx(fuse_batch(model, model.P0, 0, seen, t).trace()).epsilon(1e-12));
  }
}

TEST_CASE("fusion loop matches direct conditioning for random streams") {
  std::mt19937_64 rng(77);
  const auto model = build_double_integrator(10, 30.0, 3.0);
  const Step horizon = 60;
  const TrajectoryPrior prior(model, horizon);
  std::vector<Matrix> noises;
  for (int i = 0; i < 4; ++i) noises.push_back(random_spd(rng, 2, 0.05));
  for (int trial = 0; trial < 25; ++trial) {
    const FusionModel fusion{0.5 * static_cast<double>(rng() % 4), static_cast<double>(rng() % 3)};
    std::vector<Measurement> stream;
    const int count = static_cast<int>(rng() % 20);
    for (int i = 0; i < count; ++i) {
      const Step sample = static_cast<Step>(rng() % 50);
      const Step reception = sample + static_cast<Step>(rng() % 8);
      stream.push_back(Measurement{i, 0, sample, SensingMode::Raw, std::cref(noises[rng() % 4]), reception});
    }
    std::stable_sort(stream.begin(), stream.end(),
                     [](const auto& a, const auto& b) { return a.reception_time < b.reception_time; });
    std::vector<Step> receptions;
    for (const auto& m : stream) receptions.push_back(m.reception_time);
    const auto available = fusion_schedule(receptions, fusion, horizon);
    std::vector<ReferenceSample> ref;
    for (std::size_t i = 0; i < stream.size(); ++i) {
      ref.push_back(ReferenceSample{stream[i].sample_time, stream[i].noise_cov.get(), available[i]});
    }
    const auto expected = prior.traces(ref, horizon);
    const auto got = run_fusion_loop(stream, fusion, model, horizon);
    REQUIRE(got.size() == expected.size());
    for (std::size_t k = 0; k < got.size(); ++k) CHECK(got[k] == doctest::Approx(expected[k]).epsilon(1e-9));
  }
}

TEST_CASE("single delayed sensor matches the textbook delayed recursion") {
  // Scalar random walk, one sample per step, each received one step later and
  // fused instantly.
  const auto model = scalar_model(1.0, 1.0, 4.0);
  const Matrix v = scalar(2.0);
  std::vector<Measurement> stream;
  for (Step k = 0; k < 20; ++k) stream.push_back(Measurement{0, 0, k, SensingMode::Raw, std::cref(v), k + 1});
  const auto traces = run_fusion_loop(stream, FusionModel{}, model, 20);
  // Filtered variance f_k given y_0..y_k; the real-time value at t is f_{t-1} + w.
  double f = 1.0 / (1.0 / 4.0 + 1.0 / 2.0);
  CHECK(traces[0] == doctest::Approx(4.0));
  for (std::size_t t = 1; t < 20; ++t) {
    CHECK(traces[t] == doctest::Approx(f + 1.0).epsilon(1e-12));
    f = 1.0 / (1.0 / (f + 1.0) + 1.0 / 2.0);
  }
}

TEST_CASE("fusion cycles never overlap and completions only lower the trace") {
  std::mt19937_64 rng(8);
  const auto model = build_double_integrator(10, 10.0);
  const Matrix v = Matrix::Identity(2, 2);
  FusionCenter center(model, FusionModel{0.7, 0.5}, 200);
  for (Step t = 0; t < 200; ++t) {
    if (rng() % 2) center.receive(Measurement{0, 0, t - static_cast<Step>(rng() % std::min<Step>(t + 1, 6)), SensingMode::Raw, std::cref(v), t});
    const Matrix before = t == 0 ? model.P0 : predict_step(model, center.current(), t - 1);
    const double trace = center.step().trace();
    CHECK(trace <= before.trace() + 1e-9);
  }
  const auto& cycles = center.cycles();
  for (std::size_t i = 1; i < cycles.size(); ++i) CHECK(cycles[i - 1].completion <= cycles[i].start);
  CHECK_THROWS_AS(center.step(), std::out_of_range);
}

TEST_CASE("unsorted streams are rejected") {
  const auto model = build_double_integrator(10, 1.0);
  const Matrix v = Matrix::Identity(2, 2);
  std::vector<Measurement> stream{{0, 0, 3, SensingMode::Raw, std::cref(v), 5}, {0, 0, 1, SensingMode::Raw, std::cref(v), 4}};
  CHECK_THROWS_AS(run_fusion_loop(stream, FusionModel{}, model, 10), std::invalid_argument);
}

TEST_CASE("all-sleep episodes grow open loop from the initial covariance") {
  auto s = drone(3);
  s.model = scalar_model(1.02, 0.3, 2.0);
  s.classes = {make_class(0, 3, 4, 14, 1, scalar(10.0), scalar(1.0))};
  const auto r = run_episode(s, constant(s, 0, 0));
  REQUIRE(r.trace_series.size() == 500);
  const double a2 = 1.02 * 1.02;
  for (std::size_t k = 0; k < r.trace_series.size(); ++k) {
    const double g = std::pow(a2, static_cast<double>(k));
    CHECK(r.trace_series[k] == doctest::Approx(g * 2.0 + 0.3 * (1.0 - g) / (1.0 - a2)).epsilon(1e-10));
  }
  CHECK(r.started_count == 0);
  CHECK(energy(r, s.power).total() == 0.0);
}

TEST_CASE("episode traces equal direct conditioning on the delivered samples") {
  std::mt19937_64 rng(12);
  auto s = drone(4);
  s.episode = EpisodeConfig::equal_windows(6, 20);
  for (int trial = 0; trial < 15; ++trial) {
    std::vector<NetworkAction> actions;
    for (std::size_t l = 0; l < s.episode.window_count(); ++l) {
      const int t = static_cast<int>(rng() % 5);
      const int p = t == 0 ? 0 : static_cast<int>(rng() % (t + 1));
      actions.push_back(NetworkAction{{ClassDecision{t, p}}});
    }
    const auto r = run_episode(s, actions, EpisodeOptions{true});
    const auto expected = reference_traces(s, r);
    for (std::size_t k = 0; k < expected.size(); ++k) CHECK(r.trace_series[k] == doctest::Approx(expected[k]).epsilon(1e-9));
  }
}

TEST_CASE("episode bookkeeping invariants hold for random policies") {
  std::mt19937_64 rng(99);
  Scenario s;
  s.model = build_double_integrator(10, 2.0);
  s.classes = {make_class(0, 3, 2, 5, 1, 4.0 * Matrix::Identity(2, 2), Matrix::Identity(2, 2)),
               make_class(1, 2, 3, 9, 0, 8.0 * Matrix::Identity(2, 2), 2.0 * Matrix::Identity(2, 2))};
  s.episode = EpisodeConfig{97, {0, 7, 20, 31, 50, 81}};
  s.fusion = FusionModel{0.4, 0.5};
  s.power = PowerModel{2.0, 0.5, 0.1};
  for (int trial = 0; trial < 30; ++trial) {
    const Policy policy = [&](const DecisionPoint&) {
      NetworkAction a;
      for (const auto& cls : s.classes) {
        const int t = static_cast<int>(rng() % static_cast<unsigned>(cls.count + 1));
        const int p = static_cast<int>(rng() % static_cast<unsigned>(t + 1));
        a.decisions.push_back(ClassDecision{t, p});
      }
      return a;
    };
    const auto r = run_episode(s, policy, EpisodeOptions{true});
    CHECK(r.delivered_count + r.discarded_count + r.unfinished_count == r.started_count);
    CHECK(r.samples.size() == r.started_count);

    // Delivered iff no switch of the sensor falls strictly inside the sample.
    std::map<SampleRecord::Outcome, std::size_t> outcomes;
    for (const auto& rec : r.samples) {
      ++outcomes[rec.outcome];
      const auto& cls = s.classes[static_cast<std::size_t>(rec.class_id)];
      const Measurement m{rec.sensor_id, rec.class_id, rec.sample_time, rec.mode, std::cref(cls.noise(rec.mode)), 0};
      const auto& sw = r.switch_times[static_cast<std::size_t>(rec.sensor_id)];
      if (rec.outcome == SampleRecord::Outcome::Delivered) CHECK(deliverable(m, cls, sw));
      if (rec.outcome == SampleRecord::Outcome::Discarded) CHECK_FALSE(deliverable(m, cls, sw));
      CHECK(rec.mode != SensingMode::Sleep);
    }
    CHECK(outcomes[SampleRecord::Outcome::Delivered] == r.delivered_count);
    CHECK(outcomes[SampleRecord::Outcome::Discarded] == r.discarded_count);

    double weighted = 0.0;
    for (std::size_t l = 0; l < r.window_rewards.size(); ++l) {
      weighted += r.window_rewards[l] * static_cast<double>(s.episode.window_end(l) - s.episode.window_begin(l));
    }
    CHECK(-weighted / 97.0 == doctest::Approx(r.episode_cost).epsilon(1e-12));

    const auto& cycles = r.cycles;
    for (std::size_t i = 1; i < cycles.size(); ++i) CHECK(cycles[i - 1].completion <= cycles[i].start);

    const auto whole = energy(r, s.power);
    const auto split = energy(r, s.power, 0, 2).total() + energy(r, s.power, 3, 5).total();
    CHECK(whole.total() == doctest::Approx(split));
  }
}

TEST_CASE("equal windows: the rewards sum to minus L times the episode cost") {
  const auto s = drone(5);
  const auto r = run_episode(s, constant(s, 3, 1));
  double sum = 0.0;
  for (double x : r.window_rewards) sum += x;
  CHECK(sum == doctest::Approx(-10.0 * r.episode_cost).epsilon(1e-12));
}

TEST_CASE("identical rollouts are bitwise identical") {
  const auto s = drone(6);
  const Policy policy = [](const DecisionPoint& d) {
    const int t = static_cast<int>(d.window % 7);
    return NetworkAction{{ClassDecision{t, std::min(t, static_cast<int>(d.window % 3))}}};
  };
  const auto a = run_episode(s, policy, EpisodeOptions{true});
  const auto b = run_episode(s, policy, EpisodeOptions{true});
  CHECK(a.trace_series == b.trace_series);
  CHECK(a.window_rewards == b.window_rewards);
  CHECK(a.actions == b.actions);
  CHECK(a.started_count == b.started_count);
  CHECK(a.active_steps == b.active_steps);
}

TEST_CASE("window reward over constant and linear traces") {
  const auto cfg = EpisodeConfig::equal_windows(3, 8);
  std::vector<double> flat(24, 2.5);
  for (std::size_t l = 0; l < 3; ++l) CHECK(window_reward(flat, cfg, l) == doctest::Approx(-2.5));

  // Values 0..m-1 over a window of m steps average to (m-1)/2.
  std::vector<double> ramp(24);
  for (std::size_t k = 0; k < 24; ++k) ramp[k] = static_cast<double>(k % 8);
  for (std::size_t l = 0; l < 3; ++l) CHECK(window_reward(ramp, cfg, l) == doctest::Approx(-3.5));
  CHECK_THROWS_AS(window_reward(ramp, cfg, 3), std::out_of_range);
  CHECK(episode_cost(ramp) == doctest::Approx(3.5));
}

TEST_CASE("drone energy: all raw and all processing") {
  const auto s = drone(25);
  const auto raw = energy(run_episode(s, constant(s, 25, 0)), s.power);
  CHECK(raw.total() == doctest::Approx(498.8).epsilon(0.1 / 498.8));
  CHECK(raw.total() == doctest::Approx(25 * 5.0 * 3.99));
  const auto proc = energy(run_episode(s, constant(s, 25, 25)), s.power);
  CHECK(proc.processing == doctest::Approx(18.75));
  CHECK(proc.total() == doctest::Approx(517.8).epsilon(0.3 / 517.8));
}

TEST_CASE("invalid actions and sequences are rejected") {
  const auto s = drone(3);
  CHECK_THROWS_AS(run_episode(s, constant(s, 4, 0)), std::invalid_argument);
  CHECK_THROWS_AS(run_episode(s, constant(s, 1, 2)), std::invalid_argument);
  auto short_seq = constant(s, 1, 0);
  short_seq.pop_back();
  CHECK_THROWS_AS(run_episode(s, short_seq), std::invalid_argument);
  auto bad = s;
  bad.classes[0].delay_proc = 4;
  CHECK_THROWS_AS(run_episode(bad, constant(s, 1, 0)), ScenarioError);
}

TEST_CASE("trace CSV has one row per step") {
  const auto s = drone(2);
  const auto r = run_episode(s, constant(s, 2, 0));
  std::vector<int> ids(10, 7);
  std::ostringstream out;
  write_trace_csv(out, r, s.episode, ids);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "step,time_ms,trace,window_index,action_id");
  std::size_t rows = 0;
  double sum = 0.0;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string field;
    std::vector<std::string> f;
    while (std::getline(row, field, ',')) f.push_back(field);
    REQUIRE(f.size() == 5);
    CHECK(std::stoll(f[0]) == static_cast<long long>(rows));
    CHECK(std::stoll(f[1]) == static_cast<long long>(rows * 10));
    CHECK(std::stoul(f[3]) == rows / 50);
    sum += std::stod(f[2]);
    ++rows;
  }
  CHECK(rows == 500);
  CHECK(sum / 500.0 == doctest::Approx(r.episode_cost).epsilon(1e-14));
}
