// procnet-calibrate: parameter scans used to set the preset constants.

#include "procnet/experiments.hpp"
#include "procnet/qlearn.hpp"
#include "procnet/simulator.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

using nlohmann::json;
using namespace procnet;

namespace {

Scenario with_dynamics(const Scenario& s, double q, double p0) {
  Scenario out = s;
  out.model = build_double_integrator(s.model.period_ms, q, p0);
  return out;
}

NetworkAction single(int t, int p) { return NetworkAction{{ClassDecision{t, p}}}; }

double constant_cost(const Scenario& s, const NetworkAction& a) {
  return run_episode(s, std::vector<NetworkAction>(s.episode.window_count(), a)).episode_cost;
}

struct Best {
  NetworkAction action;
  double cost = std::numeric_limits<double>::infinity();
};

Best best_constant(const Scenario& s) {
  Best best;
  for (const auto& a : enumerate_actions(s.classes)) {
    const double c = constant_cost(s, a);
    if (c < best.cost) best = {a, c};
  }
  return best;
}

// Best policy that plays one action in window 0 and another afterwards.
Best best_two_phase(const Scenario& s, NetworkAction* first) {
  const auto actions = enumerate_actions(s.classes);
  Best best;
  for (const auto& a0 : actions) {
    for (const auto& a1 : actions) {
      std::vector<NetworkAction> seq(s.episode.window_count(), a1);
      seq[0] = a0;
      const double c = run_episode(s, seq).episode_cost;
      if (c < best.cost) {
        best = {a1, c};
        *first = a0;
      }
    }
  }
  return best;
}

int scan_drone(const Preset& preset, const std::vector<double>& qs, const std::vector<double>& cs, int small_n,
               double target_ratio) {
  json rows = json::array();
  for (double q : qs) {
    for (double c : cs) {
      Scenario s = with_dynamics(preset.scenario, q, preset.scenario.model.P0(0, 0));
      s.fusion.cost_per_measurement = c;
      const int n = s.classes[0].count;
      const double raw = constant_cost(s, single(n, 0));
      const double proc = constant_cost(s, single(n, n));
      const auto best = best_constant(s);

      const Scenario accurate = with_processed_noise(with_sensor_count(s, small_n), 0.1);
      const double small_raw = constant_cost(accurate, single(small_n, 0));
      NetworkAction first;
      const auto two = best_two_phase(accurate, &first);

      const bool raw_beats_proc = raw < proc;
      const bool sleep_helps = best.action.decisions[0].transmitting < n && best.cost < raw;
      const bool proc_helps = processing_count(two.action) > 0 && two.cost < small_raw;
      rows.push_back({{"q", q},
                      {"c", c},
                      {"all_raw", raw},
                      {"all_processing", proc},
                      {"ratio", proc / raw},
                      {"ratio_error", std::abs(proc / raw - target_ratio)},
                      {"best_constant", to_string(best.action)},
                      {"best_constant_cost", best.cost},
                      {"accurate_two_phase", to_string(first) + " -> " + to_string(two.action)},
                      {"accurate_two_phase_cost", two.cost},
                      {"accurate_all_raw", small_raw},
                      {"admissible", raw_beats_proc && sleep_helps && proc_helps}});
    }
  }
  std::cout << rows.dump(2) << '\n';
  return 0;
}

std::pair<double, double> window_mean(const EpisodeResult& r, const EpisodeConfig& e, std::size_t first,
                                      std::size_t last) {
  double sum = 0.0;
  Step steps = 0;
  for (std::size_t l = first; l <= last; ++l) {
    const Step len = e.window_end(l) - e.window_begin(l);
    sum += -r.window_rewards[l] * static_cast<double>(len);
    steps += len;
  }
  return {sum / static_cast<double>(steps), static_cast<double>(steps)};
}

int scan_driving(const Preset& preset, const std::vector<double>& qs, const std::vector<double>& p0s,
                 std::size_t transient_windows) {
  json rows = json::array();
  const auto& e = preset.scenario.episode;
  for (double q : qs) {
    for (double p0 : p0s) {
      const Scenario s = with_dynamics(preset.scenario, q, p0);
      const auto raw = baseline(BaselineKind::AllRaw, s);
      const auto proc = baseline(BaselineKind::AllProcessing, s);
      const double raw_t = window_mean(raw, e, 0, transient_windows - 1).first;
      const double proc_t = window_mean(proc, e, 0, transient_windows - 1).first;
      const double raw_s = window_mean(raw, e, transient_windows, e.window_count() - 1).first;
      const double proc_s = window_mean(proc, e, transient_windows, e.window_count() - 1).first;
      rows.push_back({{"q", q},
                      {"p0", p0},
                      {"all_raw", raw.episode_cost},
                      {"all_processing", proc.episode_cost},
                      {"transient_raw", raw_t},
                      {"transient_processing", proc_t},
                      {"steady_raw", raw_s},
                      {"steady_processing", proc_s},
                      {"admissible", proc_t < raw_t && raw_s < proc_s}});
    }
  }
  std::cout << rows.dump(2) << '\n';
  return 0;
}

// Boundary traces reachable within the first L-1 windows, for presets small
// enough to enumerate every action prefix.
std::vector<double> reachable_boundary_traces(const Scenario& s, std::size_t cap) {
  const auto actions = enumerate_actions(s.classes);
  const std::size_t windows = s.episode.window_count();
  std::vector<double> traces;
  std::vector<std::size_t> prefix;
  std::size_t visited = 0;
  auto walk = [&](auto&& self) -> void {
    if (++visited > cap) throw std::length_error("too many action prefixes to enumerate");
    Episode ep(s);
    for (std::size_t i : prefix) ep.act(actions[i]);
    traces.push_back(ep.boundary_trace());
    if (prefix.size() + 1 >= windows) return;
    for (std::size_t a = 0; a < actions.size(); ++a) {
      prefix.push_back(a);
      self(self);
      prefix.pop_back();
    }
  };
  walk(walk);
  std::sort(traces.begin(), traces.end());
  std::vector<double> distinct;
  for (double t : traces) {
    if (distinct.empty() || t - distinct.back() > 1e-9 * std::max(1.0, std::abs(t))) distinct.push_back(t);
  }
  return distinct;
}

int bins(const Preset& preset, std::size_t warmup, std::size_t cap) {
  json out;
  const auto percentile_edges = [&](const Preset& p) -> json {
    try {
      return calibrate_bins(p.scenario, warmup, p.hyper.seed).bin_edges;
    } catch (const std::invalid_argument&) {
      return nullptr;  // too few distinct boundary traces
    }
  };
  out["bin_edges"] = percentile_edges(preset);
  if (preset.desk) out["desk_bin_edges"] = percentile_edges(desk_scale(preset));
  try {
    const auto traces = reachable_boundary_traces(preset.scenario, cap);
    std::vector<double> mids;
    for (std::size_t i = 0; i + 1 < traces.size(); ++i) mids.push_back(0.5 * (traces[i] + traces[i + 1]));
    out["reachable_boundary_traces"] = traces;
    out["separating_bin_edges"] = mids;
  } catch (const std::length_error&) {
    out["separating_bin_edges"] = nullptr;
  }
  std::cout << out.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Calibration scans for the built-in presets"};
  app.require_subcommand(1);

  std::string scenario = "drone";
  std::string driving_scenario = "driving";
  std::vector<double> qs{0.5, 1.0, 1.5, 2.0, 3.0};
  std::vector<double> cs{0.1, 0.13, 0.16};
  std::vector<double> p0s{1.0, 10.0, 100.0};
  int small_n = 10;
  double target_ratio = 6.58 / 5.69;
  std::size_t transient_windows = 2;
  std::size_t warmup = 5000;
  std::size_t cap = 100000;

  auto* drone = app.add_subcommand("drone", "Grid over process noise and fusion cost for a single-class preset");
  drone->add_option("--scenario", scenario);
  drone->add_option("--q", qs)->delimiter(',');
  drone->add_option("--c", cs)->delimiter(',');
  drone->add_option("--small-n", small_n, "Sensor count for the accurate-processing check");
  drone->add_option("--target-ratio", target_ratio, "Target all_processing / all_raw cost ratio");

  auto* driving = app.add_subcommand("driving", "Grid over process noise and initial covariance");
  driving->add_option("--scenario", driving_scenario);
  driving->add_option("--q", qs)->delimiter(',');
  driving->add_option("--p0", p0s)->delimiter(',');
  driving->add_option("--transient-windows", transient_windows);

  auto* bin_cmd = app.add_subcommand("bins", "Percentile bins and, for small presets, separating bins");
  bin_cmd->add_option("--scenario", scenario);
  bin_cmd->add_option("--warmup", warmup);
  bin_cmd->add_option("--cap", cap, "Maximum action prefixes to enumerate");

  CLI11_PARSE(app, argc, argv);
  try {
    const auto preset = load_preset(*driving ? driving_scenario : scenario);
    if (*drone) return scan_drone(preset, qs, cs, small_n, target_ratio);
    if (*driving) return scan_driving(preset, qs, p0s, transient_windows);
    if (*bin_cmd) return bins(preset, warmup, cap);
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "failed"}, {"message", e.what()}}.dump() << '\n';
    return 1;
  }
  return 0;
}
