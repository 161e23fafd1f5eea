#include "procnet/experiments.hpp"
#include "procnet/random.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace procnet {

namespace {

// Runs f(0..n-1) on up to hardware_concurrency threads; rethrows the first failure.
template <class F>
void parallel_for(std::size_t n, F&& f) {
  const std::size_t workers = std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
          try {
            f(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

BaselineKind parse_baseline_kind(const std::string& text) {
  if (text == "all_raw") return BaselineKind::AllRaw;
  if (text == "all_processing") return BaselineKind::AllProcessing;
  if (text == "all_sleep") return BaselineKind::AllSleep;
  throw std::invalid_argument("unknown baseline '" + text + "' (expected all_raw, all_processing or all_sleep)");
}

const char* to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::AllRaw:
      return "all_raw";
    case BaselineKind::AllProcessing:
      return "all_processing";
    case BaselineKind::AllSleep:
      return "all_sleep";
  }
  return "?";
}

NetworkAction baseline_action(BaselineKind kind, const std::vector<SensorClass>& classes) {
  NetworkAction a;
  for (const auto& c : classes) {
    switch (kind) {
      case BaselineKind::AllRaw:
        a.decisions.push_back({c.count, 0});
        break;
      case BaselineKind::AllProcessing:
        a.decisions.push_back({c.count, c.count});
        break;
      case BaselineKind::AllSleep:
        a.decisions.push_back({0, 0});
        break;
    }
  }
  return a;
}

EpisodeResult baseline(BaselineKind kind, const Scenario& s, EpisodeOptions options) {
  return run_episode(s, std::vector<NetworkAction>(s.episode.window_count(), baseline_action(kind, s.classes)), options);
}

Optimum brute_force_optimum(const Scenario& s, std::size_t cap) {
  require_valid(s);
  const auto actions = enumerate_actions(s.classes);
  const std::size_t windows = s.episode.window_count();
  std::size_t total = 1;
  for (std::size_t l = 0; l < windows; ++l) {
    if (total > cap / actions.size()) {
      throw std::length_error("brute force needs " + std::to_string(actions.size()) + "^" + std::to_string(windows) +
                              " rollouts, cap is " + std::to_string(cap));
    }
    total *= actions.size();
  }

  Optimum best;
  best.cost = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> idx(windows, 0);
  std::vector<NetworkAction> seq(windows, actions[0]);
  for (std::size_t n = 0; n < total; ++n) {
    for (std::size_t l = 0; l < windows; ++l) seq[l] = actions[idx[l]];
    const double cost = run_episode(s, seq).episode_cost;
    if (cost < best.cost) {
      best.cost = cost;
      best.action_indices = idx;
      best.sequence = seq;
    }
    ++best.evaluated;
    for (std::size_t l = windows; l-- > 0;) {
      if (++idx[l] < actions.size()) break;
      idx[l] = 0;
    }
  }
  return best;
}

Discretizer calibrate_bins(const Scenario& s, std::size_t warmup_episodes, std::uint64_t seed,
                           std::span<const double> percentiles) {
  require_valid(s);
  if (warmup_episodes == 0) throw std::invalid_argument("calibrate_bins: need at least one warm-up episode");
  const auto actions = enumerate_actions(s.classes);
  std::vector<double> traces;
  for (std::size_t e = 0; e < warmup_episodes; ++e) {
    auto rng = stream_rng(seed, e);
    const Policy random = [&](const DecisionPoint& p) {
      traces.push_back(p.trace);
      return actions[uniform_index(rng, actions.size())];
    };
    run_episode(s, random);
  }
  std::sort(traces.begin(), traces.end());
  Discretizer d;
  for (double p : percentiles) {
    if (!(p > 0.0 && p < 100.0)) throw std::invalid_argument("percentiles must lie in (0, 100)");
    const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(traces.size())));
    const double at = traces[std::max<std::size_t>(rank, 1) - 1];
    // Boundary traces repeat exactly (one value per action prefix); cut between
    // distinct values so no observed trace sits on an edge.
    const auto above = std::upper_bound(traces.begin(), traces.end(), at);
    d.bin_edges.push_back(above == traces.end() ? at : 0.5 * (at + *above));
  }
  validate_discretizer(d);
  return d;
}

RunSummary summarize(const std::string& policy, const EpisodeResult& result, const Scenario& s,
                     int moving_average_window, std::vector<std::uint64_t> seeds, std::size_t episodes) {
  return RunSummary{policy, result.episode_cost, energy(result, s.power), moving_average_window, std::move(seeds),
                    episodes};
}

nlohmann::json summary_to_json(const RunSummary& summary, const EpisodeResult& result, const Scenario& s) {
  const auto ids = action_indices(result, s.classes);
  nlohmann::json windows = nlohmann::json::array();
  for (std::size_t l = 0; l < result.window_rewards.size(); ++l) {
    nlohmann::json decisions = nlohmann::json::array();
    for (const auto& d : result.actions[l].decisions) decisions.push_back({d.transmitting, d.processing});
    windows.push_back({{"index", l},
                       {"start_step", s.episode.window_begin(l)},
                       {"end_step", s.episode.window_end(l)},
                       {"action", to_string(result.actions[l])},
                       {"action_id", ids[l]},
                       {"decisions", std::move(decisions)},
                       {"reward", result.window_rewards[l]},
                       {"energy_j", energy(result, s.power, l, l).total()}});
  }
  return {
      {"policy", summary.policy},
      {"mean_error_variance", summary.mean_error_variance},
      {"energy_j",
       {{"sampling_transmission", summary.energy.sampling_transmission},
        {"processing", summary.energy.processing},
        {"sleep", summary.energy.sleep},
        {"total", summary.energy.total()}}},
      {"moving_average", {{"window", summary.moving_average_window}}},
      {"seeds", summary.seeds},
      {"training_episodes", summary.episodes},
      {"horizon_steps", s.episode.horizon},
      {"period_ms", s.model.period_ms},
      {"samples",
       {{"started", result.started_count},
        {"delivered", result.delivered_count},
        {"discarded", result.discarded_count},
        {"unfinished", result.unfinished_count}}},
      {"windows", std::move(windows)},
  };
}

NetworkAction steady_action(const EpisodeResult& result) {
  if (result.actions.empty()) throw std::invalid_argument("steady_action: empty rollout");
  if (result.actions.size() == 1) return result.actions[0];
  std::vector<std::pair<NetworkAction, int>> counts;
  for (std::size_t l = 1; l < result.actions.size(); ++l) {
    auto it = std::find_if(counts.begin(), counts.end(), [&](const auto& c) { return c.first == result.actions[l]; });
    if (it == counts.end()) {
      counts.emplace_back(result.actions[l], 1);
    } else {
      ++it->second;
    }
  }
  return std::max_element(counts.begin(), counts.end(), [](const auto& a, const auto& b) { return a.second < b.second; })
      ->first;
}

int processing_count(const NetworkAction& action) {
  int n = 0;
  for (const auto& d : action.decisions) n += d.processing;
  return n;
}

std::vector<TrainedPolicy> train_seeds(const Scenario& s, const Discretizer& d, const Hyperparams& h,
                                       std::span<const std::uint64_t> seeds, const TrainingOptions& options) {
  std::vector<TrainedPolicy> runs(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t i) {
    Hyperparams hi = h;
    hi.seed = seeds[i];
    TrainingOptions opt;
    opt.checkpoint_every = options.checkpoint_every;
    auto training = train(s, d, hi, opt);
    auto greedy = evaluate(training.q, s, d);
    runs[i] = TrainedPolicy{seeds[i], std::move(training), std::move(greedy)};
  });
  return runs;
}

const TrainedPolicy& best_of(const std::vector<TrainedPolicy>& runs) {
  if (runs.empty()) throw std::invalid_argument("best_of: no runs");
  return *std::min_element(runs.begin(), runs.end(), [](const auto& a, const auto& b) {
    return a.greedy.episode_cost < b.greedy.episode_cost;
  });
}

std::vector<AccuracyRow> accuracy_sweep(const Scenario& s, const Discretizer& d, const Hyperparams& h,
                                        std::span<const double> v_proc_values, std::span<const std::uint64_t> seeds) {
  std::vector<AccuracyRow> rows;
  for (double v : v_proc_values) {
    const Scenario sv = with_processed_noise(s, v);
    require_valid(sv);
    const auto runs = train_seeds(sv, d, h, seeds);
    const auto& best = best_of(runs);
    rows.push_back(AccuracyRow{v, best.seed, best.greedy.episode_cost, best.greedy.actions.front(),
                               steady_action(best.greedy), best.greedy});
  }
  return rows;
}

std::size_t episodes_to_within(const ConvergenceLog& log, double rel_tol) {
  if (log.empty()) throw std::invalid_argument("episodes_to_within: empty log");
  const double final_value = log.back().greedy_value;
  const double tol = rel_tol * std::abs(final_value);
  std::size_t first = log.size() - 1;
  while (first > 0 && std::abs(log[first - 1].greedy_value - final_value) <= tol) --first;
  return log[first].episode;
}

std::vector<ConvergenceRow> convergence_sweep(const Scenario& s, const Hyperparams& h, std::span<const int> counts,
                                              std::size_t checkpoint_every, std::size_t warmup_episodes) {
  if (checkpoint_every == 0) throw std::invalid_argument("convergence sweep needs checkpoints");
  std::vector<ConvergenceRow> rows(counts.size());
  parallel_for(counts.size(), [&](std::size_t i) {
    const Scenario sn = with_sensor_count(s, counts[i]);
    const auto bins = calibrate_bins(sn, warmup_episodes, h.seed);
    TrainingOptions opt;
    opt.checkpoint_every = checkpoint_every;
    auto out = train(sn, bins, h, opt);
    rows[i] = ConvergenceRow{counts[i], bins, out.log, episodes_to_within(out.log), out.log.back().greedy_value};
  });
  return rows;
}

}  // namespace procnet
