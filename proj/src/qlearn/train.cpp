#include "procnet/qlearn.hpp"
#include "procnet/random.hpp"

#include <stdexcept>

namespace procnet {

namespace {

double greedy_value(const QTable& q, const Scenario& scenario, const Discretizer& d) {
  const auto r = evaluate(q, scenario, d);
  double g = 0.0;
  for (double x : r.window_rewards) g += x;
  return g;
}

}  // namespace

TrainingResult train(const Scenario& scenario, const Discretizer& d, const Hyperparams& h,
                     const TrainingOptions& options) {
  require_valid(scenario);
  validate_discretizer(d);
  validate_hyperparams(h);
  const auto actions = enumerate_actions(scenario.classes);

  TrainingResult out{QTable(d.bins(), actions.size()), {}};
  QTable& q = out.q;
  for (std::size_t t = 0; t < h.episodes; ++t) {
    auto rng = stream_rng(h.seed, t);
    const double eps = epsilon(t, h);
    Episode ep(scenario);
    std::size_t s = discretize(ep.boundary_trace(), d);
    while (!ep.done()) {
      const std::size_t a = uniform01(rng) < eps ? uniform_index(rng, actions.size()) : greedy_action(q, s);
      ep.act(actions[a]);
      if (ep.done()) {
        q_update(q, s, a, ep.last_reward(), s, true, h);
      } else {
        const std::size_t next = discretize(ep.boundary_trace(), d);
        q_update(q, s, a, ep.last_reward(), next, false, h);
        s = next;
      }
    }
    if (options.checkpoint_every > 0 && (t + 1) % options.checkpoint_every == 0) {
      out.log.push_back(ConvergencePoint{t + 1, greedy_value(q, scenario, d)});
    }
    if (options.progress) options.progress(t + 1);
  }
  return out;
}

EpisodeResult evaluate(const QTable& q, const Scenario& scenario, const Discretizer& d, EpisodeOptions options) {
  const auto actions = enumerate_actions(scenario.classes);
  if (q.actions() != actions.size() || q.states() != d.bins()) {
    throw std::invalid_argument("Q-table is " + std::to_string(q.states()) + "x" + std::to_string(q.actions()) +
                                ", scenario needs " + std::to_string(d.bins()) + "x" + std::to_string(actions.size()));
  }
  const Policy greedy = [&](const DecisionPoint& p) { return actions[greedy_action(q, discretize(p.trace, d))]; };
  return run_episode(scenario, greedy, options);
}

}  // namespace procnet
