#include "procnet/qlearn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>

namespace procnet {

void validate_hyperparams(const Hyperparams& h) {
  if (!(h.alpha > 0.0 && h.alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");
  if (!(0.0 <= h.eps_min && h.eps_min <= h.eps_max && h.eps_max <= 1.0)) {
    throw std::invalid_argument("need 0 <= eps_min <= eps_max <= 1");
  }
  if (!(0.0 <= h.gamma && h.gamma <= 1.0)) throw std::invalid_argument("gamma must lie in [0, 1]");
}

double epsilon(std::size_t t, const Hyperparams& h) {
  return std::max(h.eps_max / std::sqrt(static_cast<double>(t) + 1.0), h.eps_min);
}

QTable::QTable(std::size_t states, std::size_t actions)
    : states_(states), actions_(actions), values_(states * actions, 0.0), visits_(states * actions, 0) {
  if (states == 0 || actions == 0) throw std::invalid_argument("QTable needs at least one state and one action");
}

double& QTable::at(std::size_t s, std::size_t a) {
  if (s >= states_ || a >= actions_) throw std::out_of_range("QTable index out of range");
  return values_[s * actions_ + a];
}

double QTable::at(std::size_t s, std::size_t a) const {
  if (s >= states_ || a >= actions_) throw std::out_of_range("QTable index out of range");
  return values_[s * actions_ + a];
}

std::span<const double> QTable::row(std::size_t s) const {
  if (s >= states_) throw std::out_of_range("QTable state out of range");
  return {values_.data() + s * actions_, actions_};
}

std::uint64_t QTable::visits(std::size_t s, std::size_t a) const {
  if (s >= states_ || a >= actions_) throw std::out_of_range("QTable index out of range");
  return visits_[s * actions_ + a];
}

void q_update(QTable& q, std::size_t s, std::size_t a, double reward, std::size_t s_next, bool terminal,
              const Hyperparams& h) {
  double& value = q.at(s, a);
  if (terminal) {
    value = (1.0 - h.alpha) * value + h.alpha * reward;
  } else {
    const auto next = q.row(s_next);
    const double best = *std::max_element(next.begin(), next.end());
    value += h.alpha * (reward + h.gamma * best - value);
  }
  ++q.visits_[s * q.actions_ + a];
}

std::size_t greedy_action(const QTable& q, std::size_t s) {
  const auto r = q.row(s);
  return static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
}

namespace {

std::string hex(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

nlohmann::json qtable_to_json(const QTable& q, const Scenario& scenario, const Discretizer& d, const Hyperparams& h) {
  const auto actions = enumerate_actions(scenario.classes);
  nlohmann::json values = nlohmann::json::array();
  nlohmann::json visits = nlohmann::json::array();
  for (std::size_t s = 0; s < q.states(); ++s) {
    const auto r = q.row(s);
    values.push_back(std::vector<double>(r.begin(), r.end()));
    std::vector<std::uint64_t> v(q.actions());
    for (std::size_t a = 0; a < q.actions(); ++a) v[a] = q.visits(s, a);
    visits.push_back(std::move(v));
  }
  return {
      {"format", "procnet.qtable/1"},
      {"scenario_hash", hex(scenario_hash(scenario))},
      {"hyperparams",
       {{"alpha", h.alpha},
        {"eps_max", h.eps_max},
        {"eps_min", h.eps_min},
        {"gamma", h.gamma},
        {"episodes", h.episodes},
        {"seed", h.seed}}},
      {"bin_edges", d.bin_edges},
      {"actions", {{"count", actions.size()}, {"fingerprint", hex(action_fingerprint(actions))}}},
      {"values", std::move(values)},
      {"visits", std::move(visits)},
  };
}

QTable qtable_from_json(const nlohmann::json& j, std::uint64_t expected_hash, std::uint64_t expected_fingerprint) {
  try {
    if (j.at("format").get<std::string>() != "procnet.qtable/1") throw std::invalid_argument("unknown Q-table format");
    if (j.at("scenario_hash").get<std::string>() != hex(expected_hash)) {
      throw std::invalid_argument("Q-table was trained on a different scenario");
    }
    if (j.at("actions").at("fingerprint").get<std::string>() != hex(expected_fingerprint)) {
      throw std::invalid_argument("Q-table action order does not match the scenario");
    }
    const auto& values = j.at("values");
    const auto& visits = j.at("visits");
    const std::size_t states = values.size();
    const std::size_t actions = j.at("actions").at("count").get<std::size_t>();
    QTable q(states, actions);
    if (visits.size() != states) throw std::invalid_argument("Q-table visits have the wrong shape");
    for (std::size_t s = 0; s < states; ++s) {
      if (values[s].size() != actions || visits[s].size() != actions) {
        throw std::invalid_argument("Q-table row " + std::to_string(s) + " has the wrong length");
      }
      for (std::size_t a = 0; a < actions; ++a) {
        q.values_[s * actions + a] = values[s][a].get<double>();
        q.visits_[s * actions + a] = visits[s][a].get<std::uint64_t>();
      }
    }
    return q;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed Q-table: ") + e.what());
  }
}

void write_convergence_csv(std::ostream& out, const ConvergenceLog& log) {
  out << "episode,greedy_value\n";
  char buf[64];
  for (const auto& p : log) {
    std::snprintf(buf, sizeof buf, "%.17g", p.greedy_value);
    out << p.episode << ',' << buf << '\n';
  }
}

}  // namespace procnet
