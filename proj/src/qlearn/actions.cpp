#include "procnet/qlearn.hpp"
#include "procnet/scenario_io.hpp"

#include <algorithm>
#include <stdexcept>

namespace procnet {

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t fnv1a(std::uint64_t h, std::string_view text) {
  for (unsigned char c : text) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

}  // namespace

std::vector<NetworkAction> enumerate_actions(const std::vector<SensorClass>& classes) {
  std::vector<NetworkAction> out{NetworkAction{}};
  for (const auto& cls : classes) {
    std::vector<NetworkAction> next;
    next.reserve(out.size() * static_cast<std::size_t>((cls.count + 1) * (cls.count + 2) / 2));
    for (const auto& prefix : out) {
      for (int t = 0; t <= cls.count; ++t) {
        for (int p = 0; p <= t; ++p) {
          NetworkAction a = prefix;
          a.decisions.push_back(ClassDecision{t, p});
          next.push_back(std::move(a));
        }
      }
    }
    out = std::move(next);
  }
  return out;
}

std::size_t action_count(const std::vector<SensorClass>& classes) {
  std::size_t n = 1;
  for (const auto& cls : classes) {
    const auto c = static_cast<std::size_t>(cls.count);
    n *= (c + 1) * (c + 2) / 2;
  }
  return n;
}

std::uint64_t action_fingerprint(std::span<const NetworkAction> actions) {
  std::uint64_t h = kFnvOffset;
  for (const auto& a : actions) h = fnv1a(h, to_string(a) + ";");
  return h;
}

std::uint64_t scenario_hash(const Scenario& scenario) {
  return fnv1a(kFnvOffset, scenario_to_json(scenario).dump());
}

std::vector<int> action_indices(const EpisodeResult& result, const std::vector<SensorClass>& classes) {
  const auto actions = enumerate_actions(classes);
  std::vector<int> ids;
  for (const auto& a : result.actions) {
    const auto it = std::find(actions.begin(), actions.end(), a);
    ids.push_back(it == actions.end() ? -1 : static_cast<int>(it - actions.begin()));
  }
  return ids;
}

std::size_t discretize(double trace_value, const Discretizer& d) {
  if (!(trace_value > 0.0)) throw std::invalid_argument("discretize: trace must be positive");
  return static_cast<std::size_t>(std::upper_bound(d.bin_edges.begin(), d.bin_edges.end(), trace_value) -
                                  d.bin_edges.begin());
}

void validate_discretizer(const Discretizer& d) {
  for (std::size_t i = 0; i < d.bin_edges.size(); ++i) {
    if (!(d.bin_edges[i] > 0.0)) throw std::invalid_argument("bin edges must be positive");
    if (i > 0 && !(d.bin_edges[i] > d.bin_edges[i - 1])) {
      throw std::invalid_argument("bin edges must be strictly increasing");
    }
  }
}

}  // namespace procnet
