#include "procnet/experiments.hpp"
#include "procnet/scenario_io.hpp"

#include "builtin_presets.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace procnet {

namespace {

Hyperparams hyper_from_json(const nlohmann::json& j) {
  Hyperparams h;
  h.alpha = j.at("alpha").get<double>();
  h.eps_max = j.at("eps_max").get<double>();
  h.eps_min = j.at("eps_min").get<double>();
  h.gamma = j.value("gamma", 1.0);
  h.episodes = j.at("episodes").get<std::size_t>();
  h.seed = j.value("seed", std::uint64_t{0});
  return h;
}

}  // namespace

Preset preset_from_json(const nlohmann::json& j) {
  Preset p;
  p.scenario = scenario_from_json(j);
  try {
    p.name = j.value("name", std::string("custom"));
    p.discretizer.bin_edges = j.at("discretizer").at("bin_edges").get<std::vector<double>>();
    p.hyper = hyper_from_json(j.at("hyperparams"));
    p.moving_average_window = j.value("moving_average_window", 1);
    p.checkpoint_every = j.value("checkpoint_every", std::size_t{1000});
    if (j.contains("desk")) {
      const auto& d = j.at("desk");
      DeskScale desk;
      desk.sensors = d.value("sensors", 0);
      desk.episodes = d.value("episodes", p.hyper.episodes);
      desk.alpha = d.value("alpha", p.hyper.alpha);
      desk.discretizer.bin_edges = d.value("bin_edges", p.discretizer.bin_edges);
      p.desk = desk;
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("preset: ") + e.what());
  }
  validate_discretizer(p.discretizer);
  validate_hyperparams(p.hyper);
  if (p.desk) validate_discretizer(p.desk->discretizer);
  return p;
}

nlohmann::json preset_to_json(const Preset& p) {
  auto j = scenario_to_json(p.scenario);
  j["name"] = p.name;
  j["discretizer"] = {{"bin_edges", p.discretizer.bin_edges}};
  j["hyperparams"] = {{"alpha", p.hyper.alpha},     {"eps_max", p.hyper.eps_max},   {"eps_min", p.hyper.eps_min},
                      {"gamma", p.hyper.gamma},     {"episodes", p.hyper.episodes}, {"seed", p.hyper.seed}};
  j["moving_average_window"] = p.moving_average_window;
  j["checkpoint_every"] = p.checkpoint_every;
  if (p.desk) {
    j["desk"] = {{"sensors", p.desk->sensors},
                 {"episodes", p.desk->episodes},
                 {"alpha", p.desk->alpha},
                 {"bin_edges", p.desk->discretizer.bin_edges}};
  }
  return j;
}

std::vector<std::string> builtin_preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, text] : detail::builtin_preset_texts()) names.emplace_back(name);
  return names;
}

Preset load_preset(const std::string& name_or_path) {
  for (const auto& [name, text] : detail::builtin_preset_texts()) {
    if (name == name_or_path) return preset_from_json(nlohmann::json::parse(text));
  }
  std::ifstream in(name_or_path);
  if (!in) {
    std::string known;
    for (const auto& n : builtin_preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw std::invalid_argument("no preset or file named '" + name_or_path + "' (built-in: " + known + ")");
  }
  try {
    return preset_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(name_or_path + ": " + e.what());
  }
}

Preset desk_scale(const Preset& p) {
  if (!p.desk) return p;
  Preset out = p;
  if (p.desk->sensors > 0) out.scenario = with_sensor_count(p.scenario, p.desk->sensors);
  out.hyper.episodes = p.desk->episodes;
  out.hyper.alpha = p.desk->alpha;
  out.discretizer = p.desk->discretizer;
  out.desk.reset();
  return out;
}

Scenario with_sensor_count(const Scenario& s, int count) {
  if (s.classes.size() != 1) throw std::invalid_argument("sensor count override needs a single-class scenario");
  Scenario out = s;
  out.classes[0].count = count;
  return out;
}

Scenario with_processed_noise(const Scenario& s, double v) {
  Scenario out = s;
  for (auto& c : out.classes) c.V_proc = v * Matrix::Identity(s.model.n, s.model.n);
  return out;
}

}  // namespace procnet
