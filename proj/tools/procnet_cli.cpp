// procnet: train, evaluate and compare sensing policies.

#include "procnet/experiments.hpp"
#include "procnet/qlearn.hpp"
#include "procnet/simulator.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace procnet;

namespace {

struct Common {
  std::string scenario = "drone";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> episodes;
  std::optional<int> sensors;
  std::optional<double> v_proc;
  std::string out = ".";
  bool full = false;
  std::size_t warmup = 5000;
};

struct Loaded {
  Preset preset;
  bool bins_recalibrated = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--scenario", c.scenario, "Preset name (drone, driving, tiny) or path to a preset JSON file");
  cmd->add_option("--seed", c.seed, "Random seed");
  cmd->add_option("--episodes", c.episodes, "Training episodes");
  cmd->add_option("--sensors", c.sensors, "Sensor count for single-class scenarios");
  cmd->add_option("--v-proc", c.v_proc, "Processed-measurement noise level, V_proc = v * I");
  cmd->add_option("--out", c.out, "Output directory");
  cmd->add_flag("--full", c.full, "Use the full-scale settings instead of the desk-scale ones");
  cmd->add_option("--warmup", c.warmup, "Warm-up episodes when bins are recalibrated");
}

Loaded load(const Common& c) {
  Loaded l{load_preset(c.scenario)};
  if (!c.full) l.preset = desk_scale(l.preset);
  auto& p = l.preset;
  require_valid(p.scenario);
  if (c.seed) p.hyper.seed = *c.seed;
  if (c.episodes) p.hyper.episodes = *c.episodes;
  if (c.v_proc) p.scenario = with_processed_noise(p.scenario, *c.v_proc);
  if (c.sensors) {
    p.scenario = with_sensor_count(p.scenario, *c.sensors);
    require_valid(p.scenario);
    p.discretizer = calibrate_bins(p.scenario, c.warmup, p.hyper.seed);
    l.bins_recalibrated = true;
  }
  require_valid(p.scenario);
  return l;
}

fs::path prepare(const std::string& dir) {
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

void write_run(const fs::path& dir, const RunSummary& summary, const EpisodeResult& r, const Scenario& s) {
  write_json(dir / "summary.json", summary_to_json(summary, r, s));
  std::ofstream trace(dir / "trace.csv");
  write_trace_csv(trace, r, s.episode, action_indices(r, s.classes));
}

json action_json(const NetworkAction& a) {
  json d = json::array();
  for (const auto& c : a.decisions) d.push_back({c.transmitting, c.processing});
  return d;
}

int cmd_train(const Common& c, std::optional<std::size_t> checkpoint_every) {
  const auto loaded = load(c);
  const auto& p = loaded.preset;
  const auto dir = prepare(c.out);
  TrainingOptions opt;
  opt.checkpoint_every = checkpoint_every.value_or(p.checkpoint_every);
  const auto out = train(p.scenario, p.discretizer, p.hyper, opt);
  const auto greedy = evaluate(out.q, p.scenario, p.discretizer);

  write_json(dir / "qtable.json", qtable_to_json(out.q, p.scenario, p.discretizer, p.hyper));
  std::ofstream conv(dir / "convergence.csv");
  write_convergence_csv(conv, out.log);
  const auto summary =
      summarize("q_learning", greedy, p.scenario, p.moving_average_window, {p.hyper.seed}, p.hyper.episodes);
  write_run(dir, summary, greedy, p.scenario);
  write_json(dir / "preset.json", preset_to_json(p));

  std::cout << json{{"policy", "q_learning"},
                    {"mean_error_variance", greedy.episode_cost},
                    {"actions", action_indices(greedy, p.scenario.classes)},
                    {"bins_recalibrated", loaded.bins_recalibrated},
                    {"out", dir.string()}}
                   .dump()
            << '\n';
  return 0;
}

int cmd_evaluate(const Common& c, const std::string& qtable_path) {
  const auto p = load(c).preset;
  std::ifstream in(qtable_path);
  if (!in) throw std::invalid_argument("cannot read Q-table " + qtable_path);
  const auto j = json::parse(in);
  const auto q = qtable_from_json(j, scenario_hash(p.scenario), action_fingerprint(enumerate_actions(p.scenario.classes)));
  Discretizer d{j.at("bin_edges").get<std::vector<double>>()};
  validate_discretizer(d);
  const auto r = evaluate(q, p.scenario, d);
  const auto dir = prepare(c.out);
  write_run(dir, summarize("q_learning", r, p.scenario, p.moving_average_window, {j["hyperparams"].value("seed", 0ULL)}),
            r, p.scenario);
  std::cout << json{{"policy", "q_learning"}, {"mean_error_variance", r.episode_cost}}.dump() << '\n';
  return 0;
}

int cmd_baseline(const Common& c, const std::string& kind_text) {
  const auto p = load(c).preset;
  const auto kind = parse_baseline_kind(kind_text);
  const auto r = baseline(kind, p.scenario);
  const auto dir = prepare(c.out);
  const auto summary = summarize(to_string(kind), r, p.scenario, p.moving_average_window);
  write_run(dir, summary, r, p.scenario);
  std::cout << json{{"policy", to_string(kind)},
                    {"mean_error_variance", r.episode_cost},
                    {"energy_j", summary.energy.total()}}
                   .dump()
            << '\n';
  return 0;
}

int cmd_oracle(const Common& c, std::size_t cap, bool write) {
  const auto p = load(c).preset;
  const auto best = brute_force_optimum(p.scenario, cap);
  json seq = json::array();
  for (const auto& a : best.sequence) seq.push_back(action_json(a));
  std::cout << json{{"cost", best.cost},
                    {"action_ids", best.action_indices},
                    {"sequence", seq},
                    {"evaluated", best.evaluated}}
                   .dump()
            << '\n';
  if (write) {
    const auto r = run_episode(p.scenario, best.sequence);
    write_run(prepare(c.out), summarize("brute_force", r, p.scenario, p.moving_average_window), r, p.scenario);
  }
  return 0;
}

std::vector<std::uint64_t> seed_list(std::uint64_t first, std::size_t count) {
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < count; ++i) seeds.push_back(first + i);
  return seeds;
}

int cmd_sweep_accuracy(const Common& c, const std::vector<double>& values, std::size_t seeds) {
  const auto p = load(c).preset;
  const auto dir = prepare(c.out);
  const auto rows = accuracy_sweep(p.scenario, p.discretizer, p.hyper, values, seed_list(p.hyper.seed, seeds));
  json table = json::array();
  for (const auto& row : rows) {
    const auto sv = with_processed_noise(p.scenario, row.v_proc);
    const auto sub = prepare((dir / ("v_proc_" + std::to_string(row.v_proc))).string());
    write_run(sub, summarize("q_learning", row.greedy, sv, p.moving_average_window, {row.seed}, p.hyper.episodes),
              row.greedy, sv);
    table.push_back({{"v_proc", row.v_proc},
                     {"seed", row.seed},
                     {"mean_error_variance", row.cost},
                     {"first_window", action_json(row.first_window)},
                     {"steady", action_json(row.steady)},
                     {"steady_processing", processing_count(row.steady)},
                     {"energy_j", energy(row.greedy, sv.power).total()}});
  }
  write_json(dir / "sweep.json", table);
  std::cout << table.dump() << '\n';
  return 0;
}

int cmd_sweep_convergence(const Common& c, const std::vector<int>& counts, std::optional<std::size_t> checkpoint_every) {
  const auto p = load(c).preset;
  const auto dir = prepare(c.out);
  const auto rows =
      convergence_sweep(p.scenario, p.hyper, counts, checkpoint_every.value_or(p.checkpoint_every), c.warmup);
  json table = json::array();
  for (const auto& row : rows) {
    const auto sub = prepare((dir / ("sensors_" + std::to_string(row.sensors))).string());
    std::ofstream conv(sub / "convergence.csv");
    write_convergence_csv(conv, row.log);
    table.push_back({{"sensors", row.sensors},
                     {"bin_edges", row.discretizer.bin_edges},
                     {"episodes_to_converge", row.episodes_to_converge},
                     {"final_greedy_value", row.final_value}});
  }
  write_json(dir / "sweep.json", table);
  std::cout << table.dump() << '\n';
  return 0;
}

int cmd_calibrate_bins(const Common& c) {
  const auto p = load(c).preset;
  const auto d = calibrate_bins(p.scenario, c.warmup, p.hyper.seed);
  const json j{{"bin_edges", d.bin_edges}, {"warmup_episodes", c.warmup}, {"seed", p.hyper.seed}};
  std::cout << j.dump() << '\n';
  if (c.out != ".") write_json(prepare(c.out) / "bins.json", j);
  return 0;
}

json issues_json(const ScenarioError& e) {
  json issues = json::array();
  for (const auto& i : e.issues()) issues.push_back({{"where", i.where}, {"message", i.message}});
  return issues;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latency-accuracy aware sensing: simulation, baselines and Q-learning"};
  app.require_subcommand(1);

  Common common;
  std::optional<std::size_t> checkpoint_every;
  std::string kind = "all_raw";
  std::string qtable = "qtable.json";
  std::size_t cap = 1000000;
  std::vector<double> values{1.0, 0.5, 0.1};
  std::vector<int> counts{5, 10};
  std::size_t seeds = 3;

  auto* train_cmd = app.add_subcommand("train", "Train a Q-table and evaluate its greedy policy");
  add_common(train_cmd, common);
  train_cmd->add_option("--checkpoint-every", checkpoint_every, "Episodes between greedy-value checkpoints");

  auto* eval_cmd = app.add_subcommand("evaluate", "Greedy rollout of a stored Q-table");
  add_common(eval_cmd, common);
  eval_cmd->add_option("--qtable", qtable, "Q-table written by train");

  auto* base_cmd = app.add_subcommand("baseline", "Constant all-raw, all-processing or all-sleep policy");
  add_common(base_cmd, common);
  base_cmd->add_option("--kind", kind, "all_raw, all_processing or all_sleep");

  auto* oracle_cmd = app.add_subcommand("oracle", "Exhaustive search over action sequences");
  add_common(oracle_cmd, common);
  oracle_cmd->add_option("--cap", cap, "Maximum number of sequences");

  auto* acc_cmd = app.add_subcommand("sweep-accuracy", "Train per processed-noise level");
  add_common(acc_cmd, common);
  acc_cmd->add_option("--values", values, "Processed-noise levels")->delimiter(',');
  acc_cmd->add_option("--seeds", seeds, "Seeds per level; the best greedy policy is reported");

  auto* conv_cmd = app.add_subcommand("sweep-convergence", "Train per sensor count and log greedy values");
  add_common(conv_cmd, common);
  conv_cmd->add_option("--counts", counts, "Sensor counts")->delimiter(',');
  conv_cmd->add_option("--checkpoint-every", checkpoint_every, "Episodes between greedy-value checkpoints");

  auto* bins_cmd = app.add_subcommand("calibrate-bins", "Bin edges from random-policy warm-up traces");
  add_common(bins_cmd, common);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_cmd) return cmd_train(common, checkpoint_every);
    if (*eval_cmd) return cmd_evaluate(common, qtable);
    if (*base_cmd) return cmd_baseline(common, kind);
    if (*oracle_cmd) return cmd_oracle(common, cap, oracle_cmd->count("--out") > 0);
    if (*acc_cmd) return cmd_sweep_accuracy(common, values, seeds);
    if (*conv_cmd) return cmd_sweep_convergence(common, counts, checkpoint_every);
    if (*bins_cmd) return cmd_calibrate_bins(common);
  } catch (const ScenarioError& e) {
    std::cerr << json{{"error", "invalid_scenario"}, {"issues", issues_json(e)}}.dump() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "failed"}, {"message", e.what()}}.dump() << '\n';
    return 1;
  }
  return 0;
}
