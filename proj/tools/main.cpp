// passfl: round optimizer, Pareto sweeps, federated training and scenario
// generation from a JSON config.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "passfl/bound.hpp"
#include "passfl/config.hpp"
#include "passfl/driver.hpp"
#include "passfl/errors.hpp"
#include "passfl/flsim.hpp"
#include "passfl/io.hpp"

namespace fs = std::filesystem;
using namespace passfl;

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kInfeasible = 3, kInternal = 4 };

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
};

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

RunConfig load(const Common& c) {
  RunConfig cfg = c.config.empty() ? parse_config("{}") : load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(cell, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != cell.size())
      throw ConfigError("--lambda-grid: not a number: '" + cell + "'");
    if (!(v > 0.0 && v < 1.0)) throw ConfigError("--lambda-grid: lambda out of (0,1)");
    grid.push_back(v);
  }
  if (grid.empty()) throw ConfigError("--lambda-grid: empty grid");
  return grid;
}

SyntheticTask build_task(const RunConfig& cfg, int num_devices) {
  const auto& tr = cfg.training;
  if (!tr.dataset) return make_task(tr.task, num_devices, cfg.seed);
  Dataset train = load_csv_dataset(*tr.dataset, tr.task.kind, tr.label_bins);
  Dataset test = tr.test_dataset ? load_csv_dataset(*tr.test_dataset, tr.task.kind, tr.label_bins)
                                 : train;
  auto shards =
      partition_dirichlet(train.labels, train.num_classes, num_devices, tr.task.alpha, cfg.seed);
  return SyntheticTask(tr.task.kind, std::move(train), std::move(test), std::move(shards),
                       tr.task.ridge);
}

// Runs `body`, maps exceptions to exit codes and always leaves a manifest.
int run_command(const std::string& name, const Common& common,
                const std::function<void(RunManifest&, Stopwatch&)>& body) {
  RunManifest m;
  m.command = name;
  m.config_path = common.config;
  m.output_dir = common.out;
  m.version = std::string(version());
  Stopwatch total, step;
  int code = kOk;
  try {
    fs::create_directories(common.out);
    body(m, step);
  } catch (const ConfigError& e) {
    code = kConfig, m.status = "config_error", m.message = e.what();
  } catch (const ContractionError& e) {
    code = kConfig, m.status = "config_error", m.message = e.what();
  } catch (const InfeasibleError& e) {
    code = kInfeasible, m.status = "infeasible", m.message = e.what();
  } catch (const std::exception& e) {
    code = kInternal, m.status = "internal_error", m.message = e.what();
  }
  m.timings_s["total"] = total.lap();
  if (code != kOk) std::cerr << "passfl " << name << ": " << m.message << "\n";
  try {
    if (fs::is_directory(common.out)) write_manifest(fs::path(common.out) / "manifest.json", m);
  } catch (const std::exception& e) {
    std::cerr << "passfl " << name << ": could not write manifest: " << e.what() << "\n";
    if (code == kOk) code = kInternal;
  }
  return code;
}

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config, "JSON config file (defaults when omitted)");
  cmd->add_option("--seed", c.seed, "Override the config seed");
  cmd->add_option("-o,--out", c.out, "Output directory")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pinching-antenna federated learning optimizer and simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(version()));

  Common common;
  std::optional<double> lambda;
  std::string mode, pipeline, grid_text;
  std::optional<int> rounds, num_devices;

  auto* optimize = app.add_subcommand("optimize", "Solve one round and write round.json, positions.csv");
  add_common(optimize, common);
  optimize->add_option("--lambda", lambda, "Trade-off weight in (0,1)");
  optimize->add_option("--mode", mode, "Placement mode: per-user | shared");
  optimize->add_option("--pipeline", pipeline,
                       "fedpass | conventional | pass_uniform | perfect");

  auto* pareto = app.add_subcommand("pareto", "Sweep lambda and write pareto.csv");
  add_common(pareto, common);
  pareto->add_option("--lambda-grid", grid_text, "Comma-separated lambda values");
  pareto->add_option("--mode", mode, "Placement mode: per-user | shared");
  pareto->add_option("--pipeline", pipeline, "fedpass | conventional | pass_uniform | perfect");

  auto* train_cmd = app.add_subcommand("train", "Federated training; writes train.csv, bound.csv");
  add_common(train_cmd, common);
  train_cmd->add_option("--pipeline", pipeline, "fedpass | conventional | pass_uniform | perfect");
  train_cmd->add_option("--rounds", rounds, "Communication rounds");
  train_cmd->add_option("--lambda", lambda, "Trade-off weight in (0,1)");

  auto* gen = app.add_subcommand("gen-scenario", "Draw a scenario and write scenario.json");
  add_common(gen, common);
  gen->add_option("--num-devices", num_devices, "Number of devices");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  auto apply_overrides = [&](RunConfig& cfg) {
    if (lambda) {
      if (!(*lambda > 0.0 && *lambda < 1.0)) throw ConfigError("--lambda: lambda out of (0,1)");
      cfg.lambda = *lambda;
    }
    if (!mode.empty()) cfg.optimizer.mode = parse_placement_mode(mode);
    if (!pipeline.empty()) cfg.training.pipeline = parse_pipeline(pipeline);
  };

  if (optimize->parsed()) {
    return run_command("optimize", common, [&](RunManifest& m, Stopwatch& sw) {
      RunConfig cfg = load(common);
      apply_overrides(cfg);
      m.seed = cfg.seed;
      const Scenario s = build_scenario(cfg);
      const RoundOutcome out = run_pipeline(s, cfg.lambda, cfg.training.pipeline, cfg.optimizer);
      m.timings_s["solve"] = sw.lap();
      const auto issues = audit(out, s);
      if (!issues.empty()) throw std::logic_error("feasibility audit failed: " + issues.front());
      const fs::path dir(common.out);
      write_round_json(dir / "round.json", out, s);
      write_positions_csv(dir / "positions.csv", position_rows(out));
      m.outputs = {"round.json", "positions.csv"};
      m.timings_s["write"] = sw.lap();
    });
  }

  if (pareto->parsed()) {
    return run_command("pareto", common, [&](RunManifest& m, Stopwatch& sw) {
      RunConfig cfg = load(common);
      apply_overrides(cfg);
      m.seed = cfg.seed;
      std::vector<double> grid = cfg.lambda_grid;
      if (pareto->count("--lambda-grid") > 0) grid = parse_grid(grid_text);
      if (grid.empty()) grid = default_lambda_grid();
      const Scenario s = build_scenario(cfg);
      const auto points = pareto_sweep(s, grid, cfg.optimizer, cfg.training.pipeline);
      m.timings_s["solve"] = sw.lap();
      write_pareto_csv(fs::path(common.out) / "pareto.csv", points);
      m.outputs = {"pareto.csv"};
      m.timings_s["write"] = sw.lap();
    });
  }

  if (train_cmd->parsed()) {
    return run_command("train", common, [&](RunManifest& m, Stopwatch& sw) {
      RunConfig cfg = load(common);
      apply_overrides(cfg);
      if (rounds) {
        if (*rounds < 0) throw ConfigError("--rounds: must be >= 0");
        cfg.training.rounds = *rounds;
      }
      m.seed = cfg.seed;
      const Scenario s = build_scenario(cfg);
      const SyntheticTask task = build_task(cfg, s.num_devices());
      FederatedSettings fs_cfg;
      fs_cfg.local_steps = cfg.training.local_steps;
      fs_cfg.batch_size = cfg.training.batch_size;
      fs_cfg.lambda = cfg.lambda;
      fs_cfg.pipeline = cfg.training.pipeline;
      fs_cfg.optimizer = cfg.optimizer;
      fs_cfg.seed = cfg.seed;
      const TrainingLog log = run_federated(s, task, cfg.training.rounds, fs_cfg);
      m.timings_s["train"] = sw.lap();

      std::vector<double> scheduled;
      for (std::size_t t = 1; t < log.rounds.size(); ++t)
        scheduled.push_back(log.rounds[t].scheduled_data);
      const BoundTrace bound = gap_envelope(log.rounds.front().gap, scheduled, log.learn_params());
      const fs::path dir(common.out);
      write_train_csv(dir / "train.csv", train_rows(log));
      write_bound_csv(dir / "bound.csv", bound_rows(bound));
      m.outputs = {"train.csv", "bound.csv"};
      m.timings_s["write"] = sw.lap();
    });
  }

  return run_command("gen-scenario", common, [&](RunManifest& m, Stopwatch& sw) {
    RunConfig cfg = load(common);
    if (num_devices) {
      cfg.num_devices = *num_devices;
      cfg.devices.reset();
    }
    m.seed = cfg.seed;
    const Scenario s = build_scenario(cfg);
    std::ofstream(fs::path(common.out) / "scenario.json", std::ios::binary)
        << scenario_config_json(cfg, s);
    m.outputs = {"scenario.json"};
    m.timings_s["generate"] = sw.lap();
  });
}
