// Command-line front end: run, validate, replay, probe and solve experiment
// configs. Exit codes: 0 success, 2 config error, 3 runtime failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "zolearn/analysis.hpp"
#include "zolearn/harness/config.hpp"
#include "zolearn/harness/experiment.hpp"
#include "zolearn/harness/game_factory.hpp"
#include "zolearn/harness/record_io.hpp"

namespace zh = zolearn::harness;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

std::string format_vector(const zolearn::Vec& v) {
  std::ostringstream out;
  out << '[';
  for (int i = 0; i < v.size(); ++i) {
    if (i) out << ", ";
    out << zh::format_number(v[i]);
  }
  out << ']';
  return out.str();
}

int cmd_run(const std::string& path) {
  const zh::ExperimentConfig config = zh::load_experiment_config(path);
  const auto report = zolearn::validate_schedule(
      config.schedule, zolearn::parse_regime(config.regime));
  if (!report.passed()) {
    std::cerr << "warning: " << report.describe();
  }
  const zh::ExperimentResult result =
      zh::run_experiment(config, zh::options_from_env());
  for (const auto& record : result.records) {
    std::cout << "seed " << record.seed << ": " << record.iterations
              << " iterations, safeguard events " << record.safeguard_events;
    for (std::size_t m = 0; m < record.metric_names.size(); ++m) {
      if (!record.logged_values.empty()) {
        std::cout << ", " << record.metric_names[m] << " "
                  << record.logged_values.back()[m];
      }
    }
    std::cout << "\n";
  }
  std::cout << "wrote " << result.files.size() << " files to "
            << result.directory << "\n";
  return kOk;
}

int cmd_validate(const std::string& path) {
  const zh::ExperimentConfig config = zh::load_experiment_config(path);
  zolearn::Game game;
  try {
    game = zh::build_game(config.game());
  } catch (const zh::ConfigError&) {
    throw;
  } catch (const zolearn::Error& e) {
    throw zh::ConfigError(std::string("game: ") + e.what());
  }
  std::cout << "game '" << game.name << "': " << game.players()
            << " players, dimension " << game.dim() << ", class "
            << zolearn::to_string(game.declared_class) << "\n";
  const auto report = zolearn::validate_schedule(
      config.schedule, zolearn::parse_regime(config.regime));
  std::cout << report.describe();
  if (!report.passed()) return kConfigError;
  std::cout << "config hash " << std::hex << config.hash() << std::dec << "\n";
  return kOk;
}

int cmd_replay(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw zolearn::Error("cannot open record '" + path + "'");
  const zh::StoredRun stored = zh::read_jsonl(in);
  const zh::ExperimentConfig config =
      zh::parse_experiment_config(stored.config_text);
  if (config.hash() != stored.record.config_hash) {
    std::cerr << "config hash mismatch\n";
    return kRuntimeError;
  }
  const zolearn::Game game = zh::build_game(config.game());
  const zh::Reference reference = zh::make_reference(game, config.metrics);
  const zolearn::RunRecord again =
      zh::run_seed(config, game, reference, stored.record.seed);
  if (!zh::same_logged_values(again, stored.record)) {
    std::cerr << "replay mismatch for seed " << stored.record.seed << "\n";
    return kRuntimeError;
  }
  std::cout << "replay identical: seed " << stored.record.seed << ", "
            << stored.record.logged_k.size() << " logged iterations\n";
  return kOk;
}

int cmd_probe(const std::string& path, int pairs, const std::string& cls) {
  const zh::ExperimentConfig config = zh::load_experiment_config(path);
  const zolearn::Game game = zh::build_game(config.game());
  const zolearn::GameClass c =
      cls.empty() ? game.declared_class : zolearn::parse_game_class(cls);
  zolearn::ProbeOptions options;
  options.pairs = pairs;
  options.modulus = game.modulus;
  const auto report = zolearn::monotonicity_probe(
      game, c, zolearn::Stream(config.game_seed).split("cli-probe"), options);
  std::cout << report.describe();
  return kOk;
}

int cmd_solve(const std::string& path) {
  const zh::ExperimentConfig config = zh::load_experiment_config(path);
  const zolearn::Game game = zh::build_game(config.game());
  const zolearn::CpSolution sol = zolearn::solve_cp(game);
  std::cout << "x* = " << format_vector(sol.x) << "\n"
            << "natural residual " << sol.residual << " after "
            << sol.iterations << " iterations\n";
  if (sol.merit) std::cout << "merit " << *sol.merit << "\n";
  if (game.critical_point) {
    std::cout << "distance to known critical point "
              << (sol.x - *game.critical_point).norm() << "\n";
  }
  if (!sol.converged) {
    std::cerr << "solver did not reach the residual tolerance\n";
    return kRuntimeError;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bandit learning of critical points in continuous games"};
  app.require_subcommand(1);
  std::string path;
  int pairs = 10000;
  std::string cls;

  auto* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("config", path, "experiment config file")->required();
  auto* validate =
      app.add_subcommand("validate", "check schedule and game of a config");
  validate->add_option("config", path, "experiment config file")->required();
  auto* replay = app.add_subcommand("replay", "re-run a json-lines record");
  replay->add_option("record", path, "record file")->required();
  auto* probe = app.add_subcommand("probe", "monotonicity probe of the game");
  probe->add_option("config", path, "experiment config file")->required();
  probe->add_option("--pairs", pairs, "sampled pairs");
  probe->add_option("--class", cls, "class to probe (default: declared)");
  auto* solve = app.add_subcommand("solve", "ground-truth critical point");
  solve->add_option("config", path, "experiment config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) return cmd_run(path);
    if (*validate) return cmd_validate(path);
    if (*replay) return cmd_replay(path);
    if (*probe) return cmd_probe(path, pairs, cls);
    if (*solve) return cmd_solve(path);
  } catch (const zh::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kOk;
}
