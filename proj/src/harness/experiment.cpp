#include "zolearn/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "zolearn/analysis.hpp"
#include "zolearn/harness/game_factory.hpp"
#include "zolearn/harness/svg.hpp"

namespace zolearn::harness {

namespace fs = std::filesystem;

namespace {

bool needs_x_star(const std::string& metric) {
  return metric == "distance-to-cp" || metric == "ergodic-distance" ||
         metric == "potential-gap";
}

double relative_distance(const Vec& x, const Vec& x_star) {
  const double scale = x_star.norm();
  const double d = (x - x_star).norm();
  return scale > 0.0 ? d / scale : d;
}

void write_file(const fs::path& path, const std::string& content,
                std::vector<std::string>& files) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw Error("failed writing '" + path.string() + "'");
  files.push_back(path.string());
}

}  // namespace

ExperimentOptions options_from_env() {
  ExperimentOptions options;
  if (const char* dir = std::getenv("ZOLEARN_OUTPUT_DIR"); dir && *dir) {
    options.output_dir = dir;
  }
  if (const char* w = std::getenv("ZOLEARN_WORKERS"); w && *w) {
    try {
      const int n = std::stoi(w);
      if (n < 1) throw ConfigError("");
      options.workers = n;
    } catch (const std::exception&) {
      throw ConfigError("ZOLEARN_WORKERS must be a positive integer");
    }
  }
  return options;
}

Reference make_reference(const Game& game,
                         const std::vector<std::string>& metrics) {
  Reference ref;
  const bool wants = std::any_of(metrics.begin(), metrics.end(), needs_x_star);
  if (!wants) return ref;
  if (game.critical_point) {
    ref.x_star = game.critical_point;
  } else {
    if (!game.has_pseudogradient()) {
      throw Error("metric needs a critical point but game '" + game.name +
                  "' has none and no analytic pseudogradient");
    }
    const CpSolution sol = solve_cp(game);
    if (!sol.converged) {
      throw NumericError("critical point solver did not converge (residual " +
                         std::to_string(sol.residual) + ")");
    }
    ref.x_star = sol.x;
  }
  if (game.potential) ref.potential_star = game.potential(*ref.x_star);
  return ref;
}

std::vector<NamedMetric> build_metrics(const std::vector<std::string>& names,
                                       const Game& game,
                                       const Reference& reference) {
  std::vector<NamedMetric> out;
  for (const auto& name : names) {
    if (needs_x_star(name) && !reference.x_star) {
      throw Error("metric '" + name + "' needs a critical point");
    }
    if (name == "distance-to-cp") {
      const Vec x_star = *reference.x_star;
      out.push_back({name, [x_star](const RoundView& v) {
                       return relative_distance(v.round.perturbed, x_star);
                     }});
    } else if (name == "ergodic-distance") {
      const Vec x_star = *reference.x_star;
      out.push_back({name, [x_star](const RoundView& v) {
                       return relative_distance(ergodic_point(v.ergodic), x_star);
                     }});
    } else if (name == "potential-gap") {
      if (!game.potential || !reference.potential_star) {
        throw Error("metric 'potential-gap' needs a game with a potential");
      }
      const double p_star = *reference.potential_star;
      out.push_back({name, [p_star](const RoundView& v) {
                       return v.game.potential(v.round.perturbed) - p_star;
                     }});
    } else if (name == "estimate-norm") {
      out.push_back({name, [](const RoundView& v) {
                       return v.round.estimate.norm();
                     }});
    } else if (name == "merit") {
      const MeritMethod method = default_merit_method(game);
      out.push_back({name, [method](const RoundView& v) {
                       // The ergodic point lies in X up to projection
                       // round-off; project before evaluating.
                       const Vec x = v.game.project_strategy(ergodic_point(v.ergodic));
                       return merit_err(v.game, x, method).value;
                     }});
    } else {
      throw Error("unknown metric '" + name + "'");
    }
  }
  return out;
}

RunOptions run_options(const ExperimentConfig& config, std::uint64_t seed,
                       std::vector<NamedMetric> metrics) {
  RunOptions options;
  options.iterations = config.iterations;
  options.seed = seed;
  options.metrics = std::move(metrics);
  options.regime = parse_regime(config.regime);
  return options;
}

RunRecord run_seed(const ExperimentConfig& config, const Game& game,
                   const Reference& reference, std::uint64_t seed) {
  const Dgf dgf = parse_dgf_kind(config.dgf) == DgfKind::kEuclidean
                      ? Dgf::euclidean()
                      : Dgf::negentropy();
  RunRecord record = run_learning(
      game, parse_algorithm(config.algorithm), dgf, config.schedule,
      run_options(config, seed, build_metrics(config.metrics, game, reference)));
  record.config_hash = config.hash();
  return record;
}

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const ExperimentOptions& options) {
  if (config.seeds.empty()) throw ConfigError("at least one seed required");
  const Game game = build_game(config.game());
  const Reference reference = make_reference(game, config.metrics);

  ExperimentResult result;
  result.records.resize(config.seeds.size());
  int workers = options.workers.value_or(config.workers);
  if (workers <= 0) {
    workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  }
  workers = std::min<int>(workers, static_cast<int>(config.seeds.size()));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= config.seeds.size()) return;
      try {
        result.records[i] = run_seed(config, game, reference, config.seeds[i]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  result.summaries = summarize(result.records);
  if (!options.write_files) return result;

  const fs::path dir =
      fs::path(options.output_dir.value_or(config.output_dir)) / config.name;
  fs::create_directories(dir);
  result.directory = dir.string();
  const std::string text = config.text();
  write_file(dir / "config.toml", text, result.files);

  const bool csv = std::find(config.formats.begin(), config.formats.end(),
                             "csv") != config.formats.end();
  const bool jsonl = std::find(config.formats.begin(), config.formats.end(),
                               "json-lines") != config.formats.end();
  for (const auto& record : result.records) {
    const std::string stem = "seed_" + std::to_string(record.seed);
    if (csv) {
      std::ostringstream out;
      write_csv(record, out);
      write_file(dir / (stem + ".csv"), out.str(), result.files);
    }
    if (jsonl) {
      std::ostringstream out;
      write_jsonl(record, text, out);
      write_file(dir / (stem + ".jsonl"), out.str(), result.files);
    }
  }
  for (const auto& summary : result.summaries) {
    std::ostringstream out;
    write_summary_csv(summary, out);
    write_file(dir / ("summary_" + summary.metric + ".csv"), out.str(),
               result.files);
    if (config.svg) {
      std::vector<double> k(summary.k.begin(), summary.k.end());
      std::vector<Series> series = {
          {"min/max", k, summary.min, "#1f77b4", 0.3, true},
          {"", k, summary.max, "#1f77b4", 0.3, false},
          {"mean of " + std::to_string(result.records.size()) + " seeds", k,
           summary.mean, "#d62728", 1.0, true},
      };
      write_file(dir / (summary.metric + ".svg"),
                 render_loglog_svg(config.name + ": " + summary.metric,
                                   summary.metric, series),
                 result.files);
    }
  }
  return result;
}

}  // namespace zolearn::harness
