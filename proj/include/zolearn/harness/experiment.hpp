#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "zolearn/game.hpp"
#include "zolearn/harness/config.hpp"
#include "zolearn/harness/record_io.hpp"
#include "zolearn/learners.hpp"

namespace zolearn::harness {

struct ExperimentOptions {
  std::optional<std::string> output_dir;
  std::optional<int> workers;
  bool write_files = true;
};

// Reads ZOLEARN_OUTPUT_DIR and ZOLEARN_WORKERS.
ExperimentOptions options_from_env();

// Critical point and potential value the metrics compare against.
struct Reference {
  std::optional<Vec> x_star;
  std::optional<double> potential_star;
};

// Uses the game's known critical point, else solves for one when a metric
// needs it. Throws when a metric needs x* and the game has no analytic F.
Reference make_reference(const Game& game,
                         const std::vector<std::string>& metrics);

std::vector<NamedMetric> build_metrics(const std::vector<std::string>& names,
                                       const Game& game,
                                       const Reference& reference);

RunOptions run_options(const ExperimentConfig& config, std::uint64_t seed,
                       std::vector<NamedMetric> metrics);

// One seed of the experiment, in-process, no files.
RunRecord run_seed(const ExperimentConfig& config, const Game& game,
                   const Reference& reference, std::uint64_t seed);

struct ExperimentResult {
  std::vector<RunRecord> records;  // seed order
  std::vector<MetricSummary> summaries;
  std::vector<std::string> files;
  std::string directory;
};

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const ExperimentOptions& options = {});

}  // namespace zolearn::harness
