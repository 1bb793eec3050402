#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "zolearn/estimator.hpp"
#include "zolearn/game.hpp"
#include "zolearn/geometry.hpp"
#include "zolearn/rng.hpp"
#include "zolearn/schedule.hpp"

namespace zolearn {

enum class Algorithm { kOmd, kRmd, kOnePoint, kTwoPoint };

std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& name);

// Everything one round of play carries into the next.
struct LearnerState {
  Vec base;           // X_k
  Vec leading;        // X_{k+1/2} of the last round
  Vec prev_base;      // X_{k-1}
  Vec prev_estimate;  // G_{k-1}
  EstimatorState estimator;
  long long k = 1;
  long long safeguard_events = 0;
};

// X_0 = X_{1/2} = X_1 = x1, G_0 = 0, J_0 = J(x1) unperturbed.
LearnerState initialize_learner(const Game& game, const Vec& x1);

struct RoundRecord {
  long long k = 0;
  double gamma = 0.0;
  double delta = 0.0;
  Vec leading;    // X_{k+1/2} (base point for the baselines)
  Vec perturbed;  // the action actually played
  Vec estimate;   // G_k
  std::vector<double> payoffs;
  bool safeguarded = false;
};

// delta_k capped at half the smallest interior-ball radius.
ScheduleValues clamped_schedule(const Schedule& s, long long k,
                                const Game& game);

RoundRecord omd_step(LearnerState& state, const Game& game, const Dgf& dgf,
                     const Schedule& schedule, Stream& stream);
RoundRecord rmd_step(LearnerState& state, const Game& game, const Dgf& dgf,
                     const Schedule& schedule, Stream& stream);
// Projected descent with a one- or two-point estimate at the pulled-back X_k.
RoundRecord baseline_step(LearnerState& state, BaselineKind kind,
                          const Game& game, const Dgf& dgf,
                          const Schedule& schedule, Stream& stream);

struct ErgodicAccumulator {
  Vec weighted_sum;
  double weight_sum = 0.0;
  long long count = 0;
};

void ergodic_update(ErgodicAccumulator& acc, const Vec& x, double gamma);
Vec ergodic_point(const ErgodicAccumulator& acc);

// What a metric sees after round k.
struct RoundView {
  const Game& game;
  const RoundRecord& round;
  const LearnerState& state;
  const ErgodicAccumulator& ergodic;
};

struct NamedMetric {
  std::string name;
  std::function<double(const RoundView&)> eval;
};

// Logged every iteration below 1e3, every 10th below 1e4, every 100th after.
bool logged_iteration(long long k);

struct RunOptions {
  long long iterations = 0;
  std::uint64_t seed = 0;
  std::optional<Vec> initial_point;  // default: interior-ball centers
  std::vector<NamedMetric> metrics;
  Regime regime = Regime::kAlmostSure;
  bool store_full_trace = false;
  bool check_membership = true;
  bool diagnostics = false;
};

struct TraceEntry {
  double gamma;
  double delta;
  double estimate_norm;
  Vec perturbed;
};

struct RunRecord {
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  long long iterations = 0;
  std::vector<std::string> metric_names;
  std::vector<long long> logged_k;
  std::vector<std::vector<double>> logged_values;  // [row][metric]
  std::vector<std::pair<long long, Vec>> ergodic_snapshots;
  long long safeguard_events = 0;
  double running_max_norm = 0.0;
  long long running_max_at = 0;
  double wall_seconds = 0.0;
  bool schedule_valid = true;
  Vec initial_point;
  Vec final_base;
  Vec final_perturbed;
  Vec final_ergodic;
  std::vector<TraceEntry> trace;  // only with store_full_trace
  std::optional<EstimateDiagnostics> diagnostics;
};

RunRecord run_learning(const Game& game, Algorithm algorithm, const Dgf& dgf,
                       const Schedule& schedule, const RunOptions& options);

}  // namespace zolearn
