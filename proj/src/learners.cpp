#include "zolearn/learners.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

namespace zolearn {

namespace {

constexpr double kMembershipTol = 1e-7;

QueryDirection draw_direction(const Game& game, Stream& stream) {
  return sample_query_direction(game.layout, stream);
}

// Per-player feasibility adjustment against that player's ball.
Vec perturb_profile(const Game& game, const Vec& x, double delta,
                    const QueryDirection& u) {
  Vec out(x.size());
  for (int i = 0; i < game.players(); ++i) {
    game.layout.block(out, i) = adjust_feasibility(
        game.layout.block(x, i), delta, game.balls[i], u.block(i));
  }
  return out;
}

Vec pull_back(const Game& game, const Vec& x, double delta) {
  Vec out(x.size());
  for (int i = 0; i < game.players(); ++i) {
    game.layout.block(out, i) =
        shrink_toward_center(game.layout.block(x, i), delta, game.balls[i]);
  }
  return out;
}

std::vector<double> observe(const Game& game, const Vec& x) {
  return evaluate_game(game, x).payoffs;
}

// Shared tail of both extra-gradient rounds: perturb, observe, estimate, and
// take the base step from X_k.
void finish_round(RoundRecord& rec, LearnerState& state, const Game& game,
                  const Dgf& dgf, Stream& stream) {
  const QueryDirection u = draw_direction(game, stream);
  rec.perturbed = perturb_profile(game, rec.leading, rec.delta, u);
  rec.payoffs = observe(game, rec.perturbed);
  rec.estimate = rpg_estimate(state.estimator, rec.payoffs, u, rec.delta);
  const Vec next = prox_profile(dgf, game.sets, game.layout, state.base,
                                -rec.gamma * rec.estimate);
  state.prev_base = state.base;
  state.base = next;
  state.leading = rec.leading;
  state.prev_estimate = rec.estimate;
  ++state.k;
}

}  // namespace

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kOmd:
      return "omd";
    case Algorithm::kRmd:
      return "rmd";
    case Algorithm::kOnePoint:
      return "baseline-one-point";
    case Algorithm::kTwoPoint:
      return "baseline-two-point";
  }
  return "omd";
}

Algorithm parse_algorithm(const std::string& name) {
  for (Algorithm a : {Algorithm::kOmd, Algorithm::kRmd, Algorithm::kOnePoint,
                      Algorithm::kTwoPoint}) {
    if (to_string(a) == name) return a;
  }
  throw Error("unknown algorithm '" + name + "'");
}

LearnerState initialize_learner(const Game& game, const Vec& x1) {
  require(x1.size() == game.dim(), "initial point has wrong dimension");
  if (!game.in_strategy_space(x1, kMembershipTol)) {
    throw Error("initial point lies outside the strategy space");
  }
  LearnerState state;
  state.base = x1;
  state.leading = x1;
  state.prev_base = x1;
  state.prev_estimate = Vec::Zero(x1.size());
  state.estimator = EstimatorState::initialize(observe(game, x1));
  return state;
}

ScheduleValues clamped_schedule(const Schedule& s, long long k,
                                const Game& game) {
  ScheduleValues v = eval_schedule(s, k);
  v.delta = std::min(v.delta, 0.5 * game.min_ball_radius());
  return v;
}

RoundRecord omd_step(LearnerState& state, const Game& game, const Dgf& dgf,
                     const Schedule& schedule, Stream& stream) {
  RoundRecord rec;
  rec.k = state.k;
  const ScheduleValues sv = clamped_schedule(schedule, state.k, game);
  rec.gamma = sv.gamma;
  rec.delta = sv.delta;
  rec.leading = prox_profile(dgf, game.sets, game.layout, state.base,
                             -rec.gamma * state.prev_estimate);
  finish_round(rec, state, game, dgf, stream);
  return rec;
}

RoundRecord rmd_step(LearnerState& state, const Game& game, const Dgf& dgf,
                     const Schedule& schedule, Stream& stream) {
  if (dgf.kind() != DgfKind::kEuclidean) {
    throw Error("reflected mirror descent requires the euclidean DGF");
  }
  RoundRecord rec;
  rec.k = state.k;
  const ScheduleValues sv = clamped_schedule(schedule, state.k, game);
  rec.gamma = sv.gamma;
  rec.delta = sv.delta;
  const Vec reflection = dgf.gradient(state.base) - dgf.gradient(state.prev_base);
  rec.leading = unconstrained_mirror_step(dgf, state.base, reflection);
  if (!game.in_action_space(rec.leading, 0.0)) {
    rec.leading = game.project_action(rec.leading);
    rec.safeguarded = true;
    ++state.safeguard_events;
  }
  finish_round(rec, state, game, dgf, stream);
  return rec;
}

RoundRecord baseline_step(LearnerState& state, BaselineKind kind,
                          const Game& game, const Dgf& dgf,
                          const Schedule& schedule, Stream& stream) {
  RoundRecord rec;
  rec.k = state.k;
  const ScheduleValues sv = clamped_schedule(schedule, state.k, game);
  rec.gamma = sv.gamma;
  rec.delta = sv.delta;
  rec.leading = state.base;
  const Vec xbar = pull_back(game, state.base, rec.delta);
  const QueryDirection u = draw_direction(game, stream);
  rec.perturbed = xbar + rec.delta * u.stacked;
  PayoffOracle oracle = [&game, &rec](const Vec& x) {
    auto payoffs = observe(game, x);
    if (rec.payoffs.empty()) rec.payoffs = payoffs;
    return payoffs;
  };
  rec.estimate = baseline_estimate(kind, oracle, xbar, u, rec.delta);
  if (state.estimator.diagnostics) state.estimator.diagnostics->record(rec.estimate);
  const Vec next = prox_profile(dgf, game.sets, game.layout, state.base,
                                -rec.gamma * rec.estimate);
  state.prev_base = state.base;
  state.base = next;
  state.leading = rec.leading;
  state.prev_estimate = rec.estimate;
  ++state.k;
  return rec;
}

void ergodic_update(ErgodicAccumulator& acc, const Vec& x, double gamma) {
  require(gamma > 0.0, "ergodic weight must be positive");
  if (acc.count == 0) {
    acc.weighted_sum = gamma * x;
  } else {
    require(x.size() == acc.weighted_sum.size(),
            "ergodic point has wrong dimension");
    acc.weighted_sum += gamma * x;
  }
  acc.weight_sum += gamma;
  ++acc.count;
}

Vec ergodic_point(const ErgodicAccumulator& acc) {
  if (acc.count == 0) throw Error("ergodic average of an empty sequence");
  return acc.weighted_sum / acc.weight_sum;
}

bool logged_iteration(long long k) {
  if (k < 1000) return true;
  if (k < 10000) return k % 10 == 0;
  return k % 100 == 0;
}

RunRecord run_learning(const Game& game, Algorithm algorithm, const Dgf& dgf,
                       const Schedule& schedule, const RunOptions& options) {
  game.check();
  schedule.check();
  require(options.iterations >= 0, "iteration count must be nonnegative");
  if (algorithm == Algorithm::kRmd && dgf.kind() != DgfKind::kEuclidean) {
    throw Error("reflected mirror descent requires the euclidean DGF");
  }
  const auto started = std::chrono::steady_clock::now();

  RunRecord record;
  record.seed = options.seed;
  record.iterations = options.iterations;
  record.schedule_valid = validate_schedule(schedule, options.regime).passed();
  for (const auto& m : options.metrics) record.metric_names.push_back(m.name);

  const Vec x1 = options.initial_point ? *options.initial_point
                                       : game.project_strategy(game.ball_centers());
  if (dgf.kind() == DgfKind::kNegEntropy) {
    require(dgf.in_domain(x1), "initial point must lie in the negentropy domain");
  }
  LearnerState state = initialize_learner(game, x1);
  if (options.diagnostics) {
    state.estimator.diagnostics = EstimateDiagnostics{};
  }
  Stream stream = Stream(options.seed).split("directions");
  ErgodicAccumulator ergodic;

  record.initial_point = x1;
  record.final_base = x1;
  record.final_perturbed = x1;
  if (options.store_full_trace) record.trace.reserve(options.iterations);

  for (long long k = 1; k <= options.iterations; ++k) {
    RoundRecord rec;
    switch (algorithm) {
      case Algorithm::kOmd:
        rec = omd_step(state, game, dgf, schedule, stream);
        break;
      case Algorithm::kRmd:
        rec = rmd_step(state, game, dgf, schedule, stream);
        break;
      case Algorithm::kOnePoint:
        rec = baseline_step(state, BaselineKind::kOnePoint, game, dgf, schedule,
                            stream);
        break;
      case Algorithm::kTwoPoint:
        rec = baseline_step(state, BaselineKind::kTwoPoint, game, dgf, schedule,
                            stream);
        break;
    }
    if (options.check_membership) {
      if (!game.in_strategy_space(state.base, kMembershipTol)) {
        throw NumericError("base iterate left the strategy space at k=" +
                           std::to_string(k));
      }
      if (algorithm == Algorithm::kOmd &&
          !game.in_strategy_space(rec.leading, kMembershipTol)) {
        throw NumericError("leading iterate left the strategy space at k=" +
                           std::to_string(k));
      }
    }
    ergodic_update(ergodic, rec.perturbed, rec.gamma);

    const double norm = rec.estimate.norm();
    if (norm > record.running_max_norm) {
      record.running_max_norm = norm;
      record.running_max_at = k;
    }
    if (options.store_full_trace) {
      record.trace.push_back({rec.gamma, rec.delta, norm, rec.perturbed});
    }
    if (logged_iteration(k)) {
      const RoundView view{game, rec, state, ergodic};
      std::vector<double> row;
      row.reserve(options.metrics.size());
      for (const auto& m : options.metrics) row.push_back(m.eval(view));
      record.logged_k.push_back(k);
      record.logged_values.push_back(std::move(row));
      record.ergodic_snapshots.emplace_back(k, ergodic_point(ergodic));
    }
    record.final_perturbed = rec.perturbed;
  }

  record.final_base = state.base;
  if (ergodic.count > 0) record.final_ergodic = ergodic_point(ergodic);
  record.safeguard_events = state.safeguard_events;
  record.diagnostics = state.estimator.diagnostics;
  record.wall_seconds = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - started)
                            .count();
  return record;
}

}  // namespace zolearn
