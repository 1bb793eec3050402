#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zolearn/common.hpp"
#include "zolearn/geometry.hpp"
#include "zolearn/rng.hpp"

namespace zolearn {

// Realized payoff values for a joint action profile, one scalar per player.
// This is the only view of the game an estimator is given.
using PayoffOracle = std::function<std::vector<double>(const Vec& profile)>;

// Per-player unit directions, stacked according to a block layout.
struct QueryDirection {
  BlockLayout layout;
  Vec stacked;

  auto block(int player) const { return layout.block(stacked, player); }
};

// Uniform direction on the unit sphere of R^dim (normalized Gaussian draw).
Vec sample_unit_sphere(int dim, Stream& stream);
QueryDirection sample_query_direction(const BlockLayout& layout,
                                      Stream& stream);

// (1 - delta/r) x + (delta/r)(p + r u)  ==  xbar + delta u.
Vec adjust_feasibility(const Vec& x, double delta, const InteriorBall& ball,
                       const Vec& direction);
// The pulled-back base point xbar = (1 - delta/r) x + (delta/r) p.
Vec shrink_toward_center(const Vec& x, double delta, const InteriorBall& ball);

// Norm statistics of the produced estimates. The Monte Carlo accumulators
// (per-coordinate mean and variance) only run when `accumulate` is set.
struct EstimateDiagnostics {
  bool accumulate = false;
  double estimate_norm = 0.0;
  double running_max_norm = 0.0;
  long long count = 0;
  Vec mean;
  Vec m2;

  void record(const Vec& estimate);
  Vec variance() const;
  Vec standard_error() const;
};

struct EstimatorState {
  std::vector<double> prev_payoffs;
  double prev_radius = 0.0;
  Vec prev_direction;
  std::optional<EstimateDiagnostics> diagnostics;

  // Payoffs at the unperturbed initial profile.
  static EstimatorState initialize(std::vector<double> initial_payoffs);
};

// G^i = (n^i / delta)(J^i_k - J^i_{k-1}) u^i; the state then holds J_k.
Vec rpg_estimate(EstimatorState& state, std::span<const double> payoffs,
                 const QueryDirection& direction, double delta);

enum class BaselineKind { kOnePoint, kTwoPoint };

std::string to_string(BaselineKind kind);

// one-point: (n^i / delta) J^i(xbar + delta u) u^i
// two-point: (n^i / delta)(J^i(xbar + delta u) - J^i(xbar - delta u))/2 u^i
Vec baseline_estimate(BaselineKind kind, const PayoffOracle& oracle,
                      const Vec& xbar, const QueryDirection& direction,
                      double delta);

}  // namespace zolearn
