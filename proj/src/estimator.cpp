#include "zolearn/estimator.hpp"

#include <algorithm>
#include <cmath>

namespace zolearn {

namespace {

void check_payoffs(std::span<const double> payoffs, int players) {
  require(static_cast<int>(payoffs.size()) == players,
          "payoff count does not match player count");
  for (double value : payoffs) {
    if (!std::isfinite(value)) {
      throw NumericError("payoff oracle returned a non-finite value");
    }
  }
}

}  // namespace

Vec sample_unit_sphere(int dim, Stream& stream) {
  require(dim >= 1, "sphere dimension must be at least 1");
  for (;;) {
    Vec v = stream.normal_vector(dim);
    const double norm = v.norm();
    if (norm > 1e-300) return v / norm;
  }
}

QueryDirection sample_query_direction(const BlockLayout& layout,
                                      Stream& stream) {
  QueryDirection direction{layout, Vec(layout.total())};
  for (int i = 0; i < layout.players(); ++i) {
    layout.block(direction.stacked, i) = sample_unit_sphere(layout.dim(i), stream);
  }
  return direction;
}

Vec shrink_toward_center(const Vec& x, double delta, const InteriorBall& ball) {
  require(x.size() == ball.center.size(), "ball and point differ in dimension");
  require(delta >= 0.0, "query radius must be nonnegative");
  if (!(delta < ball.radius)) {
    throw Error("query radius " + std::to_string(delta) +
                " must be below the ball radius " + std::to_string(ball.radius));
  }
  const double w = delta / ball.radius;
  return (1.0 - w) * x + w * ball.center;
}

Vec adjust_feasibility(const Vec& x, double delta, const InteriorBall& ball,
                       const Vec& direction) {
  require(direction.size() == x.size(), "direction has wrong dimension");
  return shrink_toward_center(x, delta, ball) + delta * direction;
}

void EstimateDiagnostics::record(const Vec& estimate) {
  estimate_norm = estimate.norm();
  running_max_norm = std::max(running_max_norm, estimate_norm);
  if (!accumulate) return;
  if (count == 0) {
    mean = Vec::Zero(estimate.size());
    m2 = Vec::Zero(estimate.size());
  }
  ++count;
  const Vec delta = estimate - mean;
  mean += delta / static_cast<double>(count);
  m2 += delta.cwiseProduct(estimate - mean);
}

Vec EstimateDiagnostics::variance() const {
  require(count > 1, "variance needs at least two recorded estimates");
  return m2 / static_cast<double>(count - 1);
}

Vec EstimateDiagnostics::standard_error() const {
  return (variance() / static_cast<double>(count)).cwiseSqrt();
}

EstimatorState EstimatorState::initialize(std::vector<double> initial_payoffs) {
  check_payoffs(initial_payoffs, static_cast<int>(initial_payoffs.size()));
  EstimatorState state;
  state.prev_payoffs = std::move(initial_payoffs);
  return state;
}

Vec rpg_estimate(EstimatorState& state, std::span<const double> payoffs,
                 const QueryDirection& direction, double delta) {
  if (!(delta > 0.0)) throw Error("query radius must be positive");
  const BlockLayout& layout = direction.layout;
  check_payoffs(payoffs, layout.players());
  require(static_cast<int>(state.prev_payoffs.size()) == layout.players(),
          "estimator state has wrong player count");

  Vec estimate(layout.total());
  for (int i = 0; i < layout.players(); ++i) {
    const double scale =
        layout.dim(i) / delta * (payoffs[i] - state.prev_payoffs[i]);
    layout.block(estimate, i) = scale * direction.block(i);
  }
  state.prev_payoffs.assign(payoffs.begin(), payoffs.end());
  state.prev_radius = delta;
  state.prev_direction = direction.stacked;
  if (state.diagnostics) state.diagnostics->record(estimate);
  return estimate;
}

std::string to_string(BaselineKind kind) {
  return kind == BaselineKind::kOnePoint ? "one-point" : "two-point";
}

Vec baseline_estimate(BaselineKind kind, const PayoffOracle& oracle,
                      const Vec& xbar, const QueryDirection& direction,
                      double delta) {
  if (!(delta > 0.0)) throw Error("query radius must be positive");
  const BlockLayout& layout = direction.layout;
  require(xbar.size() == layout.total(), "base point has wrong dimension");

  const std::vector<double> plus = oracle(xbar + delta * direction.stacked);
  check_payoffs(plus, layout.players());
  std::vector<double> minus(layout.players(), 0.0);
  double factor = 1.0;
  if (kind == BaselineKind::kTwoPoint) {
    minus = oracle(xbar - delta * direction.stacked);
    check_payoffs(minus, layout.players());
    factor = 0.5;
  }
  Vec estimate(layout.total());
  for (int i = 0; i < layout.players(); ++i) {
    const double scale = layout.dim(i) / delta * factor * (plus[i] - minus[i]);
    layout.block(estimate, i) = scale * direction.block(i);
  }
  return estimate;
}

}  // namespace zolearn
