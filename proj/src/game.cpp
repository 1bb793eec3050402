#include "zolearn/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace zolearn {

namespace {

const std::pair<GameClass, const char*> kClassNames[] = {
    {GameClass::kNone, "none"},
    {GameClass::kMonotone, "monotone"},
    {GameClass::kStronglyMonotone, "strongly-monotone"},
    {GameClass::kPseudoMonotone, "pseudo-monotone"},
    {GameClass::kPseudoMonotonePlus, "pseudo-monotone-plus"},
    {GameClass::kStrictlyPseudoMonotone, "strictly-pseudo-monotone"},
    {GameClass::kStronglyPseudoMonotone, "strongly-pseudo-monotone"},
    {GameClass::kStrictlyCoherent, "strictly-coherent"},
    {GameClass::kPseudoconvexPotential, "pseudoconvex-potential"},
};

bool blockwise_contains(const std::vector<FeasibleSet>& sets,
                        const BlockLayout& layout, const Vec& x, double tol) {
  if (x.size() != layout.total()) return false;
  for (int i = 0; i < layout.players(); ++i) {
    if (!sets[i].contains(layout.block(x, i), tol)) return false;
  }
  return true;
}

Vec blockwise_project(const std::vector<FeasibleSet>& sets,
                      const BlockLayout& layout, const Vec& x) {
  require(x.size() == layout.total(), "profile has wrong dimension");
  Vec out(x.size());
  for (int i = 0; i < layout.players(); ++i) {
    layout.block(out, i) = project(sets[i], layout.block(x, i));
  }
  return out;
}

}  // namespace

std::string to_string(GameClass c) {
  for (const auto& [value, name] : kClassNames) {
    if (value == c) return name;
  }
  return "none";
}

GameClass parse_game_class(const std::string& name) {
  for (const auto& [value, label] : kClassNames) {
    if (name == label) return value;
  }
  throw Error("unknown game class '" + name + "'");
}

bool Game::in_strategy_space(const Vec& x, double tol) const {
  return blockwise_contains(sets, layout, x, tol);
}

bool Game::in_action_space(const Vec& x, double tol) const {
  return blockwise_contains(action_sets, layout, x, tol);
}

Vec Game::project_strategy(const Vec& x) const {
  return blockwise_project(sets, layout, x);
}

Vec Game::project_action(const Vec& x) const {
  return blockwise_project(action_sets, layout, x);
}

Vec Game::ball_centers() const {
  Vec out(layout.total());
  for (int i = 0; i < players(); ++i) layout.block(out, i) = balls[i].center;
  return out;
}

double Game::min_ball_radius() const {
  double r = std::numeric_limits<double>::infinity();
  for (const auto& b : balls) r = std::min(r, b.radius);
  return r;
}

void Game::check() const {
  const int n = players();
  require(n >= 1, "game needs at least one player");
  require(static_cast<int>(sets.size()) == n &&
              static_cast<int>(action_sets.size()) == n &&
              static_cast<int>(balls.size()) == n,
          "game sets, action sets and balls must have one entry per player");
  for (int i = 0; i < n; ++i) {
    require(sets[i].dim() == layout.dim(i) &&
                action_sets[i].dim() == layout.dim(i) &&
                balls[i].center.size() == layout.dim(i),
            "player " + std::to_string(i) + " set dimension mismatch");
    require(balls[i].radius > 0.0, "interior ball radius must be positive");
    require(sets[i].contains_ball(balls[i], 1e-9),
            "interior ball of player " + std::to_string(i) +
                " is not inside its strategy space");
  }
  require(static_cast<bool>(payoffs), "game has no payoff oracle");
}

GameEvaluation evaluate_game(const Game& g, const Vec& x) {
  require(x.size() == g.dim(), "profile has wrong dimension");
  if (!g.in_action_space(x)) {
    throw Error("profile lies outside the action space of game '" + g.name +
                "'");
  }
  GameEvaluation out;
  out.payoffs = g.payoffs(x);
  require(static_cast<int>(out.payoffs.size()) == g.players(),
          "payoff oracle returned the wrong number of values");
  for (double v : out.payoffs) {
    if (!std::isfinite(v)) throw NumericError("non-finite payoff");
  }
  if (g.pseudogradient) out.pseudogradient = g.pseudogradient(x);
  return out;
}

Vec prox_profile(const Dgf& dgf, const std::vector<FeasibleSet>& sets,
                 const BlockLayout& layout, const Vec& x, const Vec& y) {
  require(x.size() == layout.total() && y.size() == layout.total(),
          "profile has wrong dimension");
  Vec out(x.size());
  for (int i = 0; i < layout.players(); ++i) {
    layout.block(out, i) =
        prox_map(dgf, sets[i], layout.block(x, i), layout.block(y, i));
  }
  return out;
}

}  // namespace zolearn
