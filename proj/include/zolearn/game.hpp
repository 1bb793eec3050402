#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "zolearn/common.hpp"
#include "zolearn/geometry.hpp"

namespace zolearn {

// Regularity classes a game can declare; probed by the analysis module.
enum class GameClass {
  kNone,
  kMonotone,
  kStronglyMonotone,
  kPseudoMonotone,
  kPseudoMonotonePlus,
  kStrictlyPseudoMonotone,
  kStronglyPseudoMonotone,
  kStrictlyCoherent,
  kPseudoconvexPotential,
};

std::string to_string(GameClass c);
GameClass parse_game_class(const std::string& name);

// F(x) = M x + q.
struct AffineField {
  Mat m;
  Vec q;
};

using PayoffFn = std::function<std::vector<double>(const Vec&)>;
using FieldFn = std::function<Vec(const Vec&)>;
using PotentialFn = std::function<double(const Vec&)>;

// An N-player continuous game. Profiles are stacked player vectors laid out
// by `layout`. Instances are immutable once built; the callables are pure.
struct Game {
  std::string name;
  BlockLayout layout;
  std::vector<FeasibleSet> sets;         // strategy spaces X^i
  std::vector<FeasibleSet> action_sets;  // action spaces X_a^i, X^i inside
  std::vector<InteriorBall> balls;       // balls inside X^i
  PayoffFn payoffs;
  FieldFn pseudogradient;  // empty when no analytic form exists
  PotentialFn potential;   // empty when the game has no potential
  std::optional<Vec> critical_point;
  std::optional<AffineField> affine;
  GameClass declared_class = GameClass::kNone;
  double modulus = 0.0;  // mu for the strong classes

  int players() const { return layout.players(); }
  int dim() const { return layout.total(); }
  bool has_pseudogradient() const { return static_cast<bool>(pseudogradient); }

  bool in_strategy_space(const Vec& x, double tol = 1e-9) const;
  bool in_action_space(const Vec& x, double tol = 1e-9) const;
  Vec project_strategy(const Vec& x) const;
  Vec project_action(const Vec& x) const;
  // Concatenated ball centers and the smallest radius.
  Vec ball_centers() const;
  double min_ball_radius() const;

  // Checks layout, set and ball consistency; throws on mismatch.
  void check() const;
};

struct GameEvaluation {
  std::vector<double> payoffs;
  std::optional<Vec> pseudogradient;
};

// Throws if x lies outside the action space X_a.
GameEvaluation evaluate_game(const Game& g, const Vec& x);

// Per-player prox step on the product set (group DGF is the player sum).
Vec prox_profile(const Dgf& dgf, const std::vector<FeasibleSet>& sets,
                 const BlockLayout& layout, const Vec& x, const Vec& y);

}  // namespace zolearn
