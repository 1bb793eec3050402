#pragma once

#include <cstdint>
#include <vector>

#include "zolearn/game.hpp"
#include "zolearn/rng.hpp"

namespace zolearn {

// Margin used to widen X into the action space X_a.
inline constexpr double kActionMargin = 0.25;

// F(x) = M x + q with payoffs
//   J^i = 1/2 x^i' M_ii x^i + x^i' (sum_{j != i} M_ij x^j + q^i).
// Diagonal blocks must be symmetric so the partial gradients stack to M x + q.
// The declared modulus is the smallest eigenvalue of (M + M')/2.
Game make_quadratic_game(const Mat& m, const Vec& q, const BlockLayout& layout,
                         std::vector<FeasibleSet> sets);

struct RandomQuadraticSpec {
  int players = 5;
  int dim = 2;
  double strong_monotonicity = 0.5;  // (M + M')/2 >= this * I
  double box = 1.0;                  // X^i = [-box, box]^dim
  double target_half_width = 0.5;    // x* ~ U[-w, w]
};

// M = mu I + B'B/2 + K/2 with K skew; x* drawn inside the box, q = -M x*.
Game make_random_quadratic_game(const RandomQuadraticSpec& spec, Stream stream);

// Single-player mean/variance portfolio game over N assets (N - 1 decision
// variables): J(x) = (r - mu' phi(x)) / sqrt(phi(x)' Sigma phi(x)) with
// phi(x) = [x; 1 - 1'x].
Game make_portfolio_game(const Vec& mu, const Mat& sigma, double r);
Game make_random_portfolio_game(int assets, Stream stream);

struct LseData {
  Vec inputs;  // scalar inputs z_j, lifted to [1, z, ..., z^features]
  Vec labels;
  int features = 5;
  double w_bound = 5.0;
  double lambda_bound = 5.0;
};

// Lifted design matrix Z~ with columns [1; z_j; z_j^2; ...].
Mat lse_design(const LseData& data);

// Two-player zero-sum game J^1 = lambda'(Z~' w - y) - |lambda|^2 / 2 = -J^2.
Game make_lse_game(const LseData& data);

// Draws inputs in [-1.5, 1.5], noise in [-2, 2] and coefficients in [-1, 1],
// redrawing until the least-squares critical point is interior.
LseData sample_lse_data(int features, int samples, Stream stream);

struct ThermalParams {
  int horizon = 2;
  int buildings = 10;
  std::vector<double> a, b, c;      // per building
  std::vector<double> r0;           // initial states
  std::vector<Vec> comfort_lower;   // per building, length T
  std::vector<Vec> comfort_upper;
  std::vector<double> capacity;
  Vec energy_price;                 // length T
  double demand_rate = 0.2;
  std::vector<std::vector<int>> cliques;
  double smoothing = 20.0;
  std::vector<Vec> weights;         // lambda_{ij}, length T per building

  void check() const;
};

// Seed-derived defaults: a in [0.8, 0.95], b = c = 1, r0 = 0, lambda in
// [0.04, 0.06], singleton cliques plus the grand coalition.
ThermalParams default_thermal_params(int buildings, int horizon, Stream stream);

// (1/C) log sum_t exp(C sum_{l in clique} x^l_t); log(T)/C for the empty set.
double clique_value(const ThermalParams& p, const BlockLayout& layout,
                    const std::vector<int>& clique, const Vec& x);

Game make_thermal_game(const ThermalParams& p);

// (N - |C|)! (|C| - 1)! / N!
double shapley_weight(int players, int clique_size);

}  // namespace zolearn
