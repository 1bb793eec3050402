#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "zolearn/game.hpp"
#include "zolearn/rng.hpp"

namespace zolearn {

// ---- merit function -------------------------------------------------------

enum class MeritMethod { kExactQuadratic, kMultistartPga };

std::string to_string(MeritMethod m);
MeritMethod parse_merit_method(const std::string& name);

struct MeritOptions {
  double gradient_map_tol = 1e-8;
  long long max_iterations = 2000000;
  int starts = 32;
  int steps_per_start = 300;
  std::uint64_t seed = 0;
};

struct MeritResult {
  double value = 0.0;
  Vec maximizer;
  // multistart-pga only gives a lower bound on the true maximum.
  bool lower_bound = false;
  bool converged = true;
};

// Err(x*) = max_{x in X} <F(x), x* - x>.
MeritResult merit_err(const Game& g, const Vec& x_star, MeritMethod method,
                      const MeritOptions& options = {});

// Exact method for affine F when (M + M')/2 is PSD, multistart otherwise.
MeritMethod default_merit_method(const Game& g);

// ---- monotonicity probes --------------------------------------------------

struct ProbeOptions {
  int pairs = 10000;
  double modulus = 0.0;  // mu for the strong classes
  // Tolerances for analytic F and for finite-difference F respectively.
  double analytic_tol = 1e-9;
  double finite_difference_tol = 1e-4;
  bool force_finite_differences = false;
  // Pairs checked in addition to the sampled ones.
  std::vector<std::pair<Vec, Vec>> injected;
};

struct Violation {
  Vec x;
  Vec y;
  double quantity;  // negative margin of the violated inequality
};

struct ProbeReport {
  GameClass tested;
  long long pairs_checked = 0;
  double tolerance = 0.0;
  bool finite_differences = false;
  std::vector<Violation> violations;
  double worst_margin = 0.0;

  // Sampling can only falsify a class, never certify it.
  std::string describe() const;
};

// Margin of the class inequality on the ordered pair (x, y); nullopt when the
// implication is vacuous. A margin below -tol is a violation.
std::optional<double> probe_margin(const Game& g, GameClass c, double modulus,
                                   const Vec& x, const Vec& y, double tol,
                                   bool finite_differences);

ProbeReport monotonicity_probe(const Game& g, GameClass c, Stream stream,
                               const ProbeOptions& options = {});

// Stacked own-variable partial derivatives by central differences (one-sided
// where the stencil would leave X_a).
Vec finite_difference_field(const Game& g, const Vec& x, double h = 1e-6);

// A point drawn from the strategy space: uniform in the bounding box,
// projected, then pulled toward the interior-ball centers by a random factor.
Vec sample_strategy(const Game& g, Stream& stream);

// ---- ground-truth critical point ------------------------------------------

struct SolveOptions {
  double tol = 1e-10;
  long long max_iterations = 1000000;
  std::uint64_t seed = 0;
  bool polish = true;  // active-set linear polish for affine F on boxes
};

struct CpSolution {
  Vec x;
  double residual = 0.0;
  bool converged = false;
  long long iterations = 0;
  double step = 0.0;
  std::optional<double> merit;
};

// ||x - proj_X(x - F(x))||.
double natural_residual(const Game& g, const Vec& x);

// Deterministic extragradient (mirror-prox with the true F and euclidean
// DGF) with step 1/(2 L^), L^ sampled and halved on a local check.
CpSolution solve_cp(const Game& g, const SolveOptions& options = {});

// ---- empirical rates ------------------------------------------------------

struct RateFit {
  long long k0 = 0;
  long long k1 = 0;
  int points = 0;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

// Least-squares slope of ln(metric) against ln(k) over the last `window`
// fraction of the points.
RateFit rate_fit(const std::vector<double>& k, const std::vector<double>& metric,
                 double window);

// ---- recurrence bound -----------------------------------------------------

struct RecurrenceCheck {
  bool passed = false;
  long long big_k = 0;
  double c_tilde = 0.0;
  double c_star = 0.0;
  double d_star = 0.0;
  long long first_failure = 0;  // 0 when none
  double worst_ratio = 0.0;     // max a_k / bound_k over K <= k <= horizon
  std::vector<double> trace;    // a_1 ... a_horizon
};

// Simulates a_{k+1} = (1 - c/k^s) a_k + d/k^{t+s} from a_1 = a0 and checks
// a_k <= c*/k^{t+s-1} + d*/k for K <= k <= horizon.
RecurrenceCheck recurrence_bound_check(double c, double d, double s, double t,
                                       double a0, long long horizon,
                                       bool keep_trace = false);

}  // namespace zolearn
