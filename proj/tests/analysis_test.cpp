#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "zolearn/analysis.hpp"
#include "zolearn/games.hpp"

using namespace zolearn;

namespace {

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Game identity_on_interval() {
  return make_quadratic_game(Mat::Identity(1, 1), vec({0.0}), BlockLayout({1}),
                             {FeasibleSet::box(vec({-1.0}), vec({1.0}))});
}

Game rotation() {
  Mat m(2, 2);
  m << 0.0, 1.0, -1.0, 0.0;
  return make_quadratic_game(m, Vec::Zero(2), BlockLayout({1, 1}),
                             {FeasibleSet::box(vec({-1}), vec({1})),
                              FeasibleSet::box(vec({-1}), vec({1}))});
}

std::vector<double> power_series(double lo, double hi, double step) {
  std::vector<double> k;
  for (double v = lo; v <= hi + 1e-9; v += step) k.push_back(v);
  return k;
}

}  // namespace

TEST_CASE("merit of the identity field") {
  const Game g = identity_on_interval();
  CHECK(std::abs(merit_err(g, vec({0.0}), MeritMethod::kExactQuadratic).value) < 1e-12);
  const MeritResult r = merit_err(g, vec({1.0}), MeritMethod::kExactQuadratic);
  const double grid = oracle::grid_max_1d([](double x) { return x * (1.0 - x); }, -1.0,
                                          1.0, 200001);
  CHECK(r.value == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(r.value == doctest::Approx(grid).epsilon(1e-8));
  CHECK(r.maximizer[0] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK_FALSE(r.lower_bound);
  CHECK_THROWS_AS(merit_err(g, vec({1.5}), MeritMethod::kExactQuadratic), Error);
}

TEST_CASE("merit is nonnegative for monotone games") {
  const Game g = make_random_quadratic_game(RandomQuadraticSpec{}, Stream(1));
  const Game lse = make_lse_game(sample_lse_data(5, 10, Stream(2)));
  Stream s(3);
  for (const Game* game : {&g, &lse}) {
    for (int k = 0; k < 10; ++k) {
      const Vec x = sample_strategy(*game, s);
      CHECK(merit_err(*game, x, MeritMethod::kExactQuadratic).value >= -1e-8);
    }
  }
}

TEST_CASE("multistart merit is a labeled lower bound") {
  const Game g = make_random_quadratic_game(RandomQuadraticSpec{}, Stream(4));
  Stream s(5);
  const Vec x = sample_strategy(g, s);
  const MeritResult exact = merit_err(g, x, MeritMethod::kExactQuadratic);
  const MeritResult ms = merit_err(g, x, MeritMethod::kMultistartPga);
  CHECK(ms.lower_bound);
  CHECK(ms.value <= exact.value + 1e-8);
  CHECK(ms.value >= exact.value - 1e-3 * std::max(1.0, exact.value));

  const Game p = make_random_portfolio_game(3, Stream(6));
  CHECK(default_merit_method(p) == MeritMethod::kMultistartPga);
  CHECK(default_merit_method(g) == MeritMethod::kExactQuadratic);
  CHECK_THROWS_AS(merit_err(p, p.ball_centers(), MeritMethod::kExactQuadratic), Error);
  const MeritResult pr = merit_err(p, p.ball_centers(), MeritMethod::kMultistartPga);
  CHECK(pr.lower_bound);
  CHECK(std::isfinite(pr.value));
  CHECK(parse_merit_method(to_string(MeritMethod::kMultistartPga)) ==
        MeritMethod::kMultistartPga);
}

TEST_CASE("identity field passes the strong probe") {
  const Game g = make_quadratic_game(Mat::Identity(3, 3), Vec::Zero(3), BlockLayout({3}),
                                     {FeasibleSet::box(-Vec::Ones(3), Vec::Ones(3))});
  ProbeOptions opts;
  opts.modulus = 1.0;
  const ProbeReport r = monotonicity_probe(g, GameClass::kStronglyMonotone, Stream(1), opts);
  CHECK(r.pairs_checked == 10000);
  CHECK(r.violations.empty());
  CHECK(r.describe().find("cannot certify") == std::string::npos);
  CHECK(r.describe().find("falsify") != std::string::npos);
}

TEST_CASE("rotation is monotone but not strictly pseudo-monotone") {
  const Game g = rotation();
  CHECK(monotonicity_probe(g, GameClass::kMonotone, Stream(2)).violations.empty());
  // <F(y), x - y> = <F(x), x - y> = <My, x> = 0 along a ray.
  ProbeOptions opts;
  opts.pairs = 0;
  opts.injected = {{vec({0.5, 0.0}), vec({0.25, 0.0})},
                   {vec({-0.2, 0.6}), vec({-0.1, 0.3})}};
  const ProbeReport r =
      monotonicity_probe(g, GameClass::kStrictlyPseudoMonotone, Stream(3), opts);
  CHECK(r.violations.size() >= 2);
  for (const Violation& v : r.violations) {
    const auto again = probe_margin(g, GameClass::kStrictlyPseudoMonotone, 0.0, v.x,
                                    v.y, r.tolerance, false);
    REQUIRE(again);
    CHECK(-*again == doctest::Approx(v.quantity));
    CHECK(*again < -r.tolerance);
  }
}

TEST_CASE("probe violations re-verify") {
  // A non-monotone field: F(x) = -x.
  const Game g = make_quadratic_game(-Mat::Identity(2, 2), Vec::Zero(2), BlockLayout({2}),
                                     {FeasibleSet::box(-Vec::Ones(2), Vec::Ones(2))});
  ProbeOptions opts;
  opts.pairs = 500;
  const ProbeReport r = monotonicity_probe(g, GameClass::kMonotone, Stream(4), opts);
  CHECK(r.violations.size() > 100);
  for (const Violation& v : r.violations) {
    const double q = -(g.pseudogradient(v.x) - g.pseudogradient(v.y)).dot(v.x - v.y);
    CHECK(q == doctest::Approx(v.quantity));
  }
  CHECK(r.worst_margin < 0.0);
}

TEST_CASE("pseudo-monotone plus equality clause") {
  // F(x) = M x with M skew is pseudo-monotone; on pairs along rays the
  // equality clause demands F(x) = F(y), which fails.
  const Game g = rotation();
  const auto margin = probe_margin(g, GameClass::kPseudoMonotonePlus, 0.0,
                                   vec({0.5, 0.0}), vec({0.25, 0.0}), 1e-9, false);
  REQUIRE(margin);
  CHECK(*margin == doctest::Approx(-0.25));
  // The identity field only reaches the equality clause at x = y.
  const Game id = identity_on_interval();
  ProbeOptions opts;
  opts.pairs = 2000;
  CHECK(monotonicity_probe(id, GameClass::kPseudoMonotonePlus, Stream(5), opts)
            .violations.empty());
}

TEST_CASE("strict coherence and pseudoconvex potential probes") {
  const Game g = make_random_quadratic_game(RandomQuadraticSpec{}, Stream(7));
  ProbeOptions opts;
  opts.pairs = 2000;
  CHECK(monotonicity_probe(g, GameClass::kStrictlyCoherent, Stream(8), opts)
            .violations.empty());
  Mat sym(2, 2);
  sym << 2.0, 0.5, 0.5, 1.0;
  const Game pot = make_quadratic_game(sym, vec({0.1, -0.3}), BlockLayout({1, 1}),
                                       {FeasibleSet::box(vec({-1}), vec({1})),
                                        FeasibleSet::box(vec({-1}), vec({1}))});
  REQUIRE(pot.potential);
  CHECK(monotonicity_probe(pot, GameClass::kPseudoconvexPotential, Stream(9), opts)
            .violations.empty());
  CHECK_THROWS_AS(monotonicity_probe(rotation(), GameClass::kPseudoconvexPotential,
                                     Stream(9), opts),
                  Error);
}

TEST_CASE("finite-difference probing of the portfolio game") {
  const Game g = make_random_portfolio_game(3, Stream(10));
  ProbeOptions opts;
  opts.pairs = 2000;
  opts.force_finite_differences = true;
  const ProbeReport r = monotonicity_probe(g, GameClass::kPseudoMonotone, Stream(11), opts);
  CHECK(r.finite_differences);
  CHECK(r.tolerance == 1e-4);
  CHECK(r.violations.empty());
  Stream s(12);
  for (int k = 0; k < 20; ++k) {
    const Vec x = sample_strategy(g, s);
    const Vec inner = 0.5 * (x + g.ball_centers());
    CHECK(oracle::relative_error(finite_difference_field(g, inner),
                                 g.pseudogradient(inner)) < 1e-5);
    // One-sided stencils on the boundary are first-order accurate.
    CHECK(oracle::relative_error(finite_difference_field(g, x), g.pseudogradient(x)) < 1e-4);
  }
}

TEST_CASE("solver finds the identity-shift critical point") {
  const Vec xs = vec({0.3, -0.4, 0.1});
  const Game g = make_quadratic_game(Mat::Identity(3, 3), -xs, BlockLayout({3}),
                                     {FeasibleSet::box(-Vec::Ones(3), Vec::Ones(3))});
  const CpSolution sol = solve_cp(g);
  CHECK(sol.converged);
  CHECK(sol.residual < 1e-10);
  CHECK((sol.x - xs).norm() < 1e-9);
  REQUIRE(sol.merit);
  CHECK(*sol.merit <= 1e-5);
}

TEST_CASE("extragradient handles the rotation where projected descent cycles") {
  const Game g = rotation();
  const CpSolution sol = solve_cp(g);
  CHECK(sol.converged);
  CHECK(sol.x.norm() < 1e-9);
  // Plain projected descent with the same step moves away from the origin.
  Vec x = vec({0.5, 0.5});
  for (int k = 0; k < 10000; ++k) x = g.project_strategy(x - sol.step * g.pseudogradient(x));
  MESSAGE("projected descent distance after 1e4 steps: " << x.norm()
                                                         << ", extragradient: "
                                                         << sol.x.norm());
  CHECK(x.norm() > 0.5);
}

TEST_CASE("solver matches the least-squares linear solve") {
  const LseData data = sample_lse_data(5, 10, Stream(13));
  const Game g = make_lse_game(data);
  REQUIRE(g.affine);
  const Vec direct = g.affine->m.lu().solve(-g.affine->q);
  const CpSolution sol = solve_cp(g);
  CHECK(sol.converged);
  CHECK((sol.x - direct).norm() < 1e-6);
  REQUIRE(sol.merit);
  CHECK(*sol.merit <= 1e-5);
}

TEST_CASE("solver on constrained benchmarks") {
  const Game q = make_random_quadratic_game(RandomQuadraticSpec{}, Stream(14));
  const CpSolution a = solve_cp(q);
  CHECK(a.residual < 1e-10);
  CHECK(*a.merit <= 1e-5);
  // A critical point on the boundary.
  Game shifted = make_quadratic_game(Mat::Identity(2, 2), vec({-2.0, 0.5}),
                                     BlockLayout({2}),
                                     {FeasibleSet::box(-Vec::Ones(2), Vec::Ones(2))});
  const CpSolution b = solve_cp(shifted);
  CHECK(b.converged);
  CHECK((b.x - vec({1.0, -0.5})).norm() < 1e-9);
  CHECK(natural_residual(shifted, b.x) < 1e-10);
  const Game t = make_thermal_game(default_thermal_params(3, 4, Stream(15)));
  const CpSolution c = solve_cp(t);
  CHECK(c.converged);
  CHECK(natural_residual(t, c.x) <= 1e-10);
}

TEST_CASE("solver reports budget exhaustion") {
  Mat m(2, 2);
  m << 0.0, 1.0, -1.0, 0.0;
  const Game g = make_quadratic_game(m, -m * vec({0.3, 0.2}), BlockLayout({1, 1}),
                                     {FeasibleSet::box(vec({-1}), vec({1})),
                                      FeasibleSet::box(vec({-1}), vec({1}))});
  SolveOptions opts;
  opts.max_iterations = 3;
  opts.polish = false;
  const CpSolution sol = solve_cp(g, opts);
  CHECK_FALSE(sol.converged);
  CHECK(sol.iterations == 3);
}

TEST_CASE("rate fits of synthetic power laws") {
  const std::vector<double> k = power_series(1.0, 1e5, 1.0);
  std::vector<double> a, b;
  for (double v : k) {
    a.push_back(std::pow(v, -0.7));
    b.push_back(5.0 / v);
  }
  CHECK(rate_fit(k, a, 0.5).slope == doctest::Approx(-0.7).epsilon(1e-3));
  CHECK(rate_fit(k, b, 0.5).slope == doctest::Approx(-1.0).epsilon(1e-3));
  CHECK(rate_fit(k, a, 0.5).r_squared == doctest::Approx(1.0));

  // Two-term model over the last decade, sampled every 100.
  const std::vector<double> tail = power_series(1e4, 1e5, 100.0);
  std::vector<double> mixed;
  for (double v : tail) mixed.push_back(3.0 * std::pow(v, -0.7) + 50.0 / v);
  const RateFit fit = rate_fit(tail, mixed, 1.0);
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < tail.size(); ++i) {
    lx.push_back(std::log(tail[i]));
    ly.push_back(std::log(mixed[i]));
  }
  CHECK(fit.slope == doctest::Approx(oracle::ols_slope(lx, ly)).epsilon(1e-9));
  CHECK(fit.slope == doctest::Approx(-0.8243).epsilon(1e-4));
  CHECK(fit.k0 == 10000);
  CHECK(fit.k1 == 100000);
}

TEST_CASE("rate fit recovers random exponents") {
  Stream s(16);
  const std::vector<double> k = power_series(10.0, 1e4, 10.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double p = s.uniform(0.2, 1.5);
    const double c = s.uniform(0.1, 10.0);
    std::vector<double> m;
    for (double v : k) m.push_back(c * std::pow(v, -p) * (1.0 + 0.01 * s.uniform(-1, 1)));
    CHECK(std::abs(rate_fit(k, m, 0.5).slope + p) <= 0.01);
  }
}

TEST_CASE("rate fit input errors") {
  const std::vector<double> k = power_series(1.0, 100.0, 1.0);
  std::vector<double> m(k.size(), 1.0);
  m[90] = 0.0;
  CHECK_THROWS_AS(rate_fit(k, m, 0.5), Error);
  CHECK_THROWS_AS(rate_fit(k, std::vector<double>(k.size(), 1.0), 0.3), Error);
  CHECK_THROWS_AS(rate_fit(k, std::vector<double>(3, 1.0), 1.0), Error);
}

TEST_CASE("recurrence bound examples") {
  const RecurrenceCheck a = recurrence_bound_check(1.0, 1.0, 0.6, 0.8, 1.0, 1000000);
  CHECK(a.passed);
  CHECK(a.big_k >= 1);
  CHECK(a.big_k > a.c_tilde);
  const RecurrenceCheck zero = recurrence_bound_check(1.0, 0.0, 0.6, 0.8, 0.0, 10000, true);
  CHECK(zero.passed);
  for (double v : zero.trace) CHECK(v == 0.0);
  const RecurrenceCheck contract = recurrence_bound_check(2.0, 0.0, 0.7, 0.8, 3.0, 10000, true);
  CHECK(contract.passed);
  for (std::size_t k = 2; k + 1 < contract.trace.size(); ++k) {
    if (2.0 / std::pow(double(k + 1), 0.7) < 1.0) {
      CHECK(contract.trace[k + 1] < contract.trace[k]);
    }
  }
  CHECK_THROWS_AS(recurrence_bound_check(1.0, 1.0, 0.8, 0.6, 1.0, 100), Error);
  CHECK_THROWS_AS(recurrence_bound_check(1.0, 1.0, 0.3, 0.5, 1.0, 100), Error);
  CHECK_THROWS_AS(recurrence_bound_check(-1.0, 1.0, 0.6, 0.8, 1.0, 100), Error);
}

TEST_CASE("recurrence constants follow the closed form") {
  const double c = 1.0, d = 1.0, s = 0.6, t = 0.8;
  const RecurrenceCheck r = recurrence_bound_check(c, d, s, t, 1.0, 1000, true);
  // Smallest K with K > c K^{1-s} >= 1.
  long long k = 1;
  while (!(k > c * std::pow(double(k), 1 - s) && c * std::pow(double(k), 1 - s) >= 1.0)) ++k;
  CHECK(r.big_k == k);
  const double ct = std::floor(c * std::pow(double(k), 1 - s));
  CHECK(r.c_tilde == ct);
  const double p = t + s - 1.0;
  CHECK(r.c_star == doctest::Approx(d / (ct - p)));
  const double a_k = r.trace[k - 1];
  const double tilde_a0 = a_k - r.c_star / std::pow(double(k), p);
  CHECK(r.d_star == doctest::Approx(std::max(0.0, k * (k - 1) * tilde_a0 / (k - ct))));
}

TEST_CASE("recurrence bound over random draws") {
  Stream st(17);
  for (int trial = 0; trial < 20; ++trial) {
    const double s = st.uniform(0.2, 0.9);
    const double t = st.uniform(std::max(s, 1.0 - s), 1.0);
    if (!(s < t && s + t > 1.0 && t < 1.0)) continue;
    const RecurrenceCheck r = recurrence_bound_check(
        st.uniform(0.5, 1.0), st.uniform(0.1, 5.0), s, t, st.uniform(0.0, 5.0), 100000);
    INFO("s=" << s << " t=" << t << " K=" << r.big_k << " fail=" << r.first_failure);
    CHECK(r.passed);
  }
}
