// Acceptance suite. Prints one PASS/FAIL line per criterion.
//
//   acceptance_test [--only N[,N...]] [--known-failures N[,N...]]
//
// Exits 0 when every failing criterion is listed in --known-failures and
// every listed criterion does fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "test_util.hpp"
#include "zolearn/analysis.hpp"
#include "zolearn/estimator.hpp"
#include "zolearn/games.hpp"
#include "zolearn/geometry.hpp"
#include "zolearn/harness/config.hpp"
#include "zolearn/harness/experiment.hpp"
#include "zolearn/harness/game_factory.hpp"
#include "zolearn/harness/record_io.hpp"
#include "zolearn/learners.hpp"

#ifndef ZOLEARN_CONFIG_DIR
#define ZOLEARN_CONFIG_DIR "configs"
#endif

using namespace zolearn;
namespace zh = zolearn::harness;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

zh::ExperimentConfig config(const std::string& name) {
  return zh::load_experiment_config(std::string(ZOLEARN_CONFIG_DIR) + "/" + name +
                                    ".toml");
}

Schedule schedule_of(double a_gamma, double a_delta) {
  Schedule s;
  s.c_gamma = 1.0;
  s.b_gamma = 100.0;
  s.a_gamma = a_gamma;
  s.c_delta = 1.0;
  s.b_delta = 100.0;
  s.a_delta = a_delta;
  return s;
}

std::size_t metric_index(const RunRecord& r, const std::string& name) {
  for (std::size_t m = 0; m < r.metric_names.size(); ++m) {
    if (r.metric_names[m] == name) return m;
  }
  throw Error("metric '" + name + "' not logged");
}

// Seed mean of a logged metric, optionally squared first.
std::vector<double> seed_mean(const std::vector<RunRecord>& records,
                              const std::string& metric, bool square) {
  const std::size_t m = metric_index(records.front(), metric);
  std::vector<double> out(records.front().logged_k.size(), 0.0);
  for (const auto& r : records) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double v = r.logged_values[i][m];
      out[i] += (square ? v * v : v) / records.size();
    }
  }
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// ---- 1 ----------------------------------------------------------------------

Outcome geometry_suite() {
  Stream s(101);
  double proj_err = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const FeasibleSet set = testutil::random_polytope(s);
    const Vec x = s.uniform_vector(set.dim(), -4.0, 4.0);
    const Vec ref = oracle::project_enumeration(set.lower(), set.upper(), set.a(),
                                                set.b(), x);
    proj_err = std::max(proj_err, (project(set, x) - ref).norm());
  }

  // Slack is rhs - lhs of each inequality; identities count their error.
  double slack = 1e300;
  const Dgf e = Dgf::euclidean();
  const Dgf n = Dgf::negentropy();
  for (int trial = 0; trial < 1000; ++trial) {
    const FeasibleSet set = testutil::random_polytope(s);
    const Vec x = testutil::random_member(set, s);
    const Vec y1 = s.normal_vector(set.dim());
    const Vec y2 = s.normal_vector(set.dim());
    slack = std::min(slack, e.dual_norm(y1 - y2) / e.strong_convexity() -
                                e.primal_norm(prox_map(e, set, x, y1) -
                                              prox_map(e, set, x, y2)));
    slack = std::min(slack, -(prox_map(e, set, x, Vec::Zero(set.dim())) - x).norm());

    const int d = 2 + trial % 4;
    const Vec xs = testutil::random_simplex_interior(d, s);
    const FeasibleSet simplex = FeasibleSet::simplex(d);
    const Vec z1 = s.normal_vector(d);
    const Vec z2 = s.normal_vector(d);
    slack = std::min(slack, n.dual_norm(z1 - z2) / n.strong_convexity() -
                                n.primal_norm(prox_map(n, simplex, xs, z1) -
                                              prox_map(n, simplex, xs, z2)));
    slack = std::min(slack, -(prox_map(n, simplex, xs, Vec::Zero(d)) - xs)
                                 .lpNorm<1>());
  }
  for (int trial = 0; trial < 1000; ++trial) {
    const int d = 1 + trial % 5;
    const FeasibleSet inner = FeasibleSet::box(s.uniform_vector(d, -1.0, -0.2),
                                               s.uniform_vector(d, 0.2, 1.0));
    const FeasibleSet outer = inner.enlarged_box(0.25);
    const Vec p = testutil::random_member(inner, s);
    const Vec x = testutil::random_member(inner, s);
    const Vec y1 = s.normal_vector(d);
    const Vec y2 = s.normal_vector(d);
    const Vec x1 = prox_map(e, outer, x, y1);
    const Vec x2 = prox_map(e, inner, x, y2);
    const double rhs = bregman_div(e, p, x) + y2.dot(x1 - p) +
                       (y1 - y2).dot(x1 - x2) - bregman_div(e, x2, x1) -
                       bregman_div(e, x1, x);
    slack = std::min(slack, rhs - bregman_div(e, p, x2));
  }
  return {proj_err <= 1e-6 && slack >= -1e-7,
          "projection error " + fmt("%.2e", proj_err) + ", worst slack " +
              fmt("%.2e", slack)};
}

// ---- 2 ----------------------------------------------------------------------

Outcome unbiasedness() {
  const Game g = zh::build_game(config("quadratic_omd").game());
  Stream s(202);
  const Vec xbar = 0.5 * (sample_strategy(g, s) + g.ball_centers());
  const double delta = 0.5 * g.min_ball_radius();
  EstimateDiagnostics diag;
  diag.accumulate = true;
  for (int k = 0; k < 1000000; ++k) {
    const QueryDirection prev = sample_query_direction(g.layout, s);
    const QueryDirection u = sample_query_direction(g.layout, s);
    EstimatorState state =
        EstimatorState::initialize(g.payoffs(xbar + delta * prev.stacked));
    diag.record(rpg_estimate(state, g.payoffs(xbar + delta * u.stacked), u, delta));
  }
  const double err = (diag.mean - g.pseudogradient(xbar)).norm();
  const double se = diag.standard_error().norm();
  return {err <= 4.0 * se,
          "error " + fmt("%.3e", err) + " vs 4 SE " + fmt("%.3e", 4.0 * se)};
}

// ---- 3 ----------------------------------------------------------------------

Outcome bias_scaling() {
  Vec mu(3);
  mu << 0.12, 0.08, 0.05;
  Mat sigma(3, 3);
  sigma << 0.040, 0.006, 0.002,
           0.006, 0.020, 0.001,
           0.002, 0.001, 0.010;
  const Game g = make_portfolio_game(mu, sigma, 0.07);
  const InteriorBall ball = g.balls[0];
  const Vec x = ball.center + 0.8 * ball.radius * Vec::Unit(2, 0);
  const Vec grad = g.pseudogradient(x);

  const auto bias = [&](double delta, std::uint64_t seed, double& noise) {
    // The previous payoff is read at the pulled-back point.
    const Vec xbar = shrink_toward_center(x, delta, ball);
    const double anchor = g.payoffs(xbar)[0];
    Stream s(seed);
    EstimateDiagnostics diag;
    diag.accumulate = true;
    for (int k = 0; k < 1000000; ++k) {
      const Vec u = sample_unit_sphere(2, s);
      EstimatorState state = EstimatorState::initialize({anchor});
      diag.record(rpg_estimate(state, g.payoffs(xbar + delta * u),
                               QueryDirection{g.layout, u}, delta));
    }
    noise = diag.standard_error().norm();
    return (diag.mean - grad).norm();
  };
  double noise_big = 0.0, noise_small = 0.0;
  const double big = bias(0.4 * ball.radius, 301, noise_big);
  const double small = bias(0.2 * ball.radius, 302, noise_small);
  const double ratio = small / big;
  const bool pass = ratio >= 0.3 && ratio <= 0.7 && noise_big < 0.1 * big &&
                    noise_small < 0.1 * small;
  return {pass, "ratio " + fmt("%.3f", ratio) + ", noise/bias " +
                    fmt("%.3f", std::max(noise_big / big, noise_small / small))};
}

// ---- 4 ----------------------------------------------------------------------

// Each seed draws its own game and its own sample path.
Game seeded_quadratic(std::uint64_t seed) {
  return make_random_quadratic_game(RandomQuadraticSpec{}, Stream(seed).split("game"));
}

Outcome boundedness() {
  const Schedule sched = schedule_of(0.95, 0.75);
  int early = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    RunOptions opts;
    opts.iterations = 100000;
    opts.seed = seed;
    const RunRecord r = run_learning(seeded_quadratic(seed), Algorithm::kOmd,
                                     Dgf::euclidean(), sched, opts);
    early += r.running_max_at < 10000;
  }

  // Costs shifted by one so none crosses zero near x*; F is unchanged.
  const Game g = seeded_quadratic(1);
  Game shifted = g;
  shifted.payoffs = [base = g.payoffs](const Vec& x) {
    auto v = base(x);
    for (double& p : v) p += 1.0;
    return v;
  };
  RunOptions opts;
  opts.iterations = 100000;
  opts.seed = 1;
  opts.store_full_trace = true;
  const RunRecord r =
      run_learning(shifted, Algorithm::kOnePoint, Dgf::euclidean(), sched, opts);
  std::vector<double> xs, ys;
  for (std::size_t k = 1000; k < r.trace.size(); k += 10) {
    xs.push_back(std::log(1.0 / r.trace[k].delta));
    ys.push_back(std::log(r.trace[k].estimate_norm));
  }
  const double slope = oracle::ols_slope(xs, ys);
  return {early >= 4 && std::abs(slope - 1.0) <= 0.2,
          "running max before 1e4 in " + std::to_string(early) +
              "/5 seeds, one-point slope " + fmt("%.3f", slope)};
}

// ---- 5 and 10 ---------------------------------------------------------------

const fs::path kScratch = fs::temp_directory_path() / "zolearn_acceptance";

Outcome convergence() {
  const zh::ExperimentConfig omd = config("quadratic_omd");
  const Game g = zh::build_game(omd.game());
  const CpSolution cp = solve_cp(g);
  bool pass = cp.converged && cp.residual < 1e-10;
  const double known_gap = (cp.x - *g.critical_point).norm();
  std::string detail = "residual " + fmt("%.1e", cp.residual);
  for (const char* name : {"quadratic_omd", "quadratic_rmd"}) {
    const zh::ExperimentConfig c = config(name);
    const auto t0 = std::chrono::steady_clock::now();
    const zh::ExperimentResult r =
        zh::run_experiment(c, {.output_dir = (kScratch / "first").string()});
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    double mean = 0.0;
    for (const auto& rec : r.records) {
      mean += (rec.final_perturbed - cp.x).norm() / cp.x.norm() / r.records.size();
    }
    pass = pass && mean < 0.05 && secs < 60.0;
    detail += std::string(", ") + c.algorithm + " " + fmt("%.4f", mean) + " (" +
              fmt("%.0f", secs) + " s)";
  }
  detail += ", |x* - known| " + fmt("%.1e", known_gap);
  return {pass, detail};
}

Outcome determinism() {
  const zh::ExperimentConfig c = config("quadratic_omd");
  const fs::path first = kScratch / "first" / c.name;
  if (!fs::exists(first)) zh::run_experiment(c, {.output_dir = (kScratch / "first").string()});
  const zh::ExperimentResult again =
      zh::run_experiment(c, {.output_dir = (kScratch / "second").string(), .workers = 2});
  int compared = 0;
  bool same = true;
  for (const auto& f : again.files) {
    if (fs::path(f).extension() != ".csv") continue;
    ++compared;
    same = same && slurp(f) == slurp(first / fs::path(f).filename());
  }
  return {same && compared > 0,
          std::to_string(compared) + " csv files " + (same ? "identical" : "differ")};
}

// ---- 6 ----------------------------------------------------------------------

Outcome rates() {
  bool pass = true;
  std::string detail;
  double slopes[2] = {0.0, 0.0};
  const char* names[2] = {"quadratic_rate_set_a", "quadratic_rate_set_b"};
  for (int i = 0; i < 2; ++i) {
    const zh::ExperimentConfig c = config(names[i]);
    const zh::ExperimentResult r = zh::run_experiment(c, {.write_files = false});
    const std::vector<double> sq = seed_mean(r.records, "distance-to-cp", true);
    const auto& ks = r.records.front().logged_k;
    const RateFit fit = rate_fit(std::vector<double>(ks.begin(), ks.end()), sq, 0.5);
    slopes[i] = fit.slope;
    const double target = -(c.schedule.a_gamma + c.schedule.a_delta - 1.0);
    pass = pass && std::abs(fit.slope - target) <= 0.2;
    detail += std::string(i ? ", " : "") + (i ? "set b " : "set a ") +
              fmt("%.3f", fit.slope) + " (target " + fmt("%.2f", target) + ")";
  }
  pass = pass && slopes[0] < slopes[1];
  return {pass, detail};
}

// ---- 7 ----------------------------------------------------------------------

Outcome ergodic_merit() {
  bool pass = true;
  std::string detail;
  for (const char* name : {"lse_omd", "lse_rmd"}) {
    const zh::ExperimentConfig c = config(name);
    const zh::ExperimentResult r = zh::run_experiment(c, {.write_files = false});
    const std::vector<double> merit = seed_mean(r.records, "merit", false);
    const auto& ks = r.records.front().logged_k;
    double at_100 = 0.0;
    std::vector<double> window_mean;
    double sum = 0.0;
    int count = 0;
    long long window_end = 1000;
    for (std::size_t i = 0; i < ks.size(); ++i) {
      if (ks[i] == 100) at_100 = merit[i];
      if (ks[i] > window_end) {
        window_mean.push_back(sum / count);
        sum = 0.0;
        count = 0;
        window_end += 1000;
      }
      sum += merit[i];
      ++count;
    }
    window_mean.push_back(sum / count);
    int rises = 0;
    for (std::size_t w = 1; w < window_mean.size(); ++w) {
      rises += window_mean[w] > window_mean[w - 1];
    }
    const double ratio = merit.back() / at_100;
    pass = pass && ratio <= 0.1 && rises == 0;
    detail += std::string(detail.empty() ? "" : ", ") + c.algorithm + " ratio " +
              fmt("%.4f", ratio) + " rises " + std::to_string(rises);
  }
  return {pass, detail};
}

// ---- 8 ----------------------------------------------------------------------

double own_gradient_error(const Game& g, const Vec& x) {
  Vec fd(x.size());
  for (int i = 0; i < g.players(); ++i) {
    const int off = g.layout.offset(i);
    const auto own = [&](const Vec& xi) {
      Vec z = x;
      z.segment(off, xi.size()) = xi;
      return g.payoffs(z)[i];
    };
    fd.segment(off, g.layout.dim(i)) = oracle::gradient(own, g.layout.block(x, i), 1e-6);
  }
  return (g.pseudogradient(x) - fd).norm() / fd.norm();
}

Outcome construction() {
  const Game quad = zh::build_game(config("quadratic_omd").game());
  const Game port = zh::build_game(config("portfolio_omd").game());
  const Game lse = zh::build_game(config("lse_omd").game());
  const ThermalParams tp = default_thermal_params(5, 6, Stream(11));
  const Game thermal = make_thermal_game(tp);

  Stream s(808);
  double zero_sum = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const auto p = lse.payoffs(sample_strategy(lse, s));
    zero_sum = std::max(zero_sum, std::abs(p[0] + p[1]));
  }

  double fd_err = 0.0, phi_err = 0.0;
  for (const Game* g : {&quad, &port, &lse, &thermal}) {
    for (int k = 0; k < 50; ++k) {
      const Vec x = 0.5 * (sample_strategy(*g, s) + g->ball_centers());
      fd_err = std::max(fd_err, own_gradient_error(*g, x));
    }
  }
  for (int k = 0; k < 50; ++k) {
    const Vec x = 0.5 * (sample_strategy(thermal, s) + thermal.ball_centers());
    const Vec grad_phi = oracle::gradient(thermal.potential, x, 1e-6);
    phi_err = std::max(phi_err, (thermal.pseudogradient(x) - grad_phi).norm() /
                                    grad_phi.norm());
  }

  bool sandwich = true;
  for (int k = 0; k < 1000; ++k) {
    const Vec x = s.uniform_vector(thermal.dim(), -1.0, 3.0);
    for (const auto& clique : tp.cliques) {
      Vec load = Vec::Zero(tp.horizon);
      for (int l : clique) load += thermal.layout.block(x, l);
      const double v = clique_value(tp, thermal.layout, clique, x);
      const double hi = load.maxCoeff() + std::log(double(tp.horizon)) / tp.smoothing;
      sandwich = sandwich && v >= load.maxCoeff() - 1e-12 && v <= hi + 1e-12;
    }
  }

  std::size_t violations = 0;
  for (const Game* g : {&quad, &port, &lse, &thermal}) {
    ProbeOptions opts;
    opts.pairs = 10000;
    opts.modulus = g->modulus;
    violations +=
        monotonicity_probe(*g, g->declared_class, Stream(809), opts).violations.size();
  }
  const bool pass = zero_sum <= 1e-12 && fd_err <= 1e-5 && phi_err <= 1e-5 &&
                    sandwich && violations == 0;
  return {pass, "zero-sum " + fmt("%.1e", zero_sum) + ", gradient " +
                    fmt("%.1e", fd_err) + ", potential " + fmt("%.1e", phi_err) +
                    ", sandwich " + (sandwich ? "ok" : "broken") + ", violations " +
                    std::to_string(violations)};
}

// ---- 9 ----------------------------------------------------------------------

Outcome recurrence() {
  Stream st(909);
  int passed = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const double s = st.uniform(0.2, 0.9);
    const double t = st.uniform(std::max(s, 1.0 - s), 1.0);
    const double c = st.uniform(0.5, 1.0);
    const double d = st.uniform(0.1, 5.0);
    const double a0 = st.uniform(0.0, 5.0);
    const RecurrenceCheck r = recurrence_bound_check(c, d, s, t, a0, 1000000);
    passed += r.passed;
    worst = std::max(worst, r.worst_ratio);
  }
  return {passed == 50, std::to_string(passed) + "/50 draws, worst a_k/bound " +
                            fmt("%.3f", worst)};
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

std::set<int> parse_ids(const std::string& text) {
  std::set<int> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.insert(std::stoi(item));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only, known;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--only" && i + 1 < argc) {
      only = parse_ids(argv[++i]);
    } else if (arg == "--known-failures" && i + 1 < argc) {
      known = parse_ids(argv[++i]);
    } else {
      std::cerr << "usage: acceptance_test [--only N,...] [--known-failures N,...]\n";
      return 2;
    }
  }

  const std::vector<Criterion> criteria = {
      {1, "geometry suite", 10, geometry_suite},
      {2, "estimator unbiasedness", 30, unbiasedness},
      {3, "estimator bias scaling", 60, bias_scaling},
      {4, "bounded estimates, one-point contrast", 120, boundedness},
      {5, "convergence to the critical point", 120, convergence},
      {6, "convergence rate", 300, rates},
      {7, "ergodic merit", 120, ergodic_merit},
      {8, "benchmark construction", 120, construction},
      {9, "recurrence bound", 30, recurrence},
      {10, "determinism", 120, determinism},
  };

  fs::remove_all(kScratch);
  int unexpected = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_seconds) {
      o.pass = false;
      o.detail += ", over the " + fmt("%.0f", c.budget_seconds) + " s budget";
    }
    const bool expected_fail = known.count(c.id) > 0;
    if (o.pass == expected_fail) ++unexpected;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << c.id << ". " << c.name << ": "
              << o.detail << " [" << fmt("%.1f", secs) << " s]"
              << (expected_fail ? (o.pass ? " (listed as known failure)"
                                          : " (known failure)")
                                : "")
              << std::endl;
  }
  fs::remove_all(kScratch);
  return unexpected == 0 ? 0 : 1;
}
