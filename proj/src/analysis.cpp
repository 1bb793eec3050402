#include "zolearn/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace zolearn {

namespace {

bool psd_symmetric_part(const Mat& m) {
  const Mat sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff() >= -1e-10;
}

bool all_boxes(const Game& g) {
  for (const auto& s : g.sets) {
    if (s.kind() != SetKind::kBox) return false;
  }
  return true;
}

Vec field(const Game& g, const Vec& x) {
  if (g.pseudogradient) return g.pseudogradient(x);
  return finite_difference_field(g, x);
}

// Derivative of f along coordinate j, staying inside the action space.
double partial(const Game& g, const std::function<double(const Vec&)>& f,
               const Vec& x, int j, double h) {
  Vec plus = x, minus = x;
  plus[j] += h;
  minus[j] -= h;
  const bool has_plus = g.in_action_space(plus, 0.0);
  const bool has_minus = g.in_action_space(minus, 0.0);
  if (has_plus && has_minus) return (f(plus) - f(minus)) / (2.0 * h);
  if (has_plus) return (f(plus) - f(x)) / h;
  if (has_minus) return (f(x) - f(minus)) / h;
  // Neither side fits (a vertex of X with X_a = X): differentiate at a point
  // moved a few steps toward the interior-ball centers instead.
  const Vec center = g.ball_centers();
  const double gap = (center - x).norm();
  for (int m = 1; m <= 8 && gap > 0.0; ++m) {
    const Vec base = x + std::min(1.0, 4.0 * m * h / gap) * (center - x);
    Vec up = base, down = base;
    up[j] += h;
    down[j] -= h;
    const bool has_up = g.in_action_space(up, 0.0);
    const bool has_down = g.in_action_space(down, 0.0);
    if (has_up && has_down) return (f(up) - f(down)) / (2.0 * h);
    if (has_up) return (f(up) - f(base)) / h;
    if (has_down) return (f(base) - f(down)) / h;
  }
  throw NumericError("finite-difference stencil leaves the action space");
}

double inner_objective(const Game& g, const Vec& x_star, const Vec& x) {
  return field(g, x).dot(x_star - x);
}

MeritResult merit_exact(const Game& g, const Vec& x_star,
                        const MeritOptions& options) {
  const Mat& m = g.affine->m;
  const Vec& q = g.affine->q;
  const Mat h2 = m + m.transpose();
  const Vec c = m.transpose() * x_star - q;
  double lip = 0.0;
  if (h2.size() > 0) {
    Eigen::SelfAdjointEigenSolver<Mat> solver(h2, Eigen::EigenvaluesOnly);
    lip = solver.eigenvalues().cwiseAbs().maxCoeff();
  }
  lip = std::max(lip, 1e-6);
  auto grad = [&](const Vec& x) -> Vec { return c - h2 * x; };
  auto value = [&](const Vec& x) { return (m * x + q).dot(x_star - x); };

  // Accelerated projected gradient ascent with function-value restarts.
  Vec x = x_star;
  Vec y = x;
  double t = 1.0;
  double fx = value(x);
  MeritResult out;
  out.converged = false;
  for (long long it = 0; it < options.max_iterations; ++it) {
    const Vec x_next = g.project_strategy(y + grad(y) / lip);
    const double f_next = value(x_next);
    if (f_next < fx) {
      // Restart from x with a plain step.
      y = x;
      t = 1.0;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = x_next + ((t - 1.0) / t_next) * (x_next - x);
    x = x_next;
    fx = f_next;
    t = t_next;
    const Vec step = g.project_strategy(x + grad(x) / lip) - x;
    if (lip * step.norm() <= options.gradient_map_tol) {
      out.converged = true;
      break;
    }
  }
  out.value = fx;
  out.maximizer = x;
  return out;
}

MeritResult merit_multistart(const Game& g, const Vec& x_star,
                             const MeritOptions& options) {
  Stream stream = Stream(options.seed).split("merit-multistart");
  auto objective = [&](const Vec& x) { return inner_objective(g, x_star, x); };
  MeritResult best;
  best.lower_bound = true;
  best.value = -std::numeric_limits<double>::infinity();
  for (int start = 0; start < std::max(1, options.starts); ++start) {
    Stream s = stream.split(static_cast<std::uint64_t>(start));
    Vec x = start == 0 ? x_star : sample_strategy(g, s);
    double fx = objective(x);
    double step = 1.0;
    for (int it = 0; it < options.steps_per_start; ++it) {
      Vec grad(x.size());
      for (int j = 0; j < x.size(); ++j) {
        grad[j] = partial(g, objective, x, j, 1e-7);
      }
      bool accepted = false;
      while (step > 1e-12) {
        const Vec cand = g.project_strategy(x + step * grad);
        const double fc = objective(cand);
        if (fc > fx) {
          accepted = (fc - fx) > 1e-15 * std::max(1.0, std::abs(fx));
          x = cand;
          fx = fc;
          step *= 2.0;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) break;
    }
    if (fx > best.value) {
      best.value = fx;
      best.maximizer = x;
    }
  }
  return best;
}

}  // namespace

std::string to_string(MeritMethod m) {
  return m == MeritMethod::kExactQuadratic ? "exact-quadratic" : "multistart-pga";
}

MeritMethod parse_merit_method(const std::string& name) {
  if (name == "exact-quadratic") return MeritMethod::kExactQuadratic;
  if (name == "multistart-pga") return MeritMethod::kMultistartPga;
  throw Error("unknown merit method '" + name + "'");
}

MeritMethod default_merit_method(const Game& g) {
  if (g.affine && psd_symmetric_part(g.affine->m)) {
    return MeritMethod::kExactQuadratic;
  }
  return MeritMethod::kMultistartPga;
}

MeritResult merit_err(const Game& g, const Vec& x_star, MeritMethod method,
                      const MeritOptions& options) {
  require(x_star.size() == g.dim(), "point has wrong dimension");
  if (!g.in_strategy_space(x_star, 1e-7)) {
    throw Error("merit: point lies outside the strategy space");
  }
  if (method == MeritMethod::kExactQuadratic) {
    if (!g.affine) throw Error("exact merit requires an affine pseudogradient");
    if (!psd_symmetric_part(g.affine->m)) {
      throw Error("exact merit requires a PSD symmetric part");
    }
    return merit_exact(g, x_star, options);
  }
  return merit_multistart(g, x_star, options);
}

Vec finite_difference_field(const Game& g, const Vec& x, double h) {
  Vec out(x.size());
  for (int i = 0; i < g.players(); ++i) {
    auto payoff_i = [&g, i](const Vec& z) { return g.payoffs(z)[i]; };
    for (int j = 0; j < g.layout.dim(i); ++j) {
      out[g.layout.offset(i) + j] =
          partial(g, payoff_i, x, g.layout.offset(i) + j, h);
    }
  }
  return out;
}

Vec sample_strategy(const Game& g, Stream& stream) {
  Vec raw(g.dim());
  for (int i = 0; i < g.players(); ++i) {
    const FeasibleSet& s = g.sets[i];
    for (int j = 0; j < s.dim(); ++j) {
      raw[g.layout.offset(i) + j] = stream.uniform(s.lower()[j], s.upper()[j]);
    }
  }
  const Vec boundary = g.project_strategy(raw);
  const Vec center = g.ball_centers();
  const double pull = stream.uniform() < 0.5 ? 1.0 : stream.uniform();
  return center + pull * (boundary - center);
}

std::optional<double> probe_margin(const Game& g, GameClass c, double modulus,
                                   const Vec& x, const Vec& y, double tol,
                                   bool finite_differences) {
  auto f = [&](const Vec& z) {
    return finite_differences ? finite_difference_field(g, z) : field(g, z);
  };
  const Vec diff = x - y;
  const double dist2 = diff.squaredNorm();
  switch (c) {
    case GameClass::kNone:
      return std::nullopt;
    case GameClass::kMonotone:
      return (f(x) - f(y)).dot(diff);
    case GameClass::kStronglyMonotone:
      return (f(x) - f(y)).dot(diff) - modulus * dist2;
    case GameClass::kPseudoMonotone:
    case GameClass::kStronglyPseudoMonotone: {
      if (f(y).dot(diff) < 0.0) return std::nullopt;
      const double mu = c == GameClass::kPseudoMonotone ? 0.0 : modulus;
      return f(x).dot(diff) - mu * dist2;
    }
    case GameClass::kStrictlyPseudoMonotone: {
      if (f(y).dot(diff) < 0.0 || std::sqrt(dist2) <= 1e-6) return std::nullopt;
      // Equality is only allowed for x = y, so a value within tol of zero
      // already violates the class.
      return f(x).dot(diff) - 2.0 * tol;
    }
    case GameClass::kPseudoMonotonePlus: {
      const Vec fy = f(y);
      if (fy.dot(diff) < 0.0) return std::nullopt;
      const Vec fx = f(x);
      const double inner = fx.dot(diff);
      if (std::abs(inner) > tol) return inner;
      // Equality clause: F(x) must equal F(y).
      return -(fx - fy).norm();
    }
    case GameClass::kStrictlyCoherent: {
      require(g.critical_point.has_value(),
              "strict coherence probe needs a known critical point");
      const Vec d = x - *g.critical_point;
      if (d.norm() <= 1e-6) return std::nullopt;
      return f(x).dot(d) - 2.0 * tol;
    }
    case GameClass::kPseudoconvexPotential: {
      require(static_cast<bool>(g.potential),
              "potential probe needs a game with a potential");
      if (f(x).dot(y - x) < 0.0) return std::nullopt;
      return g.potential(y) - g.potential(x);
    }
  }
  return std::nullopt;
}

std::string ProbeReport::describe() const {
  std::ostringstream out;
  out << "monotonicity probe: " << to_string(tested)
      << " (sampling can falsify but not certify a class)\n"
      << "  pairs checked: " << pairs_checked << "\n"
      << "  field: " << (finite_differences ? "finite differences" : "analytic")
      << ", tolerance " << tolerance << "\n"
      << "  violations: " << violations.size() << "\n"
      << "  worst margin: " << worst_margin << "\n";
  return out.str();
}

ProbeReport monotonicity_probe(const Game& g, GameClass c, Stream stream,
                               const ProbeOptions& options) {
  ProbeReport report;
  report.tested = c;
  report.finite_differences =
      options.force_finite_differences || !g.has_pseudogradient();
  report.tolerance = report.finite_differences ? options.finite_difference_tol
                                               : options.analytic_tol;
  report.worst_margin = std::numeric_limits<double>::infinity();

  auto check = [&](const Vec& x, const Vec& y) {
    for (int order = 0; order < 2; ++order) {
      const Vec& a = order == 0 ? x : y;
      const Vec& b = order == 0 ? y : x;
      const auto margin = probe_margin(g, c, options.modulus, a, b,
                                       report.tolerance,
                                       report.finite_differences);
      if (!margin) continue;
      report.worst_margin = std::min(report.worst_margin, *margin);
      if (*margin < -report.tolerance) {
        report.violations.push_back({a, b, -*margin});
      }
    }
    ++report.pairs_checked;
  };

  for (const auto& [x, y] : options.injected) check(x, y);
  Stream s = stream.split("probe");
  for (int p = 0; p < options.pairs; ++p) {
    const Vec x = sample_strategy(g, s);
    const Vec y = sample_strategy(g, s);
    check(x, y);
  }
  if (!std::isfinite(report.worst_margin)) report.worst_margin = 0.0;
  return report;
}

double natural_residual(const Game& g, const Vec& x) {
  return (x - g.project_strategy(x - field(g, x))).norm();
}

namespace {

// For affine F on boxes: fix coordinates sitting on a bound with F pointing
// outward and solve the remaining linear system exactly.
std::optional<Vec> active_set_polish(const Game& g, const Vec& x) {
  const Mat& m = g.affine->m;
  const Vec& q = g.affine->q;
  const Vec f = m * x + q;
  Vec lo(g.dim()), hi(g.dim());
  for (int i = 0; i < g.players(); ++i) {
    g.layout.block(lo, i) = g.sets[i].lower();
    g.layout.block(hi, i) = g.sets[i].upper();
  }
  std::vector<int> free_idx;
  Vec fixed = x;
  for (int j = 0; j < g.dim(); ++j) {
    const double eps = 1e-7 * (hi[j] - lo[j]);
    if (x[j] <= lo[j] + eps && f[j] > 0.0) {
      fixed[j] = lo[j];
    } else if (x[j] >= hi[j] - eps && f[j] < 0.0) {
      fixed[j] = hi[j];
    } else {
      free_idx.push_back(j);
    }
  }
  if (free_idx.empty()) return fixed;
  const int nf = static_cast<int>(free_idx.size());
  Mat a(nf, nf);
  Vec rhs(nf);
  for (int r = 0; r < nf; ++r) {
    rhs[r] = -q[free_idx[r]];
    for (int j = 0; j < g.dim(); ++j) {
      if (std::find(free_idx.begin(), free_idx.end(), j) == free_idx.end()) {
        rhs[r] -= m(free_idx[r], j) * fixed[j];
      }
    }
    for (int col = 0; col < nf; ++col) a(r, col) = m(free_idx[r], free_idx[col]);
  }
  Eigen::FullPivLU<Mat> lu(a);
  if (!lu.isInvertible()) return std::nullopt;
  const Vec sol = lu.solve(rhs);
  Vec out = fixed;
  for (int r = 0; r < nf; ++r) out[free_idx[r]] = sol[r];
  if (!g.in_strategy_space(out, 0.0)) return std::nullopt;
  return out;
}

}  // namespace

CpSolution solve_cp(const Game& g, const SolveOptions& options) {
  require(g.has_pseudogradient(), "solve_cp needs an analytic pseudogradient");
  Stream stream = Stream(options.seed).split("solve-cp");

  double lip = 1e-12;
  for (int p = 0; p < 64; ++p) {
    const Vec x = sample_strategy(g, stream);
    const Vec y = sample_strategy(g, stream);
    const double dist = (x - y).norm();
    if (dist > 1e-12) {
      lip = std::max(lip, (g.pseudogradient(x) - g.pseudogradient(y)).norm() / dist);
    }
  }
  double eta = 1.0 / (2.0 * lip);
  const bool can_polish = options.polish && g.affine && all_boxes(g);

  CpSolution sol;
  Vec x = g.project_strategy(g.ball_centers());
  double best_res = natural_residual(g, x);
  Vec best = x;
  long long it = 0;
  for (; it < options.max_iterations && best_res > options.tol; ++it) {
    const Vec fx = g.pseudogradient(x);
    const Vec half = g.project_strategy(x - eta * fx);
    const Vec fh = g.pseudogradient(half);
    const double move = (half - x).norm();
    if (eta * (fh - fx).norm() > 0.5 * move + 1e-300 && move > 0.0) {
      eta *= 0.5;
      continue;
    }
    x = g.project_strategy(x - eta * fh);
    double res = natural_residual(g, x);
    if (can_polish && (it + 1) % 200 == 0) {
      if (auto cand = active_set_polish(g, x)) {
        const double cres = natural_residual(g, *cand);
        if (cres < res) {
          x = *cand;
          res = cres;
        }
      }
    }
    if (res < best_res) {
      best_res = res;
      best = x;
    }
  }
  sol.x = best;
  sol.residual = best_res;
  sol.converged = best_res <= options.tol;
  sol.iterations = it;
  sol.step = eta;
  if (g.affine && psd_symmetric_part(g.affine->m)) {
    sol.merit = merit_err(g, best, MeritMethod::kExactQuadratic).value;
  }
  return sol;
}

RateFit rate_fit(const std::vector<double>& k, const std::vector<double>& metric,
                 double window) {
  require(k.size() == metric.size(), "rate fit: series lengths differ");
  require(window > 0.0 && window <= 1.0, "rate fit: window must lie in (0, 1]");
  const std::size_t n = k.size();
  const auto take = static_cast<std::size_t>(std::ceil(window * n));
  require(take >= 50, "rate fit: need at least 50 points in the window");
  const std::size_t first = n - take;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = first; i < n; ++i) {
    if (!(metric[i] > 0.0) || !(k[i] > 0.0)) {
      throw Error("rate fit: nonpositive value in window");
    }
    const double lx = std::log(k[i]);
    const double ly = std::log(metric[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    syy += ly * ly;
  }
  const double m = static_cast<double>(take);
  const double cxx = sxx - sx * sx / m;
  const double cxy = sxy - sx * sy / m;
  const double cyy = syy - sy * sy / m;
  require(cxx > 0.0, "rate fit: window has no spread in k");
  RateFit fit;
  fit.k0 = static_cast<long long>(k[first]);
  fit.k1 = static_cast<long long>(k[n - 1]);
  fit.points = static_cast<int>(take);
  fit.slope = cxy / cxx;
  fit.intercept = (sy - fit.slope * sx) / m;
  fit.r_squared = cyy > 0.0 ? (cxy * cxy) / (cxx * cyy) : 1.0;
  return fit;
}

RecurrenceCheck recurrence_bound_check(double c, double d, double s, double t,
                                       double a0, long long horizon,
                                       bool keep_trace) {
  require(0.0 < s && s < t && t < 1.0, "recurrence needs 0 < s < t < 1");
  require(s + t > 1.0, "recurrence needs s + t > 1");
  require(c > 0.0 && d >= 0.0 && a0 >= 0.0,
          "recurrence needs c > 0 and nonnegative d, a0");
  require(horizon >= 1, "horizon must be positive");

  RecurrenceCheck out;
  long long big_k = 1;
  for (;; ++big_k) {
    const double v = c * std::pow(static_cast<double>(big_k), 1.0 - s);
    if (static_cast<double>(big_k) > v && v >= 1.0) break;
    if (big_k > horizon) throw Error("recurrence index K exceeds the horizon");
  }
  const double p = t + s - 1.0;
  out.big_k = big_k;
  out.c_tilde = std::floor(c * std::pow(static_cast<double>(big_k), 1.0 - s));
  out.c_star = d / (out.c_tilde - p);

  double a = a0;
  if (keep_trace) out.trace.reserve(horizon);
  out.passed = true;
  for (long long k = 1; k <= horizon; ++k) {
    const double kd = static_cast<double>(k);
    if (keep_trace) out.trace.push_back(a);
    if (k == big_k) {
      const double a_tilde = a - out.c_star / std::pow(kd, p);
      out.d_star = std::max(0.0, kd * (kd - 1.0) * a_tilde / (kd - out.c_tilde));
    }
    if (k >= big_k) {
      const double bound = out.c_star / std::pow(kd, p) + out.d_star / kd;
      if (bound > 0.0) out.worst_ratio = std::max(out.worst_ratio, a / bound);
      if (a > bound * (1.0 + 1e-12) + 1e-300) {
        if (out.first_failure == 0) out.first_failure = k;
        out.passed = false;
      }
    }
    a = (1.0 - c / std::pow(kd, s)) * a + d / std::pow(kd, t + s);
  }
  return out;
}

}  // namespace zolearn
