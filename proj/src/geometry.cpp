#include "zolearn/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace zolearn {

namespace {

// Dense tableau simplex for: maximize c.z  s.t.  A z <= rhs, z >= 0, with
// rhs >= 0 so the origin is a feasible starting vertex. Bland's rule.
Vec maximize_from_origin(const Mat& a, const Vec& rhs, const Vec& c) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  Mat tab = Mat::Zero(m + 1, n + m + 1);
  tab.topLeftCorner(m, n) = a;
  tab.block(0, n, m, m).setIdentity();
  tab.col(n + m).head(m) = rhs;
  tab.row(m).head(n) = -c.transpose();
  std::vector<int> basis(m);
  std::iota(basis.begin(), basis.end(), n);

  constexpr double kEps = 1e-12;
  const int max_pivots = 50 * (n + m) + 1000;
  for (int pivot = 0; pivot < max_pivots; ++pivot) {
    int enter = -1;
    for (int j = 0; j < n + m; ++j) {
      if (tab(m, j) < -kEps) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;
    int leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      if (tab(i, enter) > kEps) {
        const double ratio = tab(i, n + m) / tab(i, enter);
        if (ratio < best - kEps ||
            (ratio <= best + kEps && leave >= 0 && basis[i] < basis[leave])) {
          best = ratio;
          leave = i;
        }
      }
    }
    if (leave < 0) throw NumericError("chebyshev LP is unbounded");
    tab.row(leave) /= tab(leave, enter);
    for (int i = 0; i <= m; ++i) {
      if (i != leave && tab(i, enter) != 0.0) {
        tab.row(i) -= tab(i, enter) * tab.row(leave);
      }
    }
    basis[leave] = enter;
  }
  Vec z = Vec::Zero(n);
  for (int i = 0; i < m; ++i) {
    if (basis[i] < n) z[basis[i]] = tab(i, n + m);
  }
  return z;
}

Vec project_simplex(const Vec& x) {
  Vec sorted = x;
  std::sort(sorted.data(), sorted.data() + sorted.size(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (int i = 0; i < sorted.size(); ++i) {
    cumsum += sorted[i];
    const double candidate = (cumsum - 1.0) / (i + 1);
    if (sorted[i] - candidate > 0.0) theta = candidate;
  }
  return (x.array() - theta).max(0.0).matrix();
}

Vec project_dykstra(const FeasibleSet& set, const Vec& x0,
                    const DykstraOptions& options) {
  const int m = static_cast<int>(set.a().rows());
  const Vec row_norm_sq = set.a().rowwise().squaredNorm();
  Vec x = x0;
  Vec box_increment = Vec::Zero(x.size());
  Mat increments = Mat::Zero(x.size(), m);
  Vec y(x.size());
  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    const Vec before = x;
    const Vec box_before = box_increment;
    const Mat increments_before = increments;
    y = x + box_increment;
    x = y.cwiseMax(set.lower()).cwiseMin(set.upper());
    box_increment = y - x;
    for (int j = 0; j < m; ++j) {
      y = x + increments.col(j);
      const double excess = set.a().row(j).dot(y) - set.b()[j];
      if (excess > 0.0) {
        x = y - (excess / row_norm_sq[j]) * set.a().row(j).transpose();
      } else {
        x = y;
      }
      increments.col(j) = y - x;
    }
    // x alone can stall while mass moves between the increments.
    const double change = (x - before).squaredNorm() +
                          (box_increment - box_before).squaredNorm() +
                          (increments - increments_before).squaredNorm();
    if (change < options.tolerance * options.tolerance) break;
  }
  return x;
}

}  // namespace

std::string to_string(SetKind kind) {
  switch (kind) {
    case SetKind::kBox: return "box";
    case SetKind::kSimplex: return "simplex";
    case SetKind::kPolytope: return "polytope";
  }
  return "unknown";
}

FeasibleSet FeasibleSet::box(Vec lower, Vec upper) {
  require(lower.size() > 0, "box dimension must be positive");
  require(lower.size() == upper.size(), "box bounds have mismatched sizes");
  require(lower.allFinite() && upper.allFinite(), "box bounds must be finite");
  require((lower.array() < upper.array()).all(),
          "box lower bounds must be strictly below upper bounds");
  FeasibleSet set;
  set.kind_ = SetKind::kBox;
  set.dim_ = static_cast<int>(lower.size());
  set.chebyshev_ = InteriorBall{0.5 * (lower + upper),
                                0.5 * (upper - lower).minCoeff()};
  set.lower_ = std::move(lower);
  set.upper_ = std::move(upper);
  set.a_ = Mat(0, set.dim_);
  set.b_ = Vec(0);
  return set;
}

FeasibleSet FeasibleSet::simplex(int dim) {
  require(dim > 0, "simplex dimension must be positive");
  FeasibleSet set;
  set.kind_ = SetKind::kSimplex;
  set.dim_ = dim;
  set.lower_ = Vec::Zero(dim);
  set.upper_ = Vec::Ones(dim);
  set.a_ = Mat(0, dim);
  set.b_ = Vec(0);
  return set;
}

FeasibleSet FeasibleSet::polytope(Vec lower, Vec upper, Mat a, Vec b) {
  FeasibleSet set = box(std::move(lower), std::move(upper));
  require(a.cols() == set.dim_, "constraint matrix has wrong column count");
  require(a.rows() == b.size(), "constraint rows and bounds differ in count");
  require(a.allFinite() && b.allFinite(), "constraints must be finite");
  for (int j = 0; j < a.rows(); ++j) {
    require(a.row(j).norm() > 0.0, "constraint row " + std::to_string(j) +
                                       " is zero");
  }
  set.kind_ = SetKind::kPolytope;
  set.a_ = std::move(a);
  set.b_ = std::move(b);

  const Vec start = project(set, set.chebyshev_->center);
  if (!set.contains(start, 1e-7)) {
    throw Error("polytope is empty: no point satisfies all constraints");
  }

  // Chebyshev centre relative to the feasible start: p = start + w+ - w-.
  const int n = set.dim_;
  const int m = static_cast<int>(set.a_.rows());
  Mat lp = Mat::Zero(2 * n + m, 2 * n + 1);
  Vec rhs(2 * n + m);
  for (int k = 0; k < n; ++k) {
    lp(k, k) = 1.0;
    lp(k, n + k) = -1.0;
    lp(k, 2 * n) = 1.0;
    rhs[k] = set.upper_[k] - start[k];
    lp(n + k, k) = -1.0;
    lp(n + k, n + k) = 1.0;
    lp(n + k, 2 * n) = 1.0;
    rhs[n + k] = start[k] - set.lower_[k];
  }
  for (int j = 0; j < m; ++j) {
    lp.block(2 * n + j, 0, 1, n) = set.a_.row(j);
    lp.block(2 * n + j, n, 1, n) = -set.a_.row(j);
    lp(2 * n + j, 2 * n) = set.a_.row(j).norm();
    rhs[2 * n + j] = set.b_[j] - set.a_.row(j).dot(start);
  }
  rhs = rhs.cwiseMax(0.0);
  Vec objective = Vec::Zero(2 * n + 1);
  objective[2 * n] = 1.0;
  const Vec z = maximize_from_origin(lp, rhs, objective);
  const double radius = z[2 * n];
  if (!(radius > 1e-9)) {
    throw Error("polytope has an empty interior");
  }
  set.chebyshev_ =
      InteriorBall{start + z.head(n) - z.segment(n, n), radius * (1.0 - 1e-9)};
  return set;
}

bool FeasibleSet::contains(const Vec& x, double tol) const {
  if (x.size() != dim_ || !x.allFinite()) return false;
  if (kind_ == SetKind::kSimplex) {
    return (x.array() >= -tol).all() && std::abs(x.sum() - 1.0) <= tol;
  }
  if ((x.array() < lower_.array() - tol).any()) return false;
  if ((x.array() > upper_.array() + tol).any()) return false;
  if (a_.rows() > 0 && ((a_ * x - b_).array() > tol).any()) return false;
  return true;
}

const InteriorBall& FeasibleSet::chebyshev_ball() const {
  if (!chebyshev_) {
    throw Error("the simplex has no full-dimensional interior ball");
  }
  return *chebyshev_;
}

bool FeasibleSet::contains_ball(const InteriorBall& ball, double tol) const {
  if (kind_ == SetKind::kSimplex) return false;
  if (ball.center.size() != dim_ || !(ball.radius > 0.0)) return false;
  if ((ball.center.array() - ball.radius < lower_.array() - tol).any()) {
    return false;
  }
  if ((ball.center.array() + ball.radius > upper_.array() + tol).any()) {
    return false;
  }
  for (int j = 0; j < a_.rows(); ++j) {
    if (a_.row(j).dot(ball.center) + ball.radius * a_.row(j).norm() >
        b_[j] + tol) {
      return false;
    }
  }
  return true;
}

FeasibleSet FeasibleSet::enlarged_box(double fraction) const {
  require(fraction >= 0.0, "enlargement fraction must be nonnegative");
  const Vec margin = fraction * (upper_ - lower_);
  return box(lower_ - margin, upper_ + margin);
}

bool FeasibleSet::operator==(const FeasibleSet& other) const {
  return kind_ == other.kind_ && dim_ == other.dim_ &&
         lower_ == other.lower_ && upper_ == other.upper_ &&
         a_ == other.a_ && b_ == other.b_;
}

Vec project(const FeasibleSet& set, const Vec& x,
            const DykstraOptions& options) {
  if (x.size() != set.dim()) {
    throw Error("projection: point has dimension " + std::to_string(x.size()) +
                ", set has " + std::to_string(set.dim()));
  }
  require(x.allFinite(), "projection: point must be finite");
  switch (set.kind()) {
    case SetKind::kBox:
      return x.cwiseMax(set.lower()).cwiseMin(set.upper());
    case SetKind::kSimplex:
      return project_simplex(x);
    case SetKind::kPolytope:
      if (set.contains(x, 0.0)) return x;
      return project_dykstra(set, x, options);
  }
  return x;
}

std::string to_string(DgfKind kind) {
  return kind == DgfKind::kEuclidean ? "euclidean" : "negentropy";
}

DgfKind parse_dgf_kind(const std::string& name) {
  if (name == "euclidean") return DgfKind::kEuclidean;
  if (name == "negentropy") return DgfKind::kNegEntropy;
  throw Error("unknown dgf kind '" + name + "'");
}

std::optional<double> Dgf::smoothness() const {
  if (kind_ == DgfKind::kEuclidean) return 1.0;
  return std::nullopt;
}

bool Dgf::in_domain(const Vec& x) const {
  if (!x.allFinite()) return false;
  return kind_ == DgfKind::kEuclidean || (x.array() > 0.0).all();
}

double Dgf::value(const Vec& x) const {
  if (kind_ == DgfKind::kEuclidean) return 0.5 * x.squaredNorm();
  double total = 0.0;
  for (double xi : x) {
    require(xi >= 0.0, "negentropy is undefined for negative coordinates");
    if (xi > 0.0) total += xi * std::log(std::max(xi, kEntropyFloor));
  }
  return total;
}

Vec Dgf::gradient(const Vec& x) const {
  if (kind_ == DgfKind::kEuclidean) return x;
  require(in_domain(x), "negentropy gradient needs strictly positive point");
  return (x.array().max(kEntropyFloor).log() + 1.0).matrix();
}

double Dgf::primal_norm(const Vec& v) const {
  return kind_ == DgfKind::kEuclidean ? v.norm() : v.lpNorm<1>();
}

double Dgf::dual_norm(const Vec& v) const {
  return kind_ == DgfKind::kEuclidean ? v.norm() : v.lpNorm<Eigen::Infinity>();
}

Vec prox_map(const Dgf& dgf, const FeasibleSet& set, const Vec& x,
             const Vec& y) {
  require(x.size() == set.dim() && y.size() == set.dim(),
          "prox_map: dimension mismatch");
  if (!y.allFinite()) throw NumericError("prox_map: dual vector is not finite");
  if (!dgf.in_domain(x)) throw Error("prox_map: base point outside dom psi");
  if (dgf.kind() == DgfKind::kEuclidean) return project(set, x + y);

  switch (set.kind()) {
    case SetKind::kSimplex: {
      const Vec logits =
          (x.array().max(kEntropyFloor).log() + y.array()).matrix();
      const Vec weights = (logits.array() - logits.maxCoeff()).exp().matrix();
      return (weights / weights.sum()).cwiseMax(kEntropyFloor);
    }
    case SetKind::kBox: {
      require((set.lower().array() >= 0.0).all(),
              "negentropy prox needs a box inside the nonnegative orthant");
      const Vec step = unconstrained_mirror_step(dgf, x, y);
      return step.cwiseMax(set.lower()).cwiseMin(set.upper()).cwiseMax(
          kEntropyFloor);
    }
    case SetKind::kPolytope:
      break;
  }
  throw Error("negentropy prox-mapping is only available on boxes and the simplex");
}

Vec unconstrained_mirror_step(const Dgf& dgf, const Vec& x, const Vec& y) {
  require(x.size() == y.size(), "mirror step: dimension mismatch");
  if (!y.allFinite()) throw NumericError("mirror step: dual vector is not finite");
  if (!dgf.in_domain(x)) throw Error("mirror step: point outside dom psi");
  if (dgf.kind() == DgfKind::kEuclidean) return x + y;
  const Vec out = (x.array() * y.array().exp()).matrix();
  if (!out.allFinite()) throw NumericError("mirror step: exp overflow");
  if ((out.array() <= 0.0).any()) {
    throw NumericError("mirror step: result left dom psi");
  }
  return out;
}

double bregman_div(const Dgf& dgf, const Vec& p, const Vec& x) {
  require(p.size() == x.size(), "bregman_div: dimension mismatch");
  if (dgf.kind() == DgfKind::kEuclidean) return 0.5 * (p - x).squaredNorm();
  if (!(x.array() > 0.0).all()) {
    throw Error("bregman_div: x on the boundary of dom psi");
  }
  double total = 0.0;
  for (int i = 0; i < p.size(); ++i) {
    require(p[i] >= 0.0, "bregman_div: p outside closure of dom psi");
    const double xi = std::max(x[i], kEntropyFloor);
    if (p[i] > 0.0) total += p[i] * std::log(p[i] / xi);
    total += xi - p[i];
  }
  return std::max(total, 0.0);
}

}  // namespace zolearn
