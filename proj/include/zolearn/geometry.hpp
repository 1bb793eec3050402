#pragma once

#include <optional>
#include <string>

#include "zolearn/common.hpp"

namespace zolearn {

enum class SetKind { kBox, kSimplex, kPolytope };

std::string to_string(SetKind kind);

// Closed ball B(center, radius); used for feasibility-adjusted perturbations.
struct InteriorBall {
  Vec center;
  double radius = 0.0;
};

// A nonempty compact convex set: a box, the probability simplex, or a finite
// box intersected with half-spaces a_j . x <= b_j.
//
// Polytopes are checked at construction: a feasible point is found by
// projection and a Chebyshev (largest inscribed) ball is computed by a small
// dense LP. A polytope whose inscribed radius is not positive is rejected.
class FeasibleSet {
 public:
  static FeasibleSet box(Vec lower, Vec upper);
  static FeasibleSet simplex(int dim);
  static FeasibleSet polytope(Vec lower, Vec upper, Mat a, Vec b);

  SetKind kind() const { return kind_; }
  int dim() const { return dim_; }
  // Coordinate bounds; for the simplex these are [0, 1].
  const Vec& lower() const { return lower_; }
  const Vec& upper() const { return upper_; }
  // Half-space rows (polytope only; empty otherwise).
  const Mat& a() const { return a_; }
  const Vec& b() const { return b_; }

  bool contains(const Vec& x, double tol = 1e-9) const;

  // Largest inscribed ball. Throws for the simplex, which has no
  // full-dimensional interior.
  const InteriorBall& chebyshev_ball() const;

  // Analytic slack check: a_j . p + r ||a_j|| <= b_j and p +- r within bounds.
  bool contains_ball(const InteriorBall& ball, double tol = 1e-12) const;

  // Bounding box of the set widened on each side by `fraction` of the
  // coordinate range.
  FeasibleSet enlarged_box(double fraction) const;

  bool operator==(const FeasibleSet& other) const;

 private:
  FeasibleSet() = default;

  SetKind kind_ = SetKind::kBox;
  int dim_ = 0;
  Vec lower_;
  Vec upper_;
  Mat a_;
  Vec b_;
  std::optional<InteriorBall> chebyshev_;
};

struct DykstraOptions {
  double tolerance = 1e-10;
  int max_sweeps = 10000;
};

// Euclidean projection onto the set. Boxes clamp, the simplex uses the
// sort-based closed form, polytopes run Dykstra's alternating projections
// over {box, each half-space}.
Vec project(const FeasibleSet& set, const Vec& x,
            const DykstraOptions& options = {});

enum class DgfKind { kEuclidean, kNegEntropy };

std::string to_string(DgfKind kind);
DgfKind parse_dgf_kind(const std::string& name);

// Distance-generating function.
//   euclidean:  psi(x) = 1/2 ||x||_2^2, norm pair (l2, l2), mu = L = 1.
//   negentropy: psi(x) = sum x_i ln x_i (0 ln 0 = 0) on the positive orthant,
//               norm pair (l1, l_inf), mu = 1 on the simplex, not smooth.
class Dgf {
 public:
  static Dgf euclidean() { return Dgf(DgfKind::kEuclidean); }
  static Dgf negentropy() { return Dgf(DgfKind::kNegEntropy); }

  DgfKind kind() const { return kind_; }
  double strong_convexity() const { return 1.0; }
  // nullopt means the DGF is not globally smooth.
  std::optional<double> smoothness() const;

  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  bool in_domain(const Vec& x) const;

  double primal_norm(const Vec& v) const;
  double dual_norm(const Vec& v) const;

  bool operator==(const Dgf&) const = default;

 private:
  explicit Dgf(DgfKind kind) : kind_(kind) {}
  DgfKind kind_;
};

// Iterates closer to zero than this are clipped before taking logarithms.
inline constexpr double kEntropyFloor = 1e-300;

// argmin_{x' in set} <y, x - x'> + D(x', x).
Vec prox_map(const Dgf& dgf, const FeasibleSet& set, const Vec& x,
             const Vec& y);

// Solution of grad psi(x+) = grad psi(x) + y over the whole space.
Vec unconstrained_mirror_step(const Dgf& dgf, const Vec& x, const Vec& y);

// D(p, x) = psi(p) - psi(x) - <grad psi(x), p - x>.
double bregman_div(const Dgf& dgf, const Vec& p, const Vec& x);

}  // namespace zolearn
