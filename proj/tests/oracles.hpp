// Independent reference computations used by the tests. Nothing here calls
// into the library's solvers.
#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Euclidean projection onto {lower <= v <= upper, a v <= b} by enumerating
// active sets and keeping the closest KKT point. Exponential; dim <= 5.
inline Vec project_enumeration(const Vec& lower, const Vec& upper, const Mat& a,
                               const Vec& b, const Vec& x) {
  const int n = static_cast<int>(x.size());
  const int m = static_cast<int>(a.rows());
  Mat rows(2 * n + m, n);
  Vec rhs(2 * n + m);
  rows.setZero();
  for (int j = 0; j < n; ++j) {
    rows(j, j) = -1.0;
    rhs[j] = -lower[j];
    rows(n + j, j) = 1.0;
    rhs[n + j] = upper[j];
  }
  if (m > 0) {
    rows.bottomRows(m) = a;
    rhs.tail(m) = b;
  }
  const int total = 2 * n + m;
  auto feasible = [&](const Vec& v) {
    return ((rows * v - rhs).array() <= 1e-9).all();
  };
  Vec best;
  double best_dist = std::numeric_limits<double>::infinity();
  std::vector<int> subset;
  std::function<void(int)> visit = [&](int start) {
    // Evaluate the current subset.
    Vec v = x;
    bool ok = true;
    if (!subset.empty()) {
      const int k = static_cast<int>(subset.size());
      Mat as(k, n);
      Vec bs(k);
      for (int i = 0; i < k; ++i) {
        as.row(i) = rows.row(subset[i]);
        bs[i] = rhs[subset[i]];
      }
      const Mat gram = as * as.transpose();
      Eigen::FullPivLU<Mat> lu(gram);
      if (lu.rank() < k) {
        ok = false;
      } else {
        const Vec lambda = lu.solve(as * x - bs);
        if ((lambda.array() < -1e-12).any()) ok = false;
        v = x - as.transpose() * lambda;
      }
    }
    if (ok && feasible(v)) {
      const double d = (v - x).norm();
      if (d < best_dist) {
        best_dist = d;
        best = v;
      }
    }
    if (static_cast<int>(subset.size()) == n) return;
    for (int i = start; i < total; ++i) {
      subset.push_back(i);
      visit(i + 1);
      subset.pop_back();
    }
  };
  visit(0);
  return best;
}

// Minimizes f over a fine grid of the 2-simplex {(t, 1-t)}.
inline Vec grid_argmin_simplex2(const std::function<double(const Vec&)>& f,
                                int cells = 200000) {
  Vec best(2);
  double best_val = std::numeric_limits<double>::infinity();
  for (int i = 1; i < cells; ++i) {
    Vec v(2);
    v << static_cast<double>(i) / cells, 1.0 - static_cast<double>(i) / cells;
    const double val = f(v);
    if (val < best_val) {
      best_val = val;
      best = v;
    }
  }
  return best;
}

// Maximizes f over a uniform grid on [lo, hi].
inline double grid_max_1d(const std::function<double(double)>& f, double lo,
                          double hi, int cells = 1000000) {
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= cells; ++i) {
    best = std::max(best, f(lo + (hi - lo) * i / cells));
  }
  return best;
}

// Central-difference gradient.
inline Vec gradient(const std::function<double(const Vec&)>& f, const Vec& x,
                    double h = 1e-6) {
  Vec g(x.size());
  for (int j = 0; j < x.size(); ++j) {
    Vec p = x, m = x;
    p[j] += h;
    m[j] -= h;
    g[j] = (f(p) - f(m)) / (2.0 * h);
  }
  return g;
}

inline double relative_error(const Vec& a, const Vec& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

// Ordinary least-squares slope of y on x.
inline double ols_slope(const std::vector<double>& x,
                        const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (sxy - sx * sy / n) / (sxx - sx * sx / n);
}

}  // namespace oracle
