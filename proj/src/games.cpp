#include "zolearn/games.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include <Eigen/Eigenvalues>

namespace zolearn {

namespace {

double min_sym_eigenvalue(const Mat& m) {
  const Mat sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

std::vector<InteriorBall> chebyshev_balls(const std::vector<FeasibleSet>& sets) {
  std::vector<InteriorBall> balls;
  for (const auto& s : sets) balls.push_back(s.chebyshev_ball());
  return balls;
}

std::vector<FeasibleSet> enlarged(const std::vector<FeasibleSet>& sets,
                                  double margin) {
  std::vector<FeasibleSet> out;
  for (const auto& s : sets) out.push_back(s.enlarged_box(margin));
  return out;
}

// Numerically stable (1/c) log sum exp(c v).
double soft_max(const Vec& v, double c) {
  const double top = v.maxCoeff();
  return top + std::log((c * (v.array() - top)).exp().sum()) / c;
}

Vec soft_argmax(const Vec& v, double c) {
  const double top = v.maxCoeff();
  Vec w = (c * (v.array() - top)).exp();
  return w / w.sum();
}

}  // namespace

Game make_quadratic_game(const Mat& m, const Vec& q, const BlockLayout& layout,
                         std::vector<FeasibleSet> sets) {
  const int d = layout.total();
  require(m.rows() == d && m.cols() == d, "M must be square of total dimension");
  require(q.size() == d, "q has wrong dimension");
  require(static_cast<int>(sets.size()) == layout.players(),
          "one feasible set per player required");
  for (int i = 0; i < layout.players(); ++i) {
    const auto blk = m.block(layout.offset(i), layout.offset(i), layout.dim(i),
                             layout.dim(i));
    require((blk - blk.transpose()).cwiseAbs().maxCoeff() <= 1e-12,
            "diagonal block " + std::to_string(i) + " of M must be symmetric");
  }

  auto field = std::make_shared<const AffineField>(AffineField{m, q});
  Game g;
  g.name = "quadratic";
  g.layout = layout;
  g.action_sets = enlarged(sets, kActionMargin);
  g.balls = chebyshev_balls(sets);
  g.sets = std::move(sets);
  g.affine = *field;
  g.payoffs = [field, layout](const Vec& x) {
    std::vector<double> out(layout.players());
    for (int i = 0; i < layout.players(); ++i) {
      const int o = layout.offset(i);
      const int n = layout.dim(i);
      const Vec xi = x.segment(o, n);
      const Vec diag = field->m.block(o, o, n, n) * xi;
      const Vec cross = field->m.middleRows(o, n) * x - diag;
      out[i] = 0.5 * xi.dot(diag) + xi.dot(cross + field->q.segment(o, n));
    }
    return out;
  };
  g.pseudogradient = [field](const Vec& x) -> Vec {
    return field->m * x + field->q;
  };
  if ((m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12) {
    g.potential = [field](const Vec& x) {
      return 0.5 * x.dot(field->m * x) + field->q.dot(x);
    };
  }

  const double mu = min_sym_eigenvalue(m);
  if (mu > 1e-12) {
    g.declared_class = GameClass::kStronglyMonotone;
    g.modulus = mu;
  } else if (mu > -1e-12) {
    g.declared_class = GameClass::kMonotone;
  }

  Eigen::FullPivLU<Mat> lu(m);
  if (lu.isInvertible()) {
    const Vec x = lu.solve(-q);
    if (g.in_strategy_space(x, 0.0)) g.critical_point = x;
  }
  g.check();
  return g;
}

Game make_random_quadratic_game(const RandomQuadraticSpec& spec, Stream stream) {
  require(spec.players >= 1 && spec.dim >= 1, "bad quadratic game shape");
  require(spec.target_half_width < spec.box, "x* range must fit in the box");
  const BlockLayout layout(std::vector<int>(spec.players, spec.dim));
  const int d = layout.total();
  Stream s = stream.split("quadratic");
  Mat b(d, d), k(d, d);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) b(i, j) = s.normal() / std::sqrt(d);
  }
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) k(i, j) = s.normal() / std::sqrt(d);
  }
  k = (k - k.transpose()).eval();
  Mat m = spec.strong_monotonicity * Mat::Identity(d, d) +
          0.5 * b.transpose() * b + 0.5 * k;
  for (int i = 0; i < spec.players; ++i) {
    auto blk = m.block(layout.offset(i), layout.offset(i), spec.dim, spec.dim);
    const Mat sym = 0.5 * (blk + blk.transpose());
    blk = sym;
  }
  const Vec target =
      s.uniform_vector(d, -spec.target_half_width, spec.target_half_width);
  const Vec q = -m * target;
  std::vector<FeasibleSet> sets(
      spec.players, FeasibleSet::box(Vec::Constant(spec.dim, -spec.box),
                                     Vec::Constant(spec.dim, spec.box)));
  Game g = make_quadratic_game(m, q, layout, std::move(sets));
  g.name = "random-quadratic";
  g.critical_point = target;
  return g;
}

Game make_portfolio_game(const Vec& mu, const Mat& sigma, double r) {
  const int assets = static_cast<int>(mu.size());
  require(assets >= 2, "portfolio needs at least two assets");
  require(sigma.rows() == assets && sigma.cols() == assets,
          "covariance has wrong shape");
  require((sigma - sigma.transpose()).cwiseAbs().maxCoeff() <= 1e-12,
          "covariance must be symmetric");
  Eigen::LLT<Mat> llt(sigma);
  require(llt.info() == Eigen::Success, "covariance must be positive definite");
  require(r <= mu.maxCoeff(), "target return exceeds every asset mean");

  const int n = assets - 1;
  Mat a(2, n);
  a.row(0).setOnes();
  for (int j = 0; j < n; ++j) a(1, j) = mu[n] - mu[j];
  Vec bvec(2);
  bvec << 1.0, mu[n] - r;
  FeasibleSet set =
      FeasibleSet::polytope(Vec::Zero(n), Vec::Ones(n), std::move(a), bvec);

  // phi(x) = E x + e_N.
  Mat e = Mat::Zero(assets, n);
  e.topRows(n).setIdentity();
  e.row(n).setConstant(-1.0);
  struct Data {
    Vec mu;
    Mat sigma;
    double r;
    Mat e;
  };
  auto data = std::make_shared<const Data>(Data{mu, sigma, r, e});
  auto phi = [data](const Vec& x) {
    Vec p = data->e * x;
    p[p.size() - 1] += 1.0;
    return p;
  };
  auto objective = [data, phi](const Vec& x) {
    const Vec p = phi(x);
    return (data->r - data->mu.dot(p)) / std::sqrt(p.dot(data->sigma * p));
  };

  Game g;
  g.name = "portfolio";
  g.layout = BlockLayout({n});
  g.sets = {set};
  g.action_sets = {set};
  g.balls = {set.chebyshev_ball()};
  g.payoffs = [objective](const Vec& x) {
    return std::vector<double>{objective(x)};
  };
  g.pseudogradient = [data, phi](const Vec& x) -> Vec {
    const Vec p = phi(x);
    const double num = data->r - data->mu.dot(p);
    const double den = std::sqrt(p.dot(data->sigma * p));
    const Vec grad_num = -data->e.transpose() * data->mu;
    const Vec grad_den = data->e.transpose() * (data->sigma * p) / den;
    return (grad_num * den - num * grad_den) / (den * den);
  };
  g.potential = objective;
  g.declared_class = GameClass::kPseudoMonotone;
  g.check();
  return g;
}

Game make_random_portfolio_game(int assets, Stream stream) {
  require(assets >= 2, "portfolio needs at least two assets");
  Stream s = stream.split("portfolio");
  const Vec mu = s.uniform_vector(assets, 0.02, 0.2);
  Mat f(assets, assets);
  for (int j = 0; j < assets; ++j) {
    for (int i = 0; i < assets; ++i) f(i, j) = s.normal();
  }
  Mat sigma = 0.01 * (f * f.transpose() / assets +
                      0.1 * Mat::Identity(assets, assets));
  sigma = (0.5 * (sigma + sigma.transpose())).eval();
  return make_portfolio_game(mu, sigma, mu.mean());
}

Mat lse_design(const LseData& data) {
  const int samples = static_cast<int>(data.inputs.size());
  Mat z(data.features + 1, samples);
  for (int j = 0; j < samples; ++j) {
    double power = 1.0;
    for (int m = 0; m <= data.features; ++m) {
      z(m, j) = power;
      power *= data.inputs[j];
    }
  }
  return z;
}

Game make_lse_game(const LseData& data) {
  require(data.features >= 1, "feature count must be positive");
  require(data.inputs.size() == data.labels.size() && data.inputs.size() >= 1,
          "inputs and labels must be nonempty and equally long");
  require(data.w_bound > 0.0 && data.lambda_bound > 0.0,
          "box bounds must be positive");
  const Mat z = lse_design(data);
  const int nw = data.features + 1;
  const int nl = static_cast<int>(data.labels.size());
  const BlockLayout layout({nw, nl});

  Mat m = Mat::Zero(nw + nl, nw + nl);
  m.topRightCorner(nw, nl) = z;
  m.bottomLeftCorner(nl, nw) = -z.transpose();
  m.bottomRightCorner(nl, nl).setIdentity();
  Vec q = Vec::Zero(nw + nl);
  q.tail(nl) = data.labels;

  std::vector<FeasibleSet> sets = {
      FeasibleSet::box(Vec::Constant(nw, -data.w_bound),
                       Vec::Constant(nw, data.w_bound)),
      FeasibleSet::box(Vec::Constant(nl, -data.lambda_bound),
                       Vec::Constant(nl, data.lambda_bound))};

  auto zp = std::make_shared<const Mat>(z);
  auto yp = std::make_shared<const Vec>(data.labels);
  auto value = [zp, yp, nw, nl](const Vec& x) {
    const Vec w = x.head(nw);
    const Vec lambda = x.tail(nl);
    return lambda.dot(zp->transpose() * w - *yp) - 0.5 * lambda.squaredNorm();
  };

  Game g;
  g.name = "lse";
  g.layout = layout;
  g.action_sets = enlarged(sets, kActionMargin);
  g.balls = chebyshev_balls(sets);
  g.sets = std::move(sets);
  g.affine = AffineField{m, q};
  g.payoffs = [value](const Vec& x) {
    const double j = value(x);
    return std::vector<double>{j, -j};
  };
  auto field = std::make_shared<const AffineField>(*g.affine);
  g.pseudogradient = [field](const Vec& x) -> Vec {
    return field->m * x + field->q;
  };
  g.declared_class = GameClass::kMonotone;

  Eigen::FullPivLU<Mat> lu(m);
  if (lu.isInvertible()) {
    const Vec x = lu.solve(-q);
    if (g.in_strategy_space(x, 0.0)) g.critical_point = x;
  }
  g.check();
  return g;
}

LseData sample_lse_data(int features, int samples, Stream stream) {
  require(features >= 1 && samples >= features + 1,
          "need at least features + 1 samples");
  for (std::uint64_t attempt = 0; attempt < 10000; ++attempt) {
    Stream s = stream.split("lse").split(attempt);
    LseData data;
    data.features = features;
    data.inputs = s.uniform_vector(samples, -1.5, 1.5);
    const Vec coef = s.uniform_vector(features + 1, -1.0, 1.0);
    const Vec noise = s.uniform_vector(samples, -2.0, 2.0);
    data.labels = lse_design(data).transpose() * coef + noise;
    const Game g = make_lse_game(data);
    if (g.critical_point &&
        g.in_strategy_space(*g.critical_point, -1e-6 * data.w_bound)) {
      return data;
    }
  }
  throw NumericError("could not draw LSE data with an interior critical point");
}

void ThermalParams::check() const {
  require(horizon >= 1 && buildings >= 1, "thermal game needs T, N >= 1");
  const auto n = static_cast<std::size_t>(buildings);
  require(a.size() == n && b.size() == n && c.size() == n && r0.size() == n &&
              comfort_lower.size() == n && comfort_upper.size() == n &&
              capacity.size() == n && weights.size() == n,
          "thermal per-building parameters must have one entry per building");
  require(energy_price.size() == horizon, "energy price must have length T");
  require(demand_rate >= 0.0, "demand rate must be nonnegative");
  require(smoothing > 0.0, "smoothing constant must be positive");
  for (std::size_t i = 0; i < n; ++i) {
    require(a[i] > 0.0 && a[i] < 1.0, "LTI coefficient a must lie in (0, 1)");
    require(b[i] != 0.0 && c[i] != 0.0, "LTI coefficients b, c must be nonzero");
    require(capacity[i] > 0.0, "capacity must be positive");
    require(comfort_lower[i].size() == horizon &&
                comfort_upper[i].size() == horizon,
            "comfort band must have length T");
    require(weights[i].size() == horizon && weights[i].minCoeff() > 0.0,
            "quadratic weights must be positive with length T");
  }
  for (const auto& clique : cliques) {
    require(!clique.empty(), "empty clique");
    for (int l : clique) {
      require(l >= 0 && l < buildings, "clique member out of range");
    }
    std::vector<int> sorted = clique;
    std::sort(sorted.begin(), sorted.end());
    require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(),
            "clique has repeated members");
  }
}

ThermalParams default_thermal_params(int buildings, int horizon, Stream stream) {
  require(buildings >= 1 && horizon >= 1, "thermal game needs T, N >= 1");
  Stream s = stream.split("thermal");
  ThermalParams p;
  p.horizon = horizon;
  p.buildings = buildings;
  p.energy_price = s.uniform_vector(horizon, 0.1, 0.3);
  p.demand_rate = 0.2;
  p.smoothing = 20.0;
  for (int i = 0; i < buildings; ++i) {
    p.a.push_back(s.uniform(0.8, 0.95));
    p.b.push_back(1.0);
    p.c.push_back(1.0);
    p.r0.push_back(0.0);
    p.comfort_lower.push_back(Vec::Constant(horizon, 0.5));
    p.comfort_upper.push_back(Vec::Constant(horizon, 3.0));
    p.capacity.push_back(2.0);
    p.weights.push_back(s.uniform_vector(horizon, 0.04, 0.06));
  }
  for (int i = 0; i < buildings; ++i) p.cliques.push_back({i});
  if (buildings > 1) {
    std::vector<int> all(buildings);
    for (int i = 0; i < buildings; ++i) all[i] = i;
    p.cliques.push_back(all);
  }
  return p;
}

double clique_value(const ThermalParams& p, const BlockLayout& layout,
                    const std::vector<int>& clique, const Vec& x) {
  Vec load = Vec::Zero(p.horizon);
  for (int l : clique) load += layout.block(x, l);
  return soft_max(load, p.smoothing);
}

double shapley_weight(int players, int clique_size) {
  require(players >= 1, "player count must be positive");
  require(clique_size >= 1 && clique_size <= players,
          "clique size must lie in [1, N]");
  // (N-|C|)! (|C|-1)! / N! via log-gamma to stay finite for large N.
  const double log_w = std::lgamma(players - clique_size + 1.0) +
                       std::lgamma(static_cast<double>(clique_size)) -
                       std::lgamma(players + 1.0);
  return std::exp(log_w);
}

Game make_thermal_game(const ThermalParams& params) {
  params.check();
  const int n = params.buildings;
  const int t_len = params.horizon;
  const BlockLayout layout(std::vector<int>(n, t_len));

  // y_t = c sum_{s <= t} a^{t-s} b x_s + c a^t r0 eliminated into G x + h.
  std::vector<FeasibleSet> sets;
  for (int i = 0; i < n; ++i) {
    Mat gm = Mat::Zero(t_len, t_len);
    Vec h(t_len);
    for (int t = 0; t < t_len; ++t) {
      for (int s = 0; s <= t; ++s) {
        gm(t, s) = params.c[i] * std::pow(params.a[i], t - s) * params.b[i];
      }
      h[t] = params.c[i] * std::pow(params.a[i], t + 1) * params.r0[i];
    }
    Mat a(2 * t_len, t_len);
    a.topRows(t_len) = gm;
    a.bottomRows(t_len) = -gm;
    Vec bv(2 * t_len);
    bv.head(t_len) = params.comfort_upper[i] - h;
    bv.tail(t_len) = h - params.comfort_lower[i];
    try {
      sets.push_back(FeasibleSet::polytope(
          Vec::Zero(t_len), Vec::Constant(t_len, params.capacity[i]),
          std::move(a), std::move(bv)));
    } catch (const Error& e) {
      throw Error("infeasible comfort band for building " + std::to_string(i) +
                  ": " + e.what());
    }
  }

  struct Data {
    ThermalParams p;
    BlockLayout layout;
    std::vector<double> clique_weight;
    std::vector<std::vector<int>> member_of;  // clique indices per building
  };
  auto data = std::make_shared<Data>();
  data->p = params;
  data->layout = layout;
  data->member_of.resize(n);
  for (std::size_t j = 0; j < params.cliques.size(); ++j) {
    data->clique_weight.push_back(
        shapley_weight(n, static_cast<int>(params.cliques[j].size())));
    for (int l : params.cliques[j]) data->member_of[l].push_back(static_cast<int>(j));
  }
  std::shared_ptr<const Data> cd = data;

  auto own_cost = [cd](const Vec& x, int i) {
    const Vec xi = cd->layout.block(x, i);
    return cd->p.energy_price.dot(xi) +
           xi.dot(cd->p.weights[i].cwiseProduct(xi));
  };

  Game g;
  g.name = "thermal";
  g.layout = layout;
  g.action_sets = enlarged(sets, kActionMargin);
  g.balls = chebyshev_balls(sets);
  g.sets = std::move(sets);
  g.payoffs = [cd, own_cost](const Vec& x) {
    std::vector<double> out(cd->p.buildings);
    for (int i = 0; i < cd->p.buildings; ++i) {
      double share = 0.0;
      for (int j : cd->member_of[i]) {
        const auto& clique = cd->p.cliques[j];
        std::vector<int> without;
        for (int l : clique) {
          if (l != i) without.push_back(l);
        }
        share += cd->clique_weight[j] *
                 (clique_value(cd->p, cd->layout, clique, x) -
                  clique_value(cd->p, cd->layout, without, x));
      }
      out[i] = own_cost(x, i) + cd->p.demand_rate * share;
    }
    return out;
  };
  g.pseudogradient = [cd](const Vec& x) -> Vec {
    const auto& p = cd->p;
    Vec f(x.size());
    std::vector<Vec> soft(p.cliques.size());
    for (std::size_t j = 0; j < p.cliques.size(); ++j) {
      Vec load = Vec::Zero(p.horizon);
      for (int l : p.cliques[j]) load += cd->layout.block(x, l);
      soft[j] = soft_argmax(load, p.smoothing);
    }
    for (int i = 0; i < p.buildings; ++i) {
      Vec gi = p.energy_price +
               2.0 * p.weights[i].cwiseProduct(cd->layout.block(x, i));
      for (int j : cd->member_of[i]) {
        gi += p.demand_rate * cd->clique_weight[j] * soft[j];
      }
      cd->layout.block(f, i) = gi;
    }
    return f;
  };
  g.potential = [cd, own_cost](const Vec& x) {
    double total = 0.0;
    for (int i = 0; i < cd->p.buildings; ++i) total += own_cost(x, i);
    for (std::size_t j = 0; j < cd->p.cliques.size(); ++j) {
      total += cd->p.demand_rate * cd->clique_weight[j] *
               clique_value(cd->p, cd->layout, cd->p.cliques[j], x);
    }
    return total;
  };
  double min_weight = std::numeric_limits<double>::infinity();
  for (const auto& w : params.weights) min_weight = std::min(min_weight, w.minCoeff());
  g.declared_class = GameClass::kStronglyMonotone;
  g.modulus = 2.0 * min_weight;
  g.check();
  return g;
}

}  // namespace zolearn
