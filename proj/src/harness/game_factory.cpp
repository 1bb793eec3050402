#include "zolearn/harness/game_factory.hpp"

#include <algorithm>
#include <map>

#include "zolearn/games.hpp"
#include "zolearn/rng.hpp"

namespace zolearn::harness {

namespace {

const std::map<std::string, std::vector<std::string>>& allowed_keys() {
  static const std::map<std::string, std::vector<std::string>> keys = {
      {"random-quadratic",
       {"players", "dim", "strong_monotonicity", "box", "target_half_width"}},
      {"quadratic", {"dims", "m", "q", "lower", "upper"}},
      {"portfolio", {"assets", "mu", "sigma", "r"}},
      {"lse",
       {"features", "samples", "w_bound", "lambda_bound", "inputs", "labels"}},
      {"thermal",
       {"buildings", "horizon", "demand_rate", "smoothing", "energy_price",
        "comfort_lower", "comfort_upper", "capacity", "cliques"}},
  };
  return keys;
}

const char* kPath = "game";

int positive_int(const ConfigTable& t, const std::string& key,
                 std::int64_t fallback) {
  const std::int64_t v = get_int(t, key, kPath, fallback);
  if (v < 1) {
    throw ConfigError("key 'game." + key + "' must be positive",
                      t.count(key) ? t.at(key).line : 0);
  }
  return static_cast<int>(v);
}

Game build_random_quadratic(const ConfigTable& t, Stream stream) {
  RandomQuadraticSpec spec;
  spec.players = positive_int(t, "players", spec.players);
  spec.dim = positive_int(t, "dim", spec.dim);
  spec.strong_monotonicity =
      get_double(t, "strong_monotonicity", kPath, spec.strong_monotonicity);
  spec.box = get_double(t, "box", kPath, spec.box);
  spec.target_half_width =
      get_double(t, "target_half_width", kPath, spec.target_half_width);
  return make_random_quadratic_game(spec, stream);
}

Game build_quadratic(const ConfigTable& t) {
  const Vec dims_v = get_vector(t, "dims", kPath);
  std::vector<int> dims;
  for (int i = 0; i < dims_v.size(); ++i) {
    dims.push_back(static_cast<int>(dims_v[i]));
  }
  const BlockLayout layout(dims);
  const Mat m = get_matrix(t, "m", kPath);
  const Vec q = get_vector(t, "q", kPath);
  const Vec lower = get_vector(t, "lower", kPath);
  const Vec upper = get_vector(t, "upper", kPath);
  if (lower.size() != layout.total() || upper.size() != layout.total()) {
    throw ConfigError("game.lower/upper must have the stacked dimension");
  }
  std::vector<FeasibleSet> sets;
  for (int i = 0; i < layout.players(); ++i) {
    sets.push_back(FeasibleSet::box(layout.block(lower, i),
                                    layout.block(upper, i)));
  }
  return make_quadratic_game(m, q, layout, std::move(sets));
}

Game build_portfolio(const ConfigTable& t, Stream stream) {
  if (t.count("mu")) {
    const Vec mu = get_vector(t, "mu", kPath);
    const Mat sigma = get_matrix(t, "sigma", kPath);
    const double r = get_double(t, "r", kPath, mu.mean());
    return make_portfolio_game(mu, sigma, r);
  }
  if (t.count("sigma") || t.count("r")) {
    throw ConfigError("game.sigma and game.r need game.mu");
  }
  return make_random_portfolio_game(positive_int(t, "assets", 6), stream);
}

Game build_lse(const ConfigTable& t, Stream stream) {
  LseData data;
  if (t.count("inputs")) {
    data.inputs = get_vector(t, "inputs", kPath);
    data.labels = get_vector(t, "labels", kPath);
    data.features = positive_int(t, "features", 5);
  } else {
    if (t.count("labels")) throw ConfigError("game.labels needs game.inputs");
    data = sample_lse_data(positive_int(t, "features", 5),
                           positive_int(t, "samples", 10), stream);
  }
  data.w_bound = get_double(t, "w_bound", kPath, 5.0);
  data.lambda_bound = get_double(t, "lambda_bound", kPath, 5.0);
  return make_lse_game(data);
}

Game build_thermal(const ConfigTable& t, Stream stream) {
  const int buildings = positive_int(t, "buildings", 10);
  const int horizon = positive_int(t, "horizon", 2);
  ThermalParams p = default_thermal_params(buildings, horizon, stream);
  p.demand_rate = get_double(t, "demand_rate", kPath, p.demand_rate);
  p.smoothing = get_double(t, "smoothing", kPath, p.smoothing);
  if (t.count("energy_price")) p.energy_price = get_vector(t, "energy_price", kPath);
  if (t.count("comfort_lower")) {
    const double v = get_double(t, "comfort_lower", kPath);
    for (auto& band : p.comfort_lower) band.setConstant(v);
  }
  if (t.count("comfort_upper")) {
    const double v = get_double(t, "comfort_upper", kPath);
    for (auto& band : p.comfort_upper) band.setConstant(v);
  }
  if (t.count("capacity")) {
    const double v = get_double(t, "capacity", kPath);
    std::fill(p.capacity.begin(), p.capacity.end(), v);
  }
  if (t.count("cliques")) {
    const ConfigEntry& e = t.at("cliques");
    if (!e.value.is_array()) {
      throw ConfigError("game.cliques must be an array of arrays", e.line);
    }
    p.cliques.clear();
    for (const auto& c : e.value.as_array()) {
      if (!c.is_array()) {
        throw ConfigError("game.cliques must be an array of arrays", e.line);
      }
      std::vector<int> members;
      for (const auto& m : c.as_array()) {
        if (!m.is_int()) {
          throw ConfigError("clique members must be integers", e.line);
        }
        members.push_back(static_cast<int>(m.as_int()));
      }
      p.cliques.push_back(std::move(members));
    }
  }
  return make_thermal_game(p);
}

}  // namespace

std::vector<std::string> game_kinds() {
  std::vector<std::string> out;
  for (const auto& [kind, keys] : allowed_keys()) out.push_back(kind);
  return out;
}

void validate_game_spec(const ConfigTable& game) {
  const std::string kind = get_string(game, "kind", kPath);
  auto it = allowed_keys().find(kind);
  if (it == allowed_keys().end()) {
    throw ConfigError("unknown game kind '" + kind + "'", game.at("kind").line);
  }
  std::vector<std::string> allowed = it->second;
  allowed.push_back("kind");
  allowed.push_back("seed");
  reject_unknown_keys(game, allowed, kPath);
  const std::int64_t seed = get_int(game, "seed", kPath, 0);
  if (seed < 0) throw ConfigError("game.seed must be nonnegative", game.at("seed").line);
}

Game build_game(const ConfigTable& game) {
  validate_game_spec(game);
  const std::string kind = get_string(game, "kind", kPath);
  const Stream stream(static_cast<std::uint64_t>(get_int(game, "seed", kPath, 0)));
  if (kind == "random-quadratic") return build_random_quadratic(game, stream);
  if (kind == "quadratic") return build_quadratic(game);
  if (kind == "portfolio") return build_portfolio(game, stream);
  if (kind == "lse") return build_lse(game, stream);
  return build_thermal(game, stream);
}

}  // namespace zolearn::harness
