#include "zolearn/harness/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "zolearn/harness/game_factory.hpp"
#include "zolearn/learners.hpp"
#include "zolearn/rng.hpp"

namespace zolearn::harness {

namespace {

std::string with_line(const std::string& message, int line) {
  if (line <= 0) return message;
  return "line " + std::to_string(line) + ": " + message;
}

bool is_key_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

// Removes a trailing comment that is not inside a string.
std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_string && c == '\\') {
      ++i;
    } else if (c == '"') {
      in_string = !in_string;
    } else if (c == '#' && !in_string) {
      return line.substr(0, i);
    }
  }
  return line;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Bracket depth after scanning `s`, ignoring brackets inside strings.
int bracket_balance(const std::string& s) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string && c == '\\') {
      ++i;
    } else if (c == '"') {
      in_string = !in_string;
    } else if (!in_string && c == '[') {
      ++depth;
    } else if (!in_string && c == ']') {
      --depth;
    }
  }
  return depth;
}

class ValueParser {
 public:
  ValueParser(const std::string& text, int line) : s_(text), line_(line) {}

  ConfigValue parse_all() {
    ConfigValue v = parse_value();
    skip_space();
    if (pos_ != s_.size()) fail("unexpected text after value");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError(what, line_);
  }

  void skip_space() {
    while (pos_ < s_.size() &&
           std::isspace(static_cast<unsigned char>(s_[pos_]))) {
      ++pos_;
    }
  }

  ConfigValue parse_value() {
    skip_space();
    if (pos_ >= s_.size()) fail("missing value");
    const char c = s_[pos_];
    if (c == '"') return parse_string();
    if (c == '[') return parse_array();
    return parse_scalar();
  }

  ConfigValue parse_string() {
    std::string out;
    ++pos_;
    while (pos_ < s_.size()) {
      const char c = s_[pos_++];
      if (c == '"') return ConfigValue(std::move(out));
      if (c == '\\') {
        if (pos_ >= s_.size()) break;
        const char e = s_[pos_++];
        switch (e) {
          case 'n':
            out += '\n';
            break;
          case 't':
            out += '\t';
            break;
          case '"':
          case '\\':
            out += e;
            break;
          default:
            fail(std::string("unknown escape \\") + e);
        }
      } else {
        out += c;
      }
    }
    fail("unterminated string");
  }

  ConfigValue parse_array() {
    ConfigArray items;
    ++pos_;
    for (;;) {
      skip_space();
      if (pos_ >= s_.size()) fail("unterminated array");
      if (s_[pos_] == ']') {
        ++pos_;
        return ConfigValue(std::move(items));
      }
      items.push_back(parse_value());
      skip_space();
      if (pos_ < s_.size() && s_[pos_] == ',') {
        ++pos_;
      } else if (pos_ < s_.size() && s_[pos_] != ']') {
        fail("expected ',' or ']' in array");
      }
    }
  }

  ConfigValue parse_scalar() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ']' &&
           !std::isspace(static_cast<unsigned char>(s_[pos_]))) {
      ++pos_;
    }
    const std::string token = s_.substr(start, pos_ - start);
    if (token == "true") return ConfigValue(true);
    if (token == "false") return ConfigValue(false);
    const bool integral =
        !token.empty() &&
        token.find_first_not_of("+-0123456789") == std::string::npos &&
        token.find_first_of("0123456789") != std::string::npos;
    if (integral) {
      std::int64_t v = 0;
      const char* first = token.data() + (token[0] == '+' ? 1 : 0);
      auto [ptr, ec] = std::from_chars(first, token.data() + token.size(), v);
      if (ec == std::errc() && ptr == token.data() + token.size()) {
        return ConfigValue(v);
      }
      fail("invalid integer '" + token + "'");
    }
    if (auto d = parse_double(token)) return ConfigValue(*d);
    fail("invalid value '" + token + "'");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
  int line_;
};

std::vector<std::string> split_path(const std::string& header, int line) {
  std::vector<std::string> parts;
  std::string part;
  for (char c : header) {
    if (c == '.') {
      parts.push_back(part);
      part.clear();
    } else if (is_key_char(c)) {
      part += c;
    } else {
      throw ConfigError("invalid character in table name '" + header + "'",
                        line);
    }
  }
  parts.push_back(part);
  for (const auto& p : parts) {
    if (p.empty()) throw ConfigError("empty table name segment", line);
  }
  return parts;
}

void write_value(std::ostringstream& out, const ConfigValue& v) {
  if (v.is_bool()) {
    out << (v.as_bool() ? "true" : "false");
  } else if (v.is_int()) {
    out << v.as_int();
  } else if (v.is_double()) {
    out << format_double(v.as_double());
  } else if (v.is_string()) {
    out << '"';
    for (char c : v.as_string()) {
      if (c == '"' || c == '\\') {
        out << '\\' << c;
      } else if (c == '\n') {
        out << "\\n";
      } else if (c == '\t') {
        out << "\\t";
      } else {
        out << c;
      }
    }
    out << '"';
  } else if (v.is_array()) {
    out << '[';
    const auto& items = v.as_array();
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i) out << ", ";
      write_value(out, items[i]);
    }
    out << ']';
  } else {
    throw ConfigError("inline tables cannot be serialized");
  }
}

void write_table(std::ostringstream& out, const ConfigTable& table,
                 const std::string& path) {
  if (!path.empty()) out << "\n[" << path << "]\n";
  for (const auto& [key, entry] : table) {
    if (entry.value.is_table()) continue;
    out << key << " = ";
    write_value(out, entry.value);
    out << '\n';
  }
  for (const auto& [key, entry] : table) {
    if (!entry.value.is_table()) continue;
    write_table(out, entry.value.as_table(),
                path.empty() ? key : path + "." + key);
  }
}

std::string kind_name(const ConfigValue& v) {
  if (v.is_bool()) return "boolean";
  if (v.is_int()) return "integer";
  if (v.is_double()) return "float";
  if (v.is_string()) return "string";
  if (v.is_array()) return "array";
  return "table";
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

}  // namespace

ConfigError::ConfigError(const std::string& message, int line)
    : Error(with_line(message, line)), line_(line) {}

ConfigValue::ConfigValue(ConfigTable v)
    : value_(std::make_shared<ConfigTable>(std::move(v))) {}

double ConfigValue::as_double() const {
  if (is_int()) return static_cast<double>(as_int());
  return std::get<double>(value_);
}

bool ConfigValue::operator==(const ConfigValue& other) const {
  if (value_.index() != other.value_.index()) return false;
  if (is_table()) {
    const ConfigTable& a = as_table();
    const ConfigTable& b = other.as_table();
    return static_cast<const std::map<std::string, ConfigEntry>&>(a) ==
           static_cast<const std::map<std::string, ConfigEntry>&>(b);
  }
  if (is_double()) {
    // Bitwise comparison so that serialization round trips are exact.
    const double a = as_double(), b = other.as_double();
    return std::memcmp(&a, &b, sizeof a) == 0;
  }
  return value_ == other.value_;
}

std::string format_double(double v) {
  if (!std::isfinite(v)) throw ConfigError("non-finite float cannot be stored");
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, ptr);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::optional<double> parse_double(const std::string& text) {
  if (text.empty()) return std::nullopt;
  const char* first = text.data() + (text[0] == '+' ? 1 : 0);
  const char* last = text.data() + text.size();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

ConfigTable parse_config(const std::string& text) {
  ConfigTable root;
  ConfigTable* current = &root;
  std::vector<std::string> defined_tables;

  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw ConfigError("malformed table header", line_no);
      }
      const std::string header = trim(line.substr(1, line.size() - 2));
      if (std::find(defined_tables.begin(), defined_tables.end(), header) !=
          defined_tables.end()) {
        throw ConfigError("table [" + header + "] defined twice", line_no);
      }
      defined_tables.push_back(header);
      current = &root;
      for (const auto& part : split_path(header, line_no)) {
        auto it = current->find(part);
        if (it == current->end()) {
          it = current->emplace(part, ConfigEntry{ConfigValue(ConfigTable{}),
                                                  line_no})
                   .first;
        } else if (!it->second.value.is_table()) {
          throw ConfigError("key '" + part + "' is not a table", line_no);
        }
        current = &it->second.value.as_table();
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("expected 'key = value'", line_no);
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty() || !std::all_of(key.begin(), key.end(), is_key_char)) {
      throw ConfigError("invalid key '" + key + "'", line_no);
    }
    std::string value_text = trim(line.substr(eq + 1));
    const int start_line = line_no;
    while (bracket_balance(value_text) > 0) {
      if (!std::getline(in, raw)) {
        throw ConfigError("unterminated array for key '" + key + "'",
                          start_line);
      }
      ++line_no;
      value_text += " " + trim(strip_comment(raw));
    }
    if (current->count(key)) {
      throw ConfigError("duplicate key '" + key + "'", start_line);
    }
    ValueParser parser(value_text, start_line);
    current->emplace(key, ConfigEntry{parser.parse_all(), start_line});
  }
  return root;
}

ConfigTable load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const ConfigTable& table) {
  std::ostringstream out;
  write_table(out, table, "");
  std::string s = out.str();
  if (!s.empty() && s.front() == '\n') s.erase(0, 1);
  return s;
}

const ConfigEntry& require_key(const ConfigTable& t, const std::string& key,
                               const std::string& path) {
  auto it = t.find(key);
  if (it == t.end()) {
    throw ConfigError("missing required key '" + join(path, key) + "'");
  }
  return it->second;
}

double get_double(const ConfigTable& t, const std::string& key,
                  const std::string& path, std::optional<double> fallback) {
  auto it = t.find(key);
  if (it == t.end()) {
    if (fallback) return *fallback;
    require_key(t, key, path);
  }
  if (!it->second.value.is_number()) {
    throw ConfigError("key '" + join(path, key) + "' must be a number, got " +
                          kind_name(it->second.value),
                      it->second.line);
  }
  return it->second.value.as_double();
}

std::int64_t get_int(const ConfigTable& t, const std::string& key,
                     const std::string& path,
                     std::optional<std::int64_t> fallback) {
  auto it = t.find(key);
  if (it == t.end()) {
    if (fallback) return *fallback;
    require_key(t, key, path);
  }
  if (!it->second.value.is_int()) {
    throw ConfigError("key '" + join(path, key) + "' must be an integer, got " +
                          kind_name(it->second.value),
                      it->second.line);
  }
  return it->second.value.as_int();
}

std::string get_string(const ConfigTable& t, const std::string& key,
                       const std::string& path,
                       std::optional<std::string> fallback) {
  auto it = t.find(key);
  if (it == t.end()) {
    if (fallback) return *fallback;
    require_key(t, key, path);
  }
  if (!it->second.value.is_string()) {
    throw ConfigError("key '" + join(path, key) + "' must be a string, got " +
                          kind_name(it->second.value),
                      it->second.line);
  }
  return it->second.value.as_string();
}

Vec get_vector(const ConfigTable& t, const std::string& key,
               const std::string& path) {
  const ConfigEntry& e = require_key(t, key, path);
  if (!e.value.is_array()) {
    throw ConfigError("key '" + join(path, key) + "' must be an array",
                      e.line);
  }
  const auto& items = e.value.as_array();
  Vec v(static_cast<int>(items.size()));
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!items[i].is_number()) {
      throw ConfigError("key '" + join(path, key) + "' must hold numbers",
                        e.line);
    }
    v[static_cast<int>(i)] = items[i].as_double();
  }
  return v;
}

Mat get_matrix(const ConfigTable& t, const std::string& key,
               const std::string& path) {
  const ConfigEntry& e = require_key(t, key, path);
  const std::string where = join(path, key);
  if (!e.value.is_array() || e.value.as_array().empty()) {
    throw ConfigError("key '" + where + "' must be a nonempty array of rows",
                      e.line);
  }
  const auto& rows = e.value.as_array();
  std::size_t cols = 0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!rows[r].is_array()) {
      throw ConfigError("key '" + where + "' must be an array of rows", e.line);
    }
    if (r == 0) cols = rows[r].as_array().size();
    if (rows[r].as_array().size() != cols) {
      throw ConfigError("key '" + where + "' has ragged rows", e.line);
    }
  }
  Mat m(static_cast<int>(rows.size()), static_cast<int>(cols));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const auto& v = rows[r].as_array()[c];
      if (!v.is_number()) {
        throw ConfigError("key '" + where + "' must hold numbers", e.line);
      }
      m(static_cast<int>(r), static_cast<int>(c)) = v.as_double();
    }
  }
  return m;
}

void reject_unknown_keys(const ConfigTable& t,
                         const std::vector<std::string>& allowed,
                         const std::string& path) {
  for (const auto& [key, entry] : t) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("unknown key '" + join(path, key) + "'", entry.line);
    }
  }
}

const ConfigTable& ExperimentConfig::game() const {
  return require_key(raw, "game", "").value.as_table();
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a64(text()); }

ExperimentConfig make_experiment_config(ConfigTable raw) {
  static const std::vector<std::string> kTop = {
      "name",    "algorithm",  "dgf",     "regime", "iterations", "seeds",
      "metrics", "output_dir", "formats", "svg",    "workers",    "schedule",
      "game"};
  static const std::vector<std::string> kSchedule = {
      "c_gamma", "b_gamma", "a_gamma", "c_delta", "b_delta", "a_delta"};
  static const std::vector<std::string> kMetrics = {
      "distance-to-cp", "merit", "potential-gap", "estimate-norm",
      "ergodic-distance"};

  reject_unknown_keys(raw, kTop, "");
  ExperimentConfig c;
  c.name = get_string(raw, "name", "");
  if (c.name.empty() ||
      !std::all_of(c.name.begin(), c.name.end(), is_key_char)) {
    throw ConfigError("name must be a nonempty identifier",
                      require_key(raw, "name", "").line);
  }
  c.algorithm = get_string(raw, "algorithm", "");
  c.dgf = get_string(raw, "dgf", "", "euclidean");
  c.regime = get_string(raw, "regime", "", "almost-sure");
  c.iterations = get_int(raw, "iterations", "");
  if (c.iterations < 0) {
    throw ConfigError("iterations must be nonnegative",
                      require_key(raw, "iterations", "").line);
  }
  c.output_dir = get_string(raw, "output_dir", "", "results");
  c.workers = static_cast<int>(get_int(raw, "workers", "", 0));

  try {
    parse_algorithm(c.algorithm);
    parse_dgf_kind(c.dgf);
    parse_regime(c.regime);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }

  const ConfigEntry& seeds = require_key(raw, "seeds", "");
  if (!seeds.value.is_array()) {
    throw ConfigError("key 'seeds' must be an array", seeds.line);
  }
  for (const auto& s : seeds.value.as_array()) {
    if (!s.is_int() || s.as_int() < 0) {
      throw ConfigError("seeds must be nonnegative integers", seeds.line);
    }
    c.seeds.push_back(static_cast<std::uint64_t>(s.as_int()));
  }
  if (c.seeds.empty()) {
    throw ConfigError("at least one seed required", seeds.line);
  }

  auto string_list = [&](const std::string& key,
                          std::vector<std::string> fallback) {
    auto it = raw.find(key);
    if (it == raw.end()) return fallback;
    if (!it->second.value.is_array()) {
      throw ConfigError("key '" + key + "' must be an array of strings",
                        it->second.line);
    }
    std::vector<std::string> out;
    for (const auto& v : it->second.value.as_array()) {
      if (!v.is_string()) {
        throw ConfigError("key '" + key + "' must be an array of strings",
                          it->second.line);
      }
      out.push_back(v.as_string());
    }
    return out;
  };
  c.metrics = string_list("metrics", {"distance-to-cp"});
  for (const auto& m : c.metrics) {
    if (std::find(kMetrics.begin(), kMetrics.end(), m) == kMetrics.end()) {
      throw ConfigError("unknown metric '" + m + "'",
                        require_key(raw, "metrics", "").line);
    }
  }
  c.formats = string_list("formats", {"csv"});
  for (const auto& f : c.formats) {
    if (f != "csv" && f != "json-lines") {
      throw ConfigError("unknown format '" + f + "'",
                        require_key(raw, "formats", "").line);
    }
  }
  if (auto it = raw.find("svg"); it != raw.end()) {
    if (!it->second.value.is_bool()) {
      throw ConfigError("key 'svg' must be a boolean", it->second.line);
    }
    c.svg = it->second.value.as_bool();
  }

  const ConfigEntry& sched = require_key(raw, "schedule", "");
  if (!sched.value.is_table()) {
    throw ConfigError("'schedule' must be a table", sched.line);
  }
  const ConfigTable& st = sched.value.as_table();
  reject_unknown_keys(st, kSchedule, "schedule");
  c.schedule.c_gamma = get_double(st, "c_gamma", "schedule", 1.0);
  c.schedule.b_gamma = get_double(st, "b_gamma", "schedule");
  c.schedule.a_gamma = get_double(st, "a_gamma", "schedule");
  c.schedule.c_delta = get_double(st, "c_delta", "schedule", 1.0);
  c.schedule.b_delta = get_double(st, "b_delta", "schedule");
  c.schedule.a_delta = get_double(st, "a_delta", "schedule");
  try {
    c.schedule.check();
  } catch (const Error& e) {
    throw ConfigError(std::string("schedule: ") + e.what(), sched.line);
  }

  const ConfigEntry& game = require_key(raw, "game", "");
  if (!game.value.is_table()) {
    throw ConfigError("'game' must be a table", game.line);
  }
  validate_game_spec(game.value.as_table());
  c.game_seed = static_cast<std::uint64_t>(
      get_int(game.value.as_table(), "seed", "game", 0));

  c.raw = std::move(raw);
  return c;
}

ExperimentConfig parse_experiment_config(const std::string& text) {
  return make_experiment_config(parse_config(text));
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return make_experiment_config(load_config_file(path));
}

}  // namespace zolearn::harness
