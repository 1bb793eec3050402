#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "zolearn/common.hpp"
#include "zolearn/schedule.hpp"

namespace zolearn::harness {

// Malformed config text or schema violation. `line` is 0 when unknown.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& message, int line = 0);
  int line() const { return line_; }

 private:
  int line_;
};

class ConfigValue;
using ConfigArray = std::vector<ConfigValue>;

struct ConfigTable;

class ConfigValue {
 public:
  using Storage = std::variant<bool, std::int64_t, double, std::string,
                               ConfigArray, std::shared_ptr<ConfigTable>>;

  ConfigValue() : value_(false) {}
  ConfigValue(bool v) : value_(v) {}
  ConfigValue(std::int64_t v) : value_(v) {}
  ConfigValue(int v) : value_(static_cast<std::int64_t>(v)) {}
  ConfigValue(double v) : value_(v) {}
  ConfigValue(std::string v) : value_(std::move(v)) {}
  ConfigValue(const char* v) : value_(std::string(v)) {}
  ConfigValue(ConfigArray v) : value_(std::move(v)) {}
  ConfigValue(ConfigTable v);

  bool is_bool() const { return std::holds_alternative<bool>(value_); }
  bool is_int() const { return std::holds_alternative<std::int64_t>(value_); }
  bool is_double() const { return std::holds_alternative<double>(value_); }
  bool is_number() const { return is_int() || is_double(); }
  bool is_string() const { return std::holds_alternative<std::string>(value_); }
  bool is_array() const { return std::holds_alternative<ConfigArray>(value_); }
  bool is_table() const {
    return std::holds_alternative<std::shared_ptr<ConfigTable>>(value_);
  }

  bool as_bool() const { return std::get<bool>(value_); }
  std::int64_t as_int() const { return std::get<std::int64_t>(value_); }
  double as_double() const;
  const std::string& as_string() const { return std::get<std::string>(value_); }
  const ConfigArray& as_array() const { return std::get<ConfigArray>(value_); }
  const ConfigTable& as_table() const {
    return *std::get<std::shared_ptr<ConfigTable>>(value_);
  }
  ConfigTable& as_table() {
    return *std::get<std::shared_ptr<ConfigTable>>(value_);
  }

  bool operator==(const ConfigValue& other) const;

 private:
  Storage value_;
};

struct ConfigEntry {
  ConfigValue value;
  int line = 0;

  // Source lines are not part of a value's identity.
  bool operator==(const ConfigEntry& other) const {
    return value == other.value;
  }
};

// Tables keep key order sorted, which makes serialization canonical.
struct ConfigTable : std::map<std::string, ConfigEntry> {
  using std::map<std::string, ConfigEntry>::map;
};

// Parses the config dialect: `[table.sub]` headers, `key = value` lines,
// `#` comments; values are strings, booleans, integers, floats and
// (possibly nested, possibly multi-line) arrays.
ConfigTable parse_config(const std::string& text);
ConfigTable load_config_file(const std::string& path);

// Canonical text: top-level scalars first, then tables, keys sorted, floats
// in shortest round-trip form.
std::string serialize_config(const ConfigTable& table);

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
std::optional<double> parse_double(const std::string& text);

// Typed view of an experiment file.
struct ExperimentConfig {
  ConfigTable raw;

  std::string name;
  std::string algorithm;
  std::string dgf;
  std::string regime;
  long long iterations = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> metrics;
  std::string output_dir;
  std::vector<std::string> formats;  // csv, json-lines
  bool svg = false;
  int workers = 0;  // 0: choose automatically
  Schedule schedule;
  std::uint64_t game_seed = 0;

  const ConfigTable& game() const;
  std::uint64_t hash() const;
  std::string text() const { return serialize_config(raw); }
};

// Validates keys and types; throws ConfigError naming the offending key.
ExperimentConfig make_experiment_config(ConfigTable raw);
ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);

// Accessors used by the game factory; all throw ConfigError with the key path.
const ConfigEntry& require_key(const ConfigTable& t, const std::string& key,
                               const std::string& path);
double get_double(const ConfigTable& t, const std::string& key,
                  const std::string& path, std::optional<double> fallback = {});
std::int64_t get_int(const ConfigTable& t, const std::string& key,
                     const std::string& path,
                     std::optional<std::int64_t> fallback = {});
std::string get_string(const ConfigTable& t, const std::string& key,
                       const std::string& path,
                       std::optional<std::string> fallback = {});
Vec get_vector(const ConfigTable& t, const std::string& key,
               const std::string& path);
Mat get_matrix(const ConfigTable& t, const std::string& key,
               const std::string& path);
void reject_unknown_keys(const ConfigTable& t,
                         const std::vector<std::string>& allowed,
                         const std::string& path);

}  // namespace zolearn::harness
