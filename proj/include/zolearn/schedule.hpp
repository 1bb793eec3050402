#pragma once

#include <string>
#include <vector>

namespace zolearn {

// gamma_k = c_gamma / (k + b_gamma)^a_gamma,  delta_k = c_delta / (k + b_delta)^a_delta.
struct Schedule {
  double c_gamma = 1.0;
  double b_gamma = 1.0;
  double a_gamma = 1.0;
  double c_delta = 1.0;
  double b_delta = 1.0;
  double a_delta = 0.5;

  // Throws unless every c, b > 0 and every exponent lies in (0, 1].
  void check() const;
  bool operator==(const Schedule&) const = default;
};

struct ScheduleValues {
  double gamma;
  double delta;
};

ScheduleValues eval_schedule(const Schedule& s, long long k);

enum class Regime { kAlmostSure, kStrongRate };

std::string to_string(Regime regime);
Regime parse_regime(const std::string& name);

struct ConditionCheck {
  std::string name;
  bool passed;
};

struct ScheduleReport {
  Regime regime;
  std::vector<ConditionCheck> conditions;

  bool passed() const;
  std::string describe() const;
};

// Symbolic check on the exponents.
//   almost-sure: a_gamma in (1/2, 1], a_gamma + a_delta > 1, a_gamma > a_delta
//   strong-rate: additionally a_gamma < 1 and a_delta > 0
ScheduleReport validate_schedule(const Schedule& s, Regime regime);

}  // namespace zolearn
