#include "zolearn/schedule.hpp"

#include <cmath>
#include <sstream>

#include "zolearn/common.hpp"

namespace zolearn {

void Schedule::check() const {
  require(c_gamma > 0.0 && c_delta > 0.0, "schedule scale c must be positive");
  require(b_gamma > 0.0 && b_delta > 0.0, "schedule offset b must be positive");
  require(a_gamma > 0.0 && a_gamma <= 1.0,
          "schedule exponent a_gamma must lie in (0, 1]");
  require(a_delta > 0.0 && a_delta <= 1.0,
          "schedule exponent a_delta must lie in (0, 1]");
}

ScheduleValues eval_schedule(const Schedule& s, long long k) {
  s.check();
  require(k >= 0, "iteration index must be nonnegative");
  const double kd = static_cast<double>(k);
  return {s.c_gamma / std::pow(kd + s.b_gamma, s.a_gamma),
          s.c_delta / std::pow(kd + s.b_delta, s.a_delta)};
}

std::string to_string(Regime regime) {
  return regime == Regime::kAlmostSure ? "almost-sure" : "strong-rate";
}

Regime parse_regime(const std::string& name) {
  if (name == "almost-sure") return Regime::kAlmostSure;
  if (name == "strong-rate") return Regime::kStrongRate;
  throw Error("unknown regime '" + name + "'");
}

bool ScheduleReport::passed() const {
  for (const auto& c : conditions) {
    if (!c.passed) return false;
  }
  return true;
}

std::string ScheduleReport::describe() const {
  std::ostringstream out;
  out << "schedule check (" << to_string(regime)
      << "): " << (passed() ? "PASS" : "FAIL") << "\n";
  for (const auto& c : conditions) {
    out << "  [" << (c.passed ? "ok" : "FAIL") << "] " << c.name << "\n";
  }
  return out.str();
}

ScheduleReport validate_schedule(const Schedule& s, Regime regime) {
  const double ag = s.a_gamma;
  const double ad = s.a_delta;
  ScheduleReport report{regime, {}};
  auto add = [&](std::string name, bool ok) {
    report.conditions.push_back({std::move(name), ok});
  };
  add("a_gamma in (1/2, 1]  (sum gamma = inf, sum gamma^2 < inf)",
      ag > 0.5 && ag <= 1.0);
  add("a_gamma + a_delta > 1  (sum gamma*delta < inf)", ag + ad > 1.0);
  add("a_gamma > a_delta  (gamma/delta -> 0)", ag > ad);
  if (regime == Regime::kStrongRate) {
    add("a_gamma < 1", ag < 1.0);
    add("a_delta > 0", ad > 0.0);
  }
  return report;
}

}  // namespace zolearn
