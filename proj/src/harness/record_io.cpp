#include "zolearn/harness/record_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>

#include <json.hpp>

namespace zolearn::harness {

using nlohmann::json;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(const RunRecord& record, std::ostream& out) {
  out << "iteration";
  for (const auto& name : record.metric_names) out << ',' << name;
  out << '\n';
  for (std::size_t r = 0; r < record.logged_k.size(); ++r) {
    out << record.logged_k[r];
    for (double v : record.logged_values[r]) out << ',' << format_number(v);
    out << '\n';
  }
}

namespace {

json number_json(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

double number_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  const std::string s = j.get<std::string>();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  throw Error("invalid number '" + s + "' in record");
}

}  // namespace

void write_jsonl(const RunRecord& record, const std::string& config_text,
                 std::ostream& out) {
  char hash[20];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(record.config_hash));
  json pre = {
      {"config_hash", hash},
      {"seed", record.seed},
      {"iterations", record.iterations},
      {"metrics", record.metric_names},
      {"safeguard_events", record.safeguard_events},
      {"config", config_text},
  };
  out << pre.dump() << '\n';
  for (std::size_t r = 0; r < record.logged_k.size(); ++r) {
    json row = {{"iteration", record.logged_k[r]}};
    json values = json::array();
    for (double v : record.logged_values[r]) values.push_back(number_json(v));
    row["values"] = values;
    out << row.dump() << '\n';
  }
}

StoredRun read_jsonl(std::istream& in) {
  StoredRun stored;
  std::string line;
  if (!std::getline(in, line)) throw Error("empty record file");
  try {
    const json pre = json::parse(line);
    stored.record.config_hash =
        std::stoull(pre.at("config_hash").get<std::string>(), nullptr, 16);
    stored.record.seed = pre.at("seed").get<std::uint64_t>();
    stored.record.iterations = pre.at("iterations").get<long long>();
    stored.record.metric_names =
        pre.at("metrics").get<std::vector<std::string>>();
    stored.record.safeguard_events = pre.at("safeguard_events").get<long long>();
    stored.config_text = pre.at("config").get<std::string>();
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json row = json::parse(line);
      stored.record.logged_k.push_back(row.at("iteration").get<long long>());
      std::vector<double> values;
      for (const auto& v : row.at("values")) values.push_back(number_from_json(v));
      if (values.size() != stored.record.metric_names.size()) {
        throw Error("record row has the wrong number of values");
      }
      stored.record.logged_values.push_back(std::move(values));
    }
  } catch (const json::exception& e) {
    throw Error(std::string("malformed record: ") + e.what());
  }
  return stored;
}

bool same_logged_values(const RunRecord& a, const RunRecord& b) {
  if (a.seed != b.seed || a.config_hash != b.config_hash ||
      a.metric_names != b.metric_names || a.logged_k != b.logged_k ||
      a.safeguard_events != b.safeguard_events ||
      a.logged_values.size() != b.logged_values.size()) {
    return false;
  }
  for (std::size_t r = 0; r < a.logged_values.size(); ++r) {
    const auto& x = a.logged_values[r];
    const auto& y = b.logged_values[r];
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const bool both_nan = std::isnan(x[i]) && std::isnan(y[i]);
      if (!both_nan && x[i] != y[i]) return false;
    }
  }
  return true;
}

std::vector<MetricSummary> summarize(const std::vector<RunRecord>& records) {
  std::vector<MetricSummary> out;
  if (records.empty()) return out;
  const RunRecord& first = records.front();
  for (const auto& r : records) {
    require(r.metric_names == first.metric_names && r.logged_k == first.logged_k,
            "records to summarize must share metrics and logging points");
  }
  for (std::size_t m = 0; m < first.metric_names.size(); ++m) {
    MetricSummary s;
    s.metric = first.metric_names[m];
    s.k = first.logged_k;
    for (std::size_t row = 0; row < first.logged_k.size(); ++row) {
      double sum = 0.0;
      double lo = std::numeric_limits<double>::infinity();
      double hi = -std::numeric_limits<double>::infinity();
      for (const auto& r : records) {
        const double v = r.logged_values[row][m];
        sum += v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      // Clamp so rounding in the mean never breaks min <= mean <= max.
      s.mean.push_back(std::clamp(sum / records.size(), lo, hi));
      s.min.push_back(lo);
      s.max.push_back(hi);
    }
    out.push_back(std::move(s));
  }
  return out;
}

void write_summary_csv(const MetricSummary& summary, std::ostream& out) {
  out << "iteration,mean,min,max\n";
  for (std::size_t i = 0; i < summary.k.size(); ++i) {
    out << summary.k[i] << ',' << format_number(summary.mean[i]) << ','
        << format_number(summary.min[i]) << ',' << format_number(summary.max[i])
        << '\n';
  }
}

}  // namespace zolearn::harness
