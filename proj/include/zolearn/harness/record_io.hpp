#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "zolearn/learners.hpp"

namespace zolearn::harness {

// 17 significant digits; parses back to the identical double.
std::string format_number(double v);

// Header `iteration,<metric>...`, one row per logged iteration.
void write_csv(const RunRecord& record, std::ostream& out);

// Preamble line with the config hash, seed, metric names and the canonical
// config text; then one JSON object per logged iteration.
void write_jsonl(const RunRecord& record, const std::string& config_text,
                 std::ostream& out);

struct StoredRun {
  RunRecord record;
  std::string config_text;
};

StoredRun read_jsonl(std::istream& in);

// Logged rows, metric names, seed, hash and safeguard count agree exactly.
bool same_logged_values(const RunRecord& a, const RunRecord& b);

struct MetricSummary {
  std::string metric;
  std::vector<long long> k;
  std::vector<double> mean;
  std::vector<double> min;
  std::vector<double> max;
};

// Per-iteration mean and min/max envelope across seeds.
std::vector<MetricSummary> summarize(const std::vector<RunRecord>& records);

// Header `iteration,mean,min,max`.
void write_summary_csv(const MetricSummary& summary, std::ostream& out);

}  // namespace zolearn::harness
