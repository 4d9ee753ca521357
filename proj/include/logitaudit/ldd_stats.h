#pragma once

// Aggregation of distance samples into logit distance distributions and the
// per-request tail decision rule p(t1) > t2.

#include <array>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "logitaudit/json_io.h"
#include "logitaudit/metrics.h"

namespace logitaudit {

inline constexpr std::array<double, 3> kTailThresholds = {0.1, 0.2, 0.3};

struct LddHistogram {
  std::vector<double> bin_edges;  // bins + 1 increasing edges
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;
  std::map<double, double> tail_probs;  // tau -> P[sample > tau]
};

struct RequestVerdict {
  double p_t1 = 0.0;
  double t1 = 0.0;
  double t2 = 0.0;
  bool flagged = false;
  std::uint64_t num_steps = 0;
};

// A sample exceeds t when its value is strictly above t, or when it is
// flagged as having no reference counterpart.
bool exceeds(const DistanceSample& s, double t);

// Fraction of samples exceeding t1. Throws Error(kEmptyTrace).
double tail_statistic(std::span<const DistanceSample> samples, double t1);

// flagged = p(t1) > t2 (strict).
RequestVerdict decide(std::span<const DistanceSample> samples, double t1,
                      double t2);

// Equal-width bins over [0, max(1, largest finite sample)].
LddHistogram build_histogram(std::span<const DistanceSample> samples,
                             std::size_t bins);

struct SeparationRow {
  double threshold = 0.0;
  double benign_tail = 0.0;
  double attack_tail = 0.0;
  double ratio = 0.0;    // attack / benign, +inf when benign tail is 0
  bool ordered = false;  // attack_tail >= benign_tail
};

std::vector<SeparationRow> separation_report(const LddHistogram& benign,
                                             const LddHistogram& attack);

Json to_json(const LddHistogram& h);
LddHistogram histogram_from_json(const Json& j);

// Verdict CSV: request_id,p_t1,t1,t2,flagged,num_steps
void write_verdict_csv_header(std::ostream& out);
void write_verdict_csv_row(std::ostream& out, std::string_view request_id,
                           const RequestVerdict& v);

}  // namespace logitaudit
