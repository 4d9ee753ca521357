#include "logitaudit/ldd_stats.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "logitaudit/error.h"

namespace logitaudit {
namespace {

void require_samples(std::span<const DistanceSample> samples) {
  if (samples.empty()) throw Error(ErrorCode::kEmptyTrace, "no distance samples");
}

}  // namespace

bool exceeds(const DistanceSample& s, double t) { return s.flagged || s.value > t; }

double tail_statistic(std::span<const DistanceSample> samples, double t1) {
  require_samples(samples);
  const auto n = std::count_if(samples.begin(), samples.end(),
                               [t1](const DistanceSample& s) { return exceeds(s, t1); });
  return static_cast<double>(n) / static_cast<double>(samples.size());
}

RequestVerdict decide(std::span<const DistanceSample> samples, double t1,
                      double t2) {
  require_samples(samples);
  if (!(t1 >= 0.0) || !(t2 >= 0.0) || !(t2 <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "need t1 >= 0 and 0 <= t2 <= 1");
  }
  RequestVerdict v;
  v.t1 = t1;
  v.t2 = t2;
  v.p_t1 = tail_statistic(samples, t1);
  v.flagged = v.p_t1 > t2;
  v.num_steps = samples.size();
  return v;
}

LddHistogram build_histogram(std::span<const DistanceSample> samples,
                             std::size_t bins) {
  require_samples(samples);
  if (bins < 2) throw Error(ErrorCode::kInvalidArgument, "need at least 2 bins");
  double hi = 1.0;
  for (const auto& s : samples) {
    if (std::isfinite(s.value)) hi = std::max(hi, s.value);
  }
  LddHistogram h;
  h.bin_edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) {
    h.bin_edges[i] = hi * static_cast<double>(i) / static_cast<double>(bins);
  }
  h.counts.assign(bins, 0);
  for (const auto& s : samples) {
    std::size_t b = bins - 1;
    if (std::isfinite(s.value) && s.value < hi) {
      b = std::min(bins - 1, static_cast<std::size_t>(s.value / hi * static_cast<double>(bins)));
    }
    ++h.counts[b];
  }
  h.total = samples.size();
  for (double tau : kTailThresholds) h.tail_probs[tau] = tail_statistic(samples, tau);
  return h;
}

std::vector<SeparationRow> separation_report(const LddHistogram& benign,
                                             const LddHistogram& attack) {
  std::vector<SeparationRow> rows;
  for (const auto& [tau, b] : benign.tail_probs) {
    auto it = attack.tail_probs.find(tau);
    if (it == attack.tail_probs.end()) continue;
    SeparationRow r;
    r.threshold = tau;
    r.benign_tail = b;
    r.attack_tail = it->second;
    if (b > 0.0) {
      r.ratio = r.attack_tail / b;
    } else {
      r.ratio = r.attack_tail > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
    }
    r.ordered = r.attack_tail >= r.benign_tail;
    rows.push_back(r);
  }
  return rows;
}

Json to_json(const LddHistogram& h) {
  Json edges = Json::array();
  for (double e : h.bin_edges) edges.push_back(real_to_string(e));
  Json tails = Json::object();
  for (const auto& [tau, p] : h.tail_probs) tails[real_to_string(tau)] = real_to_string(p);
  return {{"bin_edges", std::move(edges)},
          {"counts", h.counts},
          {"total", h.total},
          {"tail_probs", std::move(tails)}};
}

LddHistogram histogram_from_json(const Json& j) {
  LddHistogram h;
  try {
    for (const auto& e : j.at("bin_edges")) h.bin_edges.push_back(real_from_json(e));
    h.counts = j.at("counts").get<std::vector<std::uint64_t>>();
    h.total = j.at("total").get<std::uint64_t>();
    for (const auto& [k, v] : j.at("tail_probs").items()) {
      h.tail_probs[real_from_json(Json(k))] = real_from_json(v);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
  return h;
}

void write_verdict_csv_header(std::ostream& out) {
  out << "request_id,p_t1,t1,t2,flagged,num_steps\n";
}

void write_verdict_csv_row(std::ostream& out, std::string_view request_id,
                           const RequestVerdict& v) {
  out << request_id << ',' << real_to_string(v.p_t1) << ',' << real_to_string(v.t1)
      << ',' << real_to_string(v.t2) << ',' << (v.flagged ? 1 : 0) << ','
      << v.num_steps << '\n';
}

}  // namespace logitaudit
