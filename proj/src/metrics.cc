#include "logitaudit/metrics.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "logitaudit/error.h"
#include "logitaudit/json_io.h"

namespace logitaudit {
namespace {

void check_same_length(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) {
    throw Error(ErrorCode::kShapeError,
                "logit vectors must be non-empty and of equal length");
  }
}

double log_sum_exp(std::span<const double> l) {
  const double m = *std::max_element(l.begin(), l.end());
  double s = 0.0;
  for (double v : l) s += std::exp(v - m);
  return m + std::log(s);
}

std::vector<bool> membership(std::span<const double> l_star,
                             std::span<const std::uint32_t> indices,
                             std::size_t k) {
  if (k == 0 || k > l_star.size()) {
    throw Error(ErrorCode::kInvalidArgument, "k must lie in [1, n]");
  }
  if (indices.size() != k) {
    throw Error(ErrorCode::kInvalidArgument, "|indices| must equal k");
  }
  std::vector<bool> in(l_star.size(), false);
  for (auto i : indices) {
    if (i >= l_star.size()) {
      throw Error(ErrorCode::kIndexError, "index " + std::to_string(i) + " out of range");
    }
    if (in[i]) throw Error(ErrorCode::kInvalidArgument, "duplicate index");
    in[i] = true;
  }
  return in;
}

// Greedy cost of threshold t: raise members below t, lower others above t.
double threshold_cost(std::span<const double> l, const std::vector<bool>& in,
                      double t) {
  double cost = 0.0;
  for (std::size_t i = 0; i < l.size(); ++i) {
    cost += in[i] ? std::max(0.0, t - l[i]) : std::max(0.0, l[i] - t);
  }
  return cost;
}

}  // namespace

std::string_view to_string(DistanceKind kind) {
  switch (kind) {
    case DistanceKind::kTV: return "TV";
    case DistanceKind::kKL: return "KL";
    case DistanceKind::kTopK: return "TopK";
  }
  return "?";
}

DistanceKind distance_kind_from_string(std::string_view s) {
  if (s == "TV") return DistanceKind::kTV;
  if (s == "KL") return DistanceKind::kKL;
  if (s == "TopK") return DistanceKind::kTopK;
  throw Error(ErrorCode::kParseError, "unknown distance kind '" + std::string(s) + "'");
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.size());
  if (logits.empty()) return p;
  const double m = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

double tv_distance(std::span<const double> l, std::span<const double> l_star) {
  check_same_length(l, l_star);
  const auto p = softmax(l);
  const auto q = softmax(l_star);
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return std::clamp(0.5 * s, 0.0, 1.0);
}

double kl_divergence(std::span<const double> l, std::span<const double> l_star) {
  check_same_length(l, l_star);
  const double lse_p = log_sum_exp(l);
  const double lse_q = log_sum_exp(l_star);
  double kl = 0.0;
  for (std::size_t i = 0; i < l.size(); ++i) {
    const double log_p = l[i] - lse_p;
    const double p = std::exp(log_p);
    if (p == 0.0) continue;
    kl += p * (log_p - (l_star[i] - lse_q));
  }
  return std::max(0.0, kl);
}

double topk_distance(std::span<const double> l_star,
                     std::span<const std::uint32_t> indices, std::size_t k) {
  const auto in = membership(l_star, indices, k);
  const std::size_t n = l_star.size();

  double min_in = std::numeric_limits<double>::infinity();
  double max_out = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (in[i]) min_in = std::min(min_in, l_star[i]);
    else max_out = std::max(max_out, l_star[i]);
  }
  if (min_in >= max_out) return 0.0;

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return l_star[a] > l_star[b] || (l_star[a] == l_star[b] && a < b);
  });

  // Members strictly after position u pay (t - l); non-members strictly
  // before it pay (l - t). Entries at position u pay nothing for t = l_u.
  double in_below_sum = 0.0;
  std::size_t in_below_count = 0;
  for (auto i : order) {
    if (in[i]) {
      in_below_sum += l_star[i];
      ++in_below_count;
    }
  }
  double out_above_sum = 0.0;
  std::size_t out_above_count = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t u = 0; u < n; ++u) {
    const std::uint32_t i = order[u];
    const double t = l_star[i];
    if (in[i]) {
      in_below_sum -= t;
      --in_below_count;
    }
    const double cost =
        (out_above_sum - static_cast<double>(out_above_count) * t) +
        (static_cast<double>(in_below_count) * t - in_below_sum);
    best = std::min(best, cost);
    if (!in[i]) {
      out_above_sum += t;
      ++out_above_count;
    }
  }
  return std::max(0.0, best);
}

double topk_distance_oracle(std::span<const double> l_star,
                            std::span<const std::uint32_t> indices,
                            std::size_t k, double grid_step) {
  if (l_star.size() > 20) {
    throw Error(ErrorCode::kTooLarge, "oracle handles at most 20 logits");
  }
  const auto in = membership(l_star, indices, k);
  if (!(grid_step > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "grid_step must be positive");
  }
  const auto [lo_it, hi_it] = std::minmax_element(l_star.begin(), l_star.end());
  const double lo = *lo_it - 1.0;
  const double hi = *hi_it + 1.0;
  double best = std::numeric_limits<double>::infinity();
  const auto steps = static_cast<std::size_t>(std::ceil((hi - lo) / grid_step));
  for (std::size_t s = 0; s <= steps; ++s) {
    best = std::min(best, threshold_cost(l_star, in, lo + grid_step * static_cast<double>(s)));
  }
  for (double t : l_star) best = std::min(best, threshold_cost(l_star, in, t));
  return best;
}

double sentinel_distance(DistanceKind kind, const StepTrace& step) {
  switch (kind) {
    case DistanceKind::kTV: return 1.0;
    case DistanceKind::kKL: return std::numeric_limits<double>::infinity();
    case DistanceKind::kTopK: {
      const auto& idx = step.top_k_indices();
      // A uniform reference of the same width as the index range.
      std::size_t n = idx.size();
      for (auto i : idx) n = std::max<std::size_t>(n, std::size_t{i} + 1);
      const std::vector<double> zeros(n, 0.0);
      return topk_distance(zeros, idx, idx.size());
    }
  }
  return 0.0;
}

DistanceSample measure_step(const StepTrace& step, const std::optional<Logits>& reference,
                            DistanceKind kind) {
  const bool need_logits = kind != DistanceKind::kTopK;
  if (need_logits != step.has_logits()) {
    throw Error(ErrorCode::kModeError,
                std::string(to_string(kind)) + " distance incompatible with step " +
                    std::to_string(step.step_index) + " logging mode");
  }
  DistanceSample s{step.step_index, kind, 0.0, false};
  if (!reference) {
    s.value = sentinel_distance(kind, step);
    s.flagged = true;
  } else if (kind == DistanceKind::kTV) {
    s.value = tv_distance(step.logits(), *reference);
  } else if (kind == DistanceKind::kKL) {
    s.value = kl_divergence(step.logits(), *reference);
  } else {
    const auto& idx = step.top_k_indices();
    s.value = topk_distance(*reference, idx, idx.size());
  }
  return s;
}

std::vector<DistanceSample> measure_trace(
    std::span<const StepTrace> trace,
    std::span<const std::optional<Logits>> reference, DistanceKind kind) {
  if (trace.size() != reference.size()) {
    throw Error(ErrorCode::kShapeError, "trace and reference lengths differ");
  }
  std::vector<DistanceSample> out;
  out.reserve(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out.push_back(measure_step(trace[i], reference[i], kind));
  }
  return out;
}

std::vector<DistanceSample> measure_trace(std::span<const StepTrace> trace,
                                          std::span<const Logits> reference,
                                          DistanceKind kind) {
  std::vector<std::optional<Logits>> wrapped(reference.begin(), reference.end());
  return measure_trace(trace, wrapped, kind);
}

void write_samples_csv(std::ostream& out, std::span<const DistanceSample> samples) {
  out << "step_index,kind,value,flagged\n";
  for (const auto& s : samples) {
    out << s.step_index << ',' << to_string(s.kind) << ',' << real_to_string(s.value)
        << ',' << (s.flagged ? 1 : 0) << '\n';
  }
}

std::vector<DistanceSample> read_samples_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "step_index,kind,value,flagged") {
    throw Error(ErrorCode::kParseError, "missing samples CSV header");
  }
  std::vector<DistanceSample> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string idx, kind, value, flagged;
    if (!std::getline(row, idx, ',') || !std::getline(row, kind, ',') ||
        !std::getline(row, value, ',') || !std::getline(row, flagged)) {
      throw Error(ErrorCode::kParseError, "malformed samples row: " + line);
    }
    DistanceSample s;
    try {
      s.step_index = static_cast<std::uint32_t>(std::stoul(idx));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kParseError, "bad step_index: " + idx);
    }
    s.kind = distance_kind_from_string(kind);
    s.value = real_from_json(Json(value));
    s.flagged = flagged == "1";
    out.push_back(s);
  }
  return out;
}

}  // namespace logitaudit
