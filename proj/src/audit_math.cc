#include "logitaudit/audit_math.h"

#include <algorithm>
#include <cmath>

#include "logitaudit/error.h"

namespace logitaudit {
namespace {

// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double log_pmf(std::uint64_t n, double log_p, double log_q, std::uint64_t j) {
  const double nn = static_cast<double>(n);
  const double jj = static_cast<double>(j);
  return std::lgamma(nn + 1.0) - std::lgamma(jj + 1.0) - std::lgamma(nn - jj + 1.0) +
         jj * log_p + (nn - jj) * log_q;
}

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, std::string(name) + " must lie in [0, 1]");
  }
}

}  // namespace

std::uint64_t required_samples(double alpha, double p_detect, double eta) {
  if (!(alpha > 0.0 && alpha <= 1.0) || !(p_detect > 0.0 && p_detect <= 1.0) ||
      !(eta > 0.0 && eta < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "need alpha, p_detect in (0, 1] and eta in (0, 1)");
  }
  const double q = alpha * p_detect;
  if (q >= 1.0) return 1;
  const double n = std::log(eta) / std::log1p(-q);
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(n)));
}

double binomial_upper_tail(std::uint64_t n, double p, std::uint64_t k) {
  check_probability(p, "p");
  if (k >= n || p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  const double mean = static_cast<double>(n) * p;

  if (static_cast<double>(k) + 1.0 > mean) {
    // Upper tail is the small side: sum it directly, scaled by its first
    // (largest) term, until terms stop mattering.
    const double log_first = log_pmf(n, log_p, log_q, k + 1);
    CompensatedSum s;
    for (std::uint64_t j = k + 1; j <= n; ++j) {
      const double rel = std::exp(log_pmf(n, log_p, log_q, j) - log_first);
      s.add(rel);
      if (rel < 1e-20) break;
    }
    return std::clamp(std::exp(log_first) * s.value(), 0.0, 1.0);
  }
  CompensatedSum lower;
  for (std::uint64_t j = 0; j <= k; ++j) lower.add(std::exp(log_pmf(n, log_p, log_q, j)));
  return std::clamp(1.0 - lower.value(), 0.0, 1.0);
}

double false_reject_prob(std::uint64_t n, double fp, std::uint64_t k) {
  return binomial_upper_tail(n, fp, k);
}

double detect_prob(std::uint64_t n, double p, std::uint64_t k) {
  return binomial_upper_tail(n, p, k);
}

double persistent_evasion_prob(double daily_detect, std::uint64_t days) {
  check_probability(daily_detect, "daily_detect");
  return std::pow(1.0 - daily_detect, static_cast<double>(days));
}

CampaignPlan plan_campaign(double alpha, double p_detect, double eta, double fp,
                           double completeness_target) {
  check_probability(fp, "fp");
  check_probability(completeness_target, "completeness_target");
  CampaignPlan plan;
  plan.alpha = alpha;
  plan.per_request_detect = p_detect;
  plan.evasion_eta = eta;
  plan.n_audits = required_samples(alpha, p_detect, eta);
  for (std::uint64_t k = 0; k < plan.n_audits; ++k) {
    const double fr = false_reject_prob(plan.n_audits, fp, k);
    if (fr <= completeness_target) {
      plan.reject_threshold_k = k;
      plan.false_reject = fr;
      plan.soundness = detect_prob(plan.n_audits, alpha * p_detect, k);
      return plan;
    }
  }
  throw Error(ErrorCode::kInfeasible, "no flag threshold meets the completeness target");
}

Json to_json(const CampaignPlan& plan) {
  return {{"alpha", real_to_string(plan.alpha)},
          {"per_request_detect", real_to_string(plan.per_request_detect)},
          {"evasion_eta", real_to_string(plan.evasion_eta)},
          {"n_audits", plan.n_audits},
          {"reject_threshold_k", plan.reject_threshold_k},
          {"false_reject", real_to_string(plan.false_reject)},
          {"soundness", real_to_string(plan.soundness)}};
}

}  // namespace logitaudit
