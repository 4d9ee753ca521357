#pragma once

// Randomized-auditing arithmetic: how many audits to run and what the
// binomial tails say about completeness and soundness.

#include <cstdint>

#include "logitaudit/json_io.h"

namespace logitaudit {

// ceil(ln eta / ln(1 - alpha * p_detect)); 1 when detection is certain.
// Throws Error(kInvalidArgument) unless alpha, p_detect in (0, 1] and
// eta in (0, 1).
std::uint64_t required_samples(double alpha, double p_detect, double eta);

// P[Binomial(n, p) > k], evaluated in log space with log-gamma coefficients
// and compensated summation over whichever tail is smaller.
double binomial_upper_tail(std::uint64_t n, double p, std::uint64_t k);

// Probability that an honest server with per-request false positive rate
// `fp` collects more than k flags out of n audits.
double false_reject_prob(std::uint64_t n, double fp, std::uint64_t k);

// Probability that more than k of n audits are detected when each audit is
// detected independently with probability p.
double detect_prob(std::uint64_t n, double p, std::uint64_t k);

// (1 - daily_detect)^days.
double persistent_evasion_prob(double daily_detect, std::uint64_t days);

struct CampaignPlan {
  double alpha = 0.0;
  double per_request_detect = 0.0;
  double evasion_eta = 0.0;
  std::uint64_t n_audits = 1;
  std::uint64_t reject_threshold_k = 0;
  // Realized bounds of the plan.
  double false_reject = 0.0;
  double soundness = 0.0;
};

// n from required_samples, k the smallest count with
// false_reject_prob(n, fp, k) <= completeness_target, soundness evaluated at
// the folded per-audit detection alpha * p_detect.
// Throws Error(kInfeasible) when no k < n meets the target.
CampaignPlan plan_campaign(double alpha, double p_detect, double eta, double fp,
                           double completeness_target);

Json to_json(const CampaignPlan& plan);

}  // namespace logitaudit
