#pragma once

// Threshold ceremony for (t1, t2) and peaks-over-threshold estimation of the
// benign false-positive rate with a Generalized Pareto tail.

#include <span>
#include <vector>

#include "logitaudit/json_io.h"
#include "logitaudit/metrics.h"

namespace logitaudit {

// One request's distance samples, sorted ascending; flagged samples are
// stored as +inf so they exceed every threshold.
using RequestCurve = std::vector<double>;

RequestCurve make_request_curve(std::span<const DistanceSample> samples);

// p(t1) of one request.
double request_tail(const RequestCurve& curve, double t1);

struct CeremonyInput {
  std::vector<RequestCurve> benign_stats;
  std::vector<RequestCurve> attack_stats;
  double detection_target = 0.05;
};

struct AuditParams {
  double t1 = 0.0;
  double t2 = 0.0;
  double estimated_fp = 0.0;
  double estimated_detection = 0.0;

  bool operator==(const AuditParams&) const = default;
};

Json to_json(const AuditParams& p);
AuditParams audit_params_from_json(const Json& j);

enum class EvtMethod { kMaximumLikelihood, kProbabilityWeightedMoments };

struct EvtFit {
  double threshold_u = 0.0;
  double shape_xi = 0.0;
  double scale_beta = 1.0;
  double exceed_rate = 0.0;
  std::size_t n_exceedances = 0;
  EvtMethod method = EvtMethod::kMaximumLikelihood;
};

inline constexpr double kDefaultTailFraction = 0.1;
inline constexpr std::size_t kMinEvtSamples = 100;
inline constexpr std::size_t kMinExceedances = 10;

// u is the largest sample value with at least ceil(tail_fraction * n) samples
// strictly above it; the exceedances x - u get a GPD fit by profile maximum
// likelihood (shape restricted to >= -1), falling back to probability
// weighted moments if the optimizer does not converge in 200 iterations.
EvtFit fit_evt(std::span<const double> values,
               double tail_fraction = kDefaultTailFraction);

// exceed_rate * P_GPD[Y > t2 - u], clamped to [0, 1].
// Throws Error(kBelowThreshold) for t2 < u.
double estimate_fp_evt(const EvtFit& fit, double t2);

// Geometric t1 grid from 0.005 to 0.3 with ratio 1.05. Benign and attack
// per-step distances at desk scale sit in the 0.005 to 0.05 range, where a
// coarse grid can step straight over the only usable thresholds.
std::vector<double> default_t1_grid();

// For every t1 in the (increasing) grid, picks the largest t2 among the
// attack corpus's p(t1) order statistics (and 0) that still detects at least
// detection_target of the attack requests, estimates the benign FP at
// (t1, t2), and returns the pair with the lowest estimate. Equal estimates
// are broken by the empirical benign exceedance rate, then by the larger t1.
// Grid points whose benign p(t1) values are too degenerate for a tail fit
// are skipped.
// Throws Error(kCalibrationInfeasible) when no grid point qualifies.
AuditParams run_ceremony(const CeremonyInput& input,
                         std::span<const double> t1_grid,
                         double tail_fraction = kDefaultTailFraction);

}  // namespace logitaudit
