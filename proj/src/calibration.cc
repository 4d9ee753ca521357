#include "logitaudit/calibration.h"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>

#include "logitaudit/error.h"

namespace logitaudit {
namespace {

constexpr std::uintmax_t kMaxOptimizerIterations = 200;

struct Exceedances {
  double u = 0.0;
  std::vector<double> y;  // ascending
};

Exceedances peaks_over_threshold(std::vector<double> x, double tail_fraction) {
  std::sort(x.begin(), x.end());
  const std::size_t n = x.size();
  const auto m = static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(n)));
  // Walk down from the nominal quantile until enough samples are strictly
  // above the candidate (ties at the quantile push u lower).
  for (std::size_t j = n - std::min(n, m); j-- > 0;) {
    const double v = x[j];
    const auto above = static_cast<std::size_t>(x.end() - std::upper_bound(x.begin(), x.end(), v));
    if (above >= m) {
      Exceedances e;
      e.u = v;
      for (auto it = std::upper_bound(x.begin(), x.end(), v); it != x.end(); ++it) {
        e.y.push_back(*it - v);
      }
      return e;
    }
  }
  throw Error(ErrorCode::kInsufficientTail, "no threshold leaves enough exceedances");
}

// mean log(1 + theta * y), stable near theta = 0.
double mean_log1p(const std::vector<double>& y, double theta) {
  double s = 0.0;
  for (double v : y) s += std::log1p(theta * v);
  return s / static_cast<double>(y.size());
}

// Profile log-likelihood per observation for theta = xi / beta.
double profile_loglik(const std::vector<double>& y, double mean_y, double theta) {
  if (std::abs(theta) * mean_y < 1e-10) return -std::log(mean_y) - 1.0;
  const double xi = mean_log1p(y, theta);
  const double beta = xi / theta;
  if (!(beta > 0.0)) return -std::numeric_limits<double>::infinity();
  return -std::log(beta) - (xi + 1.0);
}

EvtFit pwm_fit(const std::vector<double>& y) {
  const double k = static_cast<double>(y.size());
  double a0 = 0.0;
  double a1 = 0.0;
  for (std::size_t j = 0; j < y.size(); ++j) {
    const double p = (static_cast<double>(j + 1) - 0.35) / k;
    a0 += y[j];
    a1 += (1.0 - p) * y[j];
  }
  a0 /= k;
  a1 /= k;
  EvtFit f;
  f.method = EvtMethod::kProbabilityWeightedMoments;
  const double d = a0 - 2.0 * a1;
  f.shape_xi = -(a0 / d - 2.0);
  f.scale_beta = 2.0 * a0 * a1 / d;
  return f;
}

EvtFit mle_fit(const std::vector<double>& y) {
  const double y_max = y.back();
  const double mean_y = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  if (!(y_max > 0.0)) {
    throw Error(ErrorCode::kInsufficientTail, "exceedances are all zero");
  }
  // xi(theta) increases with theta; the lower end is where xi reaches -1.
  double lo = -1.0 / y_max;
  double hi = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mean_log1p(y, mid) < -1.0) lo = mid;
    else hi = mid;
  }
  const double theta_lo = hi;
  const double theta_hi = 1e3 / mean_y;

  std::uintmax_t iters = kMaxOptimizerIterations;
  auto neg = [&](double theta) { return -profile_loglik(y, mean_y, theta); };
  const auto [theta, value] = boost::math::tools::brent_find_minima(
      neg, theta_lo, theta_hi, std::numeric_limits<double>::digits / 2, iters);
  (void)value;
  if (iters >= kMaxOptimizerIterations) {
    throw Error(ErrorCode::kInfeasible, "GPD likelihood did not converge");
  }
  EvtFit f;
  f.method = EvtMethod::kMaximumLikelihood;
  if (std::abs(theta) * mean_y < 1e-10) {
    f.shape_xi = 0.0;
    f.scale_beta = mean_y;
  } else {
    f.shape_xi = mean_log1p(y, theta);
    f.scale_beta = f.shape_xi / theta;
  }
  return f;
}

}  // namespace

RequestCurve make_request_curve(std::span<const DistanceSample> samples) {
  RequestCurve c;
  c.reserve(samples.size());
  for (const auto& s : samples) {
    c.push_back(s.flagged ? std::numeric_limits<double>::infinity() : s.value);
  }
  std::sort(c.begin(), c.end());
  return c;
}

double request_tail(const RequestCurve& curve, double t1) {
  if (curve.empty()) throw Error(ErrorCode::kEmptyTrace, "request has no samples");
  const auto above = curve.end() - std::upper_bound(curve.begin(), curve.end(), t1);
  return static_cast<double>(above) / static_cast<double>(curve.size());
}

Json to_json(const AuditParams& p) {
  return {{"t1", real_to_string(p.t1)},
          {"t2", real_to_string(p.t2)},
          {"estimated_fp", real_to_string(p.estimated_fp)},
          {"estimated_detection", real_to_string(p.estimated_detection)}};
}

AuditParams audit_params_from_json(const Json& j) {
  AuditParams p;
  try {
    p.t1 = real_from_json(j.at("t1"));
    p.t2 = real_from_json(j.at("t2"));
    p.estimated_fp = real_from_json(j.at("estimated_fp"));
    p.estimated_detection = real_from_json(j.at("estimated_detection"));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
  return p;
}

EvtFit fit_evt(std::span<const double> values, double tail_fraction) {
  if (values.size() < kMinEvtSamples) {
    throw Error(ErrorCode::kInvalidArgument, "need at least 100 values for a tail fit");
  }
  if (!(tail_fraction > 0.0 && tail_fraction <= 0.5)) {
    throw Error(ErrorCode::kInvalidArgument, "tail_fraction must lie in (0, 0.5]");
  }
  const Exceedances ex =
      peaks_over_threshold(std::vector<double>(values.begin(), values.end()), tail_fraction);
  if (ex.y.size() < kMinExceedances) {
    throw Error(ErrorCode::kInsufficientTail,
                std::to_string(ex.y.size()) + " exceedances, need 10");
  }
  EvtFit f;
  try {
    f = mle_fit(ex.y);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInsufficientTail) throw;
    f = pwm_fit(ex.y);
  }
  if (!(f.scale_beta > 0.0) || !std::isfinite(f.shape_xi)) {
    throw Error(ErrorCode::kInsufficientTail, "degenerate exceedances");
  }
  f.threshold_u = ex.u;
  f.n_exceedances = ex.y.size();
  f.exceed_rate = static_cast<double>(ex.y.size()) / static_cast<double>(values.size());
  return f;
}

double estimate_fp_evt(const EvtFit& fit, double t2) {
  if (t2 < fit.threshold_u) {
    throw Error(ErrorCode::kBelowThreshold, "t2 lies below the POT threshold");
  }
  const double y = t2 - fit.threshold_u;
  double tail = 0.0;
  if (std::abs(fit.shape_xi) < 1e-12) {
    tail = std::exp(-y / fit.scale_beta);
  } else {
    const double base = 1.0 + fit.shape_xi * y / fit.scale_beta;
    tail = base <= 0.0 ? 0.0 : std::pow(base, -1.0 / fit.shape_xi);
  }
  return std::clamp(fit.exceed_rate * tail, 0.0, 1.0);
}

std::vector<double> default_t1_grid() {
  std::vector<double> grid;
  for (double t = 0.005; t <= 0.3; t *= 1.05) grid.push_back(t);
  return grid;
}

AuditParams run_ceremony(const CeremonyInput& input, std::span<const double> t1_grid,
                         double tail_fraction) {
  if (input.benign_stats.empty() || input.attack_stats.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "ceremony corpora must be non-empty");
  }
  if (!(input.detection_target > 0.0 && input.detection_target < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "detection_target must lie in (0, 1)");
  }
  if (t1_grid.empty() ||
      std::adjacent_find(t1_grid.begin(), t1_grid.end(), std::greater_equal<>()) != t1_grid.end()) {
    throw Error(ErrorCode::kInvalidArgument, "t1 grid must be non-empty and strictly increasing");
  }

  const double n_attack = static_cast<double>(input.attack_stats.size());
  const auto needed = static_cast<std::size_t>(std::ceil(input.detection_target * n_attack - 1e-9));

  std::optional<AuditParams> best;
  double best_empirical = 1.0;
  for (double t1 : t1_grid) {
    std::vector<double> attack;
    for (const auto& c : input.attack_stats) attack.push_back(request_tail(c, t1));
    std::vector<double> benign;
    for (const auto& c : input.benign_stats) benign.push_back(request_tail(c, t1));

    std::sort(attack.begin(), attack.end(), std::greater<>());
    const double must_stay_below = attack[needed - 1];
    // Largest candidate strictly below the needed order statistic.
    double t2 = -1.0;
    for (double a : attack) {
      if (a < must_stay_below) {
        t2 = a;
        break;
      }
    }
    if (t2 < 0.0 && must_stay_below > 0.0) t2 = 0.0;
    if (t2 < 0.0) continue;

    const auto detected = std::count_if(attack.begin(), attack.end(), [t2](double a) { return a > t2; });

    const double empirical =
        static_cast<double>(std::count_if(benign.begin(), benign.end(), [t2](double b) { return b > t2; })) /
        static_cast<double>(benign.size());
    double fp = 0.0;
    try {
      const EvtFit fit = fit_evt(benign, tail_fraction);
      fp = t2 >= fit.threshold_u ? estimate_fp_evt(fit, t2) : empirical;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kInsufficientTail || e.code() == ErrorCode::kInvalidArgument) {
        continue;
      }
      throw;
    }

    AuditParams p{t1, t2, fp, static_cast<double>(detected) / n_attack};
    // Ties on the estimate (often several exact zeros from a bounded GPD
    // tail) go to the lower empirical benign rate, then to the larger t1.
    if (!best || p.estimated_fp < best->estimated_fp ||
        (p.estimated_fp == best->estimated_fp && empirical <= best_empirical)) {
      best = p;
      best_empirical = empirical;
    }
  }
  if (!best) {
    throw Error(ErrorCode::kCalibrationInfeasible,
                "no (t1, t2) reaches the detection target with a usable benign tail");
  }
  return *best;
}

}  // namespace logitaudit
