#include <boost/math/distributions/binomial.hpp>
#include <boost/multiprecision/cpp_dec_float.hpp>
#include <cmath>
#include <random>

#include "doctest.h"
#include "logitaudit/audit_math.h"
#include "logitaudit/error.h"

using namespace logitaudit;
using boost::multiprecision::cpp_dec_float_50;

namespace {

// P[X > k] by direct summation of the lower tail in 50-digit arithmetic.
double hp_upper_tail(unsigned n, double p_in, unsigned k) {
  const cpp_dec_float_50 p(p_in);
  const cpp_dec_float_50 q = cpp_dec_float_50(1) - p;
  cpp_dec_float_50 coeff = 1;
  cpp_dec_float_50 lower = 0;
  for (unsigned j = 0; j <= k; ++j) {
    if (j > 0) coeff = coeff * (n - j + 1) / j;
    lower += coeff * pow(p, j) * pow(q, n - j);
  }
  return static_cast<double>(cpp_dec_float_50(1) - lower);
}

double boost_upper_tail(unsigned n, double p, unsigned k) {
  return boost::math::cdf(boost::math::complement(boost::math::binomial(n, p), k));
}

double poisson_upper_tail(double lambda, unsigned k) {
  double term = std::exp(-lambda);
  double lower = 0.0;
  for (unsigned j = 0; j <= k; ++j) {
    if (j > 0) term *= lambda / j;
    lower += term;
  }
  return -std::expm1(std::log(lower));
}

}  // namespace

TEST_CASE("required_samples: smallest n with (1 - alpha p)^n <= eta") {
  const auto n = required_samples(0.1, 0.01, 0.05);
  CHECK(n == 2995);
  // Independent check of minimality in extended precision.
  const long double q = 1.0L - 0.1L * 0.01L;
  CHECK(std::pow(q, static_cast<long double>(n)) <= 0.05L);
  CHECK(std::pow(q, static_cast<long double>(n - 1)) > 0.05L);
}

TEST_CASE("required_samples: certain detection and log-linearity in eta") {
  CHECK(required_samples(1.0, 1.0, 0.5) == 1);
  const auto n1 = required_samples(0.1, 0.01, 0.05);
  const auto n2 = required_samples(0.1, 0.01, 0.05 * 0.05);
  CHECK(n2 >= 2 * n1 - 1);
  CHECK(n2 <= 2 * n1);
}

TEST_CASE("required_samples: monotone in alpha, p_detect and eta") {
  CHECK(required_samples(0.2, 0.01, 0.05) < required_samples(0.1, 0.01, 0.05));
  CHECK(required_samples(0.1, 0.02, 0.05) < required_samples(0.1, 0.01, 0.05));
  CHECK(required_samples(0.1, 0.01, 0.01) > required_samples(0.1, 0.01, 0.05));
}

TEST_CASE("required_samples: degenerate inputs") {
  CHECK_THROWS_AS(required_samples(0.0, 0.01, 0.05), Error);
  CHECK_THROWS_AS(required_samples(0.1, 1.5, 0.05), Error);
  CHECK_THROWS_AS(required_samples(0.1, 0.01, 1.0), Error);
  CHECK_THROWS_AS(required_samples(0.1, 0.01, 0.0), Error);
  try {
    required_samples(0.1, 0.01, 1.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidArgument);
  }
}

TEST_CASE("false_reject_prob at the completeness setting") {
  const double v = false_reject_prob(3000, 1e-5, 3);
  CHECK(v <= 1e-7);
  CHECK(v == doctest::Approx(hp_upper_tail(3000, 1e-5, 3)).epsilon(1e-8));
  CHECK(v == doctest::Approx(boost_upper_tail(3000, 1e-5, 3)).epsilon(1e-6));
  const double poisson = poisson_upper_tail(0.03, 3);
  CHECK(std::abs(v - poisson) / poisson < 0.1);
}

TEST_CASE("detect_prob at the soundness setting") {
  const double v = detect_prob(3000, 1e-3, 3);
  CHECK(v >= 0.30);
  CHECK(v <= 0.40);
  CHECK(v == doctest::Approx(hp_upper_tail(3000, 1e-3, 3)).epsilon(1e-10));
  CHECK(v == doctest::Approx(0.3528).epsilon(1e-3));
  CHECK(v == doctest::Approx(poisson_upper_tail(3.0, 3)).epsilon(0.01));
}

TEST_CASE("binomial tails: trivial edges") {
  CHECK(false_reject_prob(100, 0.0, 3) == 0.0);
  CHECK(false_reject_prob(1, 1.0, 0) == 1.0);
  CHECK(false_reject_prob(50, 1.0, 0) == 1.0);
  CHECK(detect_prob(3000, 0.0, 3) == 0.0);
  CHECK(binomial_upper_tail(10, 0.5, 10) == 0.0);
  CHECK_THROWS_AS(binomial_upper_tail(10, -0.1, 1), Error);
}

TEST_CASE("binomial tails agree with boost across both summation branches") {
  for (unsigned n : {1u, 7u, 40u, 500u, 3000u}) {
    for (double p : {1e-6, 1e-3, 0.05, 0.3, 0.5, 0.9, 0.999}) {
      for (unsigned k : {0u, 1u, 3u, 10u, 200u}) {
        if (k >= n) continue;
        const double expected = boost_upper_tail(n, p, k);
        const double got = binomial_upper_tail(n, p, k);
        if (expected > 1e-250) {
          CHECK(got == doctest::Approx(expected).epsilon(1e-9).scale(1.0));
        }
      }
    }
  }
}

TEST_CASE("binomial tails: monotonicities") {
  CHECK(false_reject_prob(3000, 2e-5, 3) > false_reject_prob(3000, 1e-5, 3));
  CHECK(false_reject_prob(6000, 1e-5, 3) > false_reject_prob(3000, 1e-5, 3));
  CHECK(false_reject_prob(3000, 1e-5, 4) < false_reject_prob(3000, 1e-5, 3));
  CHECK(detect_prob(3000, 2e-3, 3) > detect_prob(3000, 1e-3, 3));
}

TEST_CASE("binomial tail agrees with simulation") {
  std::mt19937_64 rng(7);
  std::binomial_distribution<int> draw(3000, 1e-3);
  const int trials = 200000;
  int hits = 0;
  for (int t = 0; t < trials; ++t) hits += draw(rng) > 3;
  const double p = detect_prob(3000, 1e-3, 3);
  const double se = std::sqrt(p * (1 - p) / trials);
  CHECK(std::abs(static_cast<double>(hits) / trials - p) < 3 * se);
}

TEST_CASE("monthly persistence from the daily detection") {
  const double d = detect_prob(3000, 1e-3, 3);
  const double evade = persistent_evasion_prob(d, 30);
  CHECK(evade == doctest::Approx(std::pow(1 - d, 30)).epsilon(1e-12));
  CHECK(1 - evade >= 1 - std::pow(0.7, 30));
}

TEST_CASE("plan_campaign") {
  SUBCASE("completeness setting gives three tolerated flags") {
    const auto plan = plan_campaign(0.1, 0.01, 0.05, 1e-5, 1e-7);
    CHECK(plan.n_audits == 2995);
    CHECK(plan.reject_threshold_k == 3);
    CHECK(plan.false_reject <= 1e-7);
    CHECK(plan.soundness == doctest::Approx(hp_upper_tail(2995, 1e-3, 3)).epsilon(1e-9));
  }
  SUBCASE("fp = 0 needs no tolerance") {
    CHECK(plan_campaign(0.1, 0.01, 0.05, 0.0, 1e-7).reject_threshold_k == 0);
  }
  SUBCASE("target 1 is always met at k = 0") {
    CHECK(plan_campaign(0.1, 0.01, 0.05, 0.5, 1.0).reject_threshold_k == 0);
  }
  SUBCASE("unreachable target: every audit is a false positive") {
    try {
      plan_campaign(0.1, 0.01, 0.05, 1.0, 0.5);
      FAIL("expected Infeasible");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kInfeasible);
    }
  }
  SUBCASE("plan JSON") {
    const auto j = to_json(plan_campaign(0.1, 0.01, 0.05, 1e-5, 1e-7));
    CHECK(j.at("n_audits").get<int>() == 2995);
    CHECK(j.at("reject_threshold_k").get<int>() == 3);
  }
}
