#include <algorithm>
#include <boost/multiprecision/cpp_dec_float.hpp>
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "logitaudit/error.h"
#include "logitaudit/metrics.h"

using namespace logitaudit;
using boost::multiprecision::cpp_dec_float_50;

namespace {

double hp_tv(const std::vector<double>& a, const std::vector<double>& b) {
  auto probs = [](const std::vector<double>& l) {
    std::vector<cpp_dec_float_50> p;
    cpp_dec_float_50 z = 0;
    for (double x : l) {
      p.push_back(exp(cpp_dec_float_50(x)));
      z += p.back();
    }
    for (auto& v : p) v /= z;
    return p;
  };
  const auto p = probs(a), q = probs(b);
  cpp_dec_float_50 s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) s += abs(p[i] - q[i]);
  return static_cast<double>(s / 2);
}

double hp_kl(const std::vector<double>& a, const std::vector<double>& b) {
  cpp_dec_float_50 za = 0, zb = 0;
  for (double x : a) za += exp(cpp_dec_float_50(x));
  for (double x : b) zb += exp(cpp_dec_float_50(x));
  cpp_dec_float_50 s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const cpp_dec_float_50 p = exp(cpp_dec_float_50(a[i])) / za;
    const cpp_dec_float_50 q = exp(cpp_dec_float_50(b[i])) / zb;
    s += p * log(p / q);
  }
  return static_cast<double>(s);
}

std::vector<double> random_logits(std::mt19937_64& rng, std::size_t n, double scale = 3.0) {
  std::normal_distribution<double> z(0.0, scale);
  std::vector<double> l(n);
  for (auto& x : l) x = z(rng);
  return l;
}

IndexSet random_subset(std::mt19937_64& rng, std::size_t n, std::size_t k) {
  IndexSet all(n);
  std::iota(all.begin(), all.end(), 0u);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(k);
  return all;
}

// Exhaustive cost over candidate thresholds with plain loops; no sorting,
// no running sums. Independent of both library implementations.
double candidate_scan(const std::vector<double>& l, const IndexSet& idx) {
  std::vector<bool> in(l.size(), false);
  for (auto i : idx) in[i] = true;
  double best = INFINITY;
  for (double t : l) {
    double cost = 0;
    for (std::size_t j = 0; j < l.size(); ++j) {
      cost += in[j] ? std::max(0.0, t - l[j]) : std::max(0.0, l[j] - t);
    }
    best = std::min(best, cost);
  }
  return best;
}

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kParseError;
}

}  // namespace

TEST_CASE("softmax is shift-invariant and normalized even for huge logits") {
  const auto p = softmax(std::vector<double>{1000.0, 1000.0, -1000.0});
  CHECK(p[0] == doctest::Approx(0.5));
  CHECK(p[2] == 0.0);
  CHECK(softmax(std::vector<double>{1, 2, 3}) == softmax(std::vector<double>{101, 102, 103}));
}

TEST_CASE("tv_distance examples") {
  const std::vector<double> v{0.5, -1.0, 2.0};
  CHECK(tv_distance(v, v) == 0.0);
  CHECK(tv_distance(v, std::vector<double>{3.5, 2.0, 5.0}) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
  const std::vector<double> a{0, 0}, b{10, -10};
  const double expected = hp_tv(a, b);
  CHECK(tv_distance(a, b) == doctest::Approx(expected).epsilon(1e-13));
  // Closed form: |0.5 - s1| with s1 = 1/(1+e^-20).
  CHECK(expected == doctest::Approx(1.0 / (1.0 + std::exp(-20.0)) - 0.5).epsilon(1e-12));
  CHECK(code_of([] { tv_distance(std::vector<double>{1}, std::vector<double>{1, 2}); }) ==
        ErrorCode::kShapeError);
}

TEST_CASE("tv and kl agree with 50-digit evaluation on random pairs") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = random_logits(rng, 2 + trial % 40);
    const auto b = random_logits(rng, a.size());
    CHECK(tv_distance(a, b) == doctest::Approx(hp_tv(a, b)).epsilon(1e-11).scale(1e-3));
    CHECK(kl_divergence(a, b) == doctest::Approx(hp_kl(a, b)).epsilon(1e-10).scale(1e-3));
  }
}

TEST_CASE("tv: symmetry, range and triangle inequality; kl: non-negativity and Pinsker") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + trial % 30;
    const auto a = random_logits(rng, n), b = random_logits(rng, n), c = random_logits(rng, n);
    const double ab = tv_distance(a, b);
    CHECK(ab == tv_distance(b, a));
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
    CHECK(tv_distance(a, c) <= ab + tv_distance(b, c) + 1e-12);
    const double kl = kl_divergence(a, b);
    CHECK(kl >= 0.0);
    CHECK(kl >= 2.0 * ab * ab - 1e-12);
  }
  const std::vector<double> v{1, 2, 3};
  CHECK(kl_divergence(v, v) == 0.0);
  // p_i = 0 contributes nothing.
  CHECK(std::isfinite(kl_divergence(std::vector<double>{0, -2000}, std::vector<double>{0, 0})));
}

TEST_CASE("topk_distance worked examples") {
  CHECK(topk_distance(std::vector<double>{3, 2, 1}, IndexSet{0}, 1) == 0.0);
  CHECK(topk_distance(std::vector<double>{1, 2, 3}, IndexSet{0}, 1) == doctest::Approx(2.0));
  CHECK(topk_distance(std::vector<double>{5, 4, 3, 2}, IndexSet{0, 2}, 2) == doctest::Approx(1.0));
  CHECK(topk_distance_oracle(std::vector<double>{1, 2, 3}, IndexSet{0}, 1) == doctest::Approx(2.0));
  CHECK(topk_distance_oracle(std::vector<double>{5, 4, 3, 2}, IndexSet{0, 2}, 2) == doctest::Approx(1.0));
  // Order of the index set does not matter.
  CHECK(topk_distance(std::vector<double>{5, 4, 3, 2}, IndexSet{2, 0}, 2) == doctest::Approx(1.0));
}

TEST_CASE("topk_distance errors") {
  const std::vector<double> l{1, 2, 3};
  CHECK(code_of([&] { topk_distance(l, IndexSet{5}, 1); }) == ErrorCode::kIndexError);
  CHECK(code_of([&] { topk_distance(l, IndexSet{0, 1}, 1); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([&] { topk_distance(l, IndexSet{0, 0}, 2); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([&] { topk_distance_oracle(std::vector<double>(21), IndexSet{0}, 1); }) ==
        ErrorCode::kTooLarge);
}

TEST_CASE("topk_distance agrees with the oracle and an exhaustive candidate scan") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 1 + rng() % 20;
    const std::size_t k = 1 + rng() % n;
    std::vector<double> l(n);
    for (auto& x : l) x = u(rng);
    const auto idx = random_subset(rng, n, k);
    const double fast = topk_distance(l, idx, k);
    CHECK(std::abs(fast - topk_distance_oracle(l, idx, k)) <= 1e-9);
    CHECK(std::abs(fast - candidate_scan(l, idx)) <= 1e-9);
  }
}

TEST_CASE("topk_distance: zero exactly on valid top-k sets, including ties") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + rng() % 40;
    std::vector<double> l(n);
    for (auto& x : l) x = static_cast<double>(static_cast<int>(rng() % 7));
    const std::size_t k = 1 + rng() % n;
    CHECK(topk_distance(l, top_k_indices(l, k), k) == 0.0);
  }
  // With a tie at the boundary the lower index is the valid one; the other
  // tied index still costs nothing to promote, so the distance is 0 too.
  CHECK(topk_distance(std::vector<double>{1, 1}, IndexSet{1}, 1) == 0.0);
  CHECK(topk_distance(std::vector<double>{1, 1, 0}, IndexSet{2}, 1) == doctest::Approx(1.0));
}

TEST_CASE("topk_distance is 1-Lipschitz per coordinate") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-10, 10), e(-0.5, 0.5);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng() % 18;
    const std::size_t k = 1 + rng() % (n - 1);
    std::vector<double> l(n);
    for (auto& x : l) x = u(rng);
    const auto idx = random_subset(rng, n, k);
    auto p = l;
    const double eps = e(rng);
    p[rng() % n] += eps;
    CHECK(std::abs(topk_distance(p, idx, k) - topk_distance(l, idx, k)) <= std::abs(eps) + 1e-12);
  }
}

TEST_CASE("cost(t) is affine between adjacent sorted logits") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-10, 10), w(0, 1);
  auto cost = [](const std::vector<double>& l, const IndexSet& idx, double t) {
    std::vector<bool> in(l.size(), false);
    for (auto i : idx) in[i] = true;
    double c = 0;
    for (std::size_t j = 0; j < l.size(); ++j) {
      c += in[j] ? std::max(0.0, t - l[j]) : std::max(0.0, l[j] - t);
    }
    return c;
  };
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 3 + rng() % 10;
    std::vector<double> l(n);
    for (auto& x : l) x = u(rng);
    const auto idx = random_subset(rng, n, 1 + rng() % (n - 1));
    auto sorted = l;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t seg = rng() % (n - 1);
    const double lo = sorted[seg], hi = sorted[seg + 1];
    const double a = lo + (hi - lo) * 0.1, b = lo + (hi - lo) * 0.9;
    const double m = a + (b - a) * w(rng);
    const double interp = cost(l, idx, a) + (cost(l, idx, b) - cost(l, idx, a)) * (m - a) / (b - a);
    CHECK(cost(l, idx, m) == doctest::Approx(interp).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("sentinel values and measure_step") {
  StepTrace full;
  full.payload = Logits{1.0, 2.0, 3.0};
  full.decision = {kDummyDecision};
  CHECK(sentinel_distance(DistanceKind::kTV, full) == 1.0);
  CHECK(std::isinf(sentinel_distance(DistanceKind::kKL, full)));

  StepTrace compact;
  compact.payload = IndexSet{0, 2};
  compact.decision = {0};
  // Against a uniform-zero reference only the threshold tie matters.
  CHECK(sentinel_distance(DistanceKind::kTopK, compact) == 0.0);

  const auto missing = measure_step(full, std::nullopt, DistanceKind::kTV);
  CHECK(missing.flagged);
  CHECK(missing.value == 1.0);
  const auto same = measure_step(full, Logits{1.0, 2.0, 3.0}, DistanceKind::kTV);
  CHECK_FALSE(same.flagged);
  CHECK(same.value == 0.0);
  CHECK(code_of([&] { measure_step(full, Logits{1, 2, 3}, DistanceKind::kTopK); }) ==
        ErrorCode::kModeError);
  CHECK(code_of([&] { measure_step(compact, Logits{1, 2, 3}, DistanceKind::kTV); }) ==
        ErrorCode::kModeError);
  const auto topk = measure_step(compact, Logits{3, 2, 1}, DistanceKind::kTopK);
  CHECK(topk.value == doctest::Approx(1.0));
}

TEST_CASE("measure_trace on model runs") {
  ModelSpec spec;
  HybridModel ref(spec);
  std::mt19937_64 rng(8);
  Seed256 seed{};
  const Prompt p{3, 1, 4, 1, 5};

  CHECK(measure_trace(std::span<const StepTrace>{}, std::span<const Logits>{}, DistanceKind::kTV).empty());

  DeployedModel exact(spec, DeviationConfig::benign(0.0));
  const auto r0 = exact.run(p, seed, LoggingMode::kFull, rng);
  std::vector<IndexSet> d0;
  for (const auto& s : r0.trace) d0.push_back(s.decision);
  const auto star0 = reexecute_aligned(ref, p, d0);
  for (const auto& s : measure_trace(r0.trace, star0, DistanceKind::kTV)) CHECK(s.value == 0.0);
  CHECK_THROWS_AS(measure_trace(r0.trace, std::span(star0).first(1), DistanceKind::kTV), Error);

  DeployedModel noisy(spec, DeviationConfig::benign(0.01));
  std::vector<double> values;
  for (int trial = 0; trial < 50; ++trial) {
    seed[0] = static_cast<std::uint8_t>(trial);
    const auto r = noisy.run(p, seed, LoggingMode::kFull, rng);
    std::vector<IndexSet> d;
    for (const auto& s : r.trace) d.push_back(s.decision);
    const auto samples = measure_trace(r.trace, reexecute_aligned(ref, p, d), DistanceKind::kTV);
    REQUIRE(samples.size() == r.trace.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      CHECK(samples[i].step_index == i);
      CHECK(samples[i].value >= 0.0);
      CHECK(samples[i].value <= 1.0);
      values.push_back(samples[i].value);
    }
  }
  std::nth_element(values.begin(), values.begin() + values.size() / 2, values.end());
  CHECK(values[values.size() / 2] < 0.05);
}

TEST_CASE("distance kinds and CSV round trip") {
  CHECK(distance_kind_from_string(to_string(DistanceKind::kKL)) == DistanceKind::kKL);
  CHECK(to_string(DistanceKind::kTopK) == "TopK");
  CHECK_THROWS_AS(distance_kind_from_string("L2"), Error);
  const std::vector<DistanceSample> s{{0, DistanceKind::kTV, 0.125, false},
                                      {1, DistanceKind::kTV, 0.1 + 0.2, false},
                                      {2, DistanceKind::kTV, 1.0, true}};
  std::stringstream ss;
  write_samples_csv(ss, s);
  CHECK(ss.str().rfind("step_index,kind,value,flagged\n", 0) == 0);
  CHECK(read_samples_csv(ss) == s);
}
