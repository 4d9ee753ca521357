#include "logitaudit/core_model.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iterator>
#include <numeric>
#include <string>

#include "logitaudit/error.h"
#include "logitaudit/prf.h"

namespace logitaudit {
namespace {

// Scale of the output heads; sets how peaked the token distributions are.
constexpr double kLogitGain = 2.0;
constexpr double kExpertShiftScale = 0.5;

// Weight domains for the counter-mode PRF.
enum : std::uint64_t {
  kDomPromptEmbedding = 1,
  kDomPromptRecurrence,
  kDomW1,
  kDomB1,
  kDomOut,
  kDomRouter,
  kDomExpertShift,
  kDomRecurrence,
  kDomDecisionEmbedding,
  kDomTokenBias,
  kDomRouterBias,
  kDomSample,
};

// Uniform entries with standard deviation `scale`.
std::vector<double> prf_matrix(std::uint64_t seed, std::uint64_t domain,
                               std::size_t count, double scale) {
  std::vector<double> out(count);
  const double half_width = std::sqrt(3.0) * scale;
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = (2.0 * to_unit(prf64(seed, domain, i)) - 1.0) * half_width;
  }
  return out;
}

// tanh through a single exp: cheaper than the libm routine and accurate to a
// few ulps, which is all the synthetic model needs.
inline double squash(double x) {
  const double e = std::exp(-2.0 * std::abs(x));
  const double t = (1.0 - e) / (1.0 + e);
  return std::copysign(t, x);
}

// y = M x for a row-major rows x cols matrix. Rows are processed eight at a
// time so the accumulations run as independent chains; each row is still
// summed in column order, so results do not depend on the blocking.
void matvec(const std::vector<double>& m, std::span<const double> x,
            std::size_t rows, double* y) {
  const std::size_t cols = x.size();
  constexpr std::size_t kBlock = 8;
  std::size_t r = 0;
  for (; r + kBlock <= rows; r += kBlock) {
    double acc[kBlock] = {};
    const double* base = m.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) {
      const double xc = x[c];
      for (std::size_t b = 0; b < kBlock; ++b) acc[b] += base[b * cols + c] * xc;
    }
    for (std::size_t b = 0; b < kBlock; ++b) y[r + b] = acc[b];
  }
  for (; r < rows; ++r) {
    const double* row = m.data() + r * cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
}

void check_state(std::span<const double> state, std::size_t hidden_dim) {
  if (state.size() != hidden_dim) {
    throw Error(ErrorCode::kShapeError,
                "state has length " + std::to_string(state.size()) +
                    ", expected " + std::to_string(hidden_dim));
  }
}

void check_finite_non_negative(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(name) + " must be a finite non-negative real");
  }
}

}  // namespace

void ModelSpec::validate() const {
  auto fail = [](const std::string& msg) {
    throw Error(ErrorCode::kInvalidArgument, msg);
  };
  if (hidden_dim == 0) fail("hidden_dim must be positive");
  if (vocab_size < 2) fail("vocab_size must be at least 2");
  if (top_k_tokens == 0 || top_k_tokens > vocab_size) {
    fail("top_k_tokens must lie in [1, vocab_size]");
  }
  if (max_steps == 0) fail("max_steps must be positive");
  if (num_experts == 0 && top_k_experts.has_value()) {
    fail("top_k_experts requires num_experts > 0");
  }
  if (num_experts > 0) {
    if (!top_k_experts) fail("top_k_experts required when num_experts > 0");
    if (*top_k_experts == 0 || *top_k_experts > num_experts) {
      fail("top_k_experts must lie in [1, num_experts]");
    }
  }
}

void DeviationConfig::validate() const {
  check_finite_non_negative(noise_sigma, "noise_sigma");
  check_finite_non_negative(bias_scale, "bias_scale");
  check_finite_non_negative(fabrication_sigma, "fabrication_sigma");
  auto fail = [](const std::string& msg) {
    throw Error(ErrorCode::kInvalidArgument, msg);
  };
  if (kind != DeviationKind::kSubstituted) {
    if (bias_scale != 0.0) fail("bias_scale is only meaningful for Substituted");
    if (substitute_seed) fail("substitute_seed is only meaningful for Substituted");
  }
  if (kind == DeviationKind::kOverreport) {
    if (dummy_steps < 1) fail("Overreport requires dummy_steps >= 1");
  } else if (dummy_steps != 0) {
    fail("dummy_steps is only meaningful for Overreport");
  }
  if (kind != DeviationKind::kFabricated && fabrication_sigma != 0.0) {
    fail("fabrication_sigma is only meaningful for Fabricated");
  }
}

DeviationConfig DeviationConfig::benign(double sigma) {
  DeviationConfig d;
  d.noise_sigma = sigma;
  return d;
}

DeviationConfig DeviationConfig::quantized(double sigma) {
  DeviationConfig d;
  d.kind = DeviationKind::kQuantized;
  d.noise_sigma = sigma;
  return d;
}

DeviationConfig DeviationConfig::substituted(double bias, double sigma) {
  DeviationConfig d;
  d.kind = DeviationKind::kSubstituted;
  d.bias_scale = bias;
  d.noise_sigma = sigma;
  return d;
}

DeviationConfig DeviationConfig::substituted_weights(std::uint64_t seed,
                                                     double sigma) {
  DeviationConfig d;
  d.kind = DeviationKind::kSubstituted;
  d.substitute_seed = seed;
  d.noise_sigma = sigma;
  return d;
}

DeviationConfig DeviationConfig::overreport(std::uint32_t dummy_steps,
                                            double sigma) {
  DeviationConfig d;
  d.kind = DeviationKind::kOverreport;
  d.dummy_steps = dummy_steps;
  d.noise_sigma = sigma;
  return d;
}

DeviationConfig DeviationConfig::fabricated(double fabrication_sigma,
                                            double sigma) {
  DeviationConfig d;
  d.kind = DeviationKind::kFabricated;
  d.fabrication_sigma = fabrication_sigma;
  d.noise_sigma = sigma;
  return d;
}

HybridModel::HybridModel(ModelSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  const std::size_t h = spec_.hidden_dim;
  const std::size_t v = spec_.vocab_size;
  const std::size_t e = spec_.num_experts;
  const double inv_sqrt_h = 1.0 / std::sqrt(static_cast<double>(h));
  const std::uint64_t s = spec_.seed;

  prompt_embedding_ = prf_matrix(s, kDomPromptEmbedding, v * h, 1.0);
  prompt_recurrence_ = prf_matrix(s, kDomPromptRecurrence, h * h, inv_sqrt_h);
  w1_ = prf_matrix(s, kDomW1, h * h, 1.5 * inv_sqrt_h);
  b1_ = prf_matrix(s, kDomB1, h, 0.1);
  w_out_ = prf_matrix(s, kDomOut, v * h, kLogitGain * inv_sqrt_h);
  w_router_ = prf_matrix(s, kDomRouter, e * h, kLogitGain * inv_sqrt_h);
  expert_shift_ = prf_matrix(s, kDomExpertShift, e * h, kExpertShiftScale);
  recurrence_ = prf_matrix(s, kDomRecurrence, h * h, inv_sqrt_h);
  decision_embedding_ = prf_matrix(s, kDomDecisionEmbedding, v * h, 1.0);
}

HiddenState HybridModel::embed(std::span<const TokenId> prompt) const {
  if (prompt.empty()) {
    throw Error(ErrorCode::kInvalidPrompt, "prompt must be non-empty");
  }
  const std::size_t h = spec_.hidden_dim;
  HiddenState state(h, 0.0);
  HiddenState next(h);
  for (TokenId tok : prompt) {
    if (tok >= spec_.vocab_size) {
      throw Error(ErrorCode::kInvalidPrompt,
                  "token id " + std::to_string(tok) + " out of range");
    }
    matvec(prompt_recurrence_, state, h, next.data());
    const double* emb = prompt_embedding_.data() + std::size_t{tok} * h;
    for (std::size_t i = 0; i < h; ++i) next[i] = squash(next[i] + emb[i]);
    state.swap(next);
  }
  return state;
}

DecisionKind HybridModel::kind_at(std::size_t position) const {
  if (!spec_.moe()) return DecisionKind::kTokenSample;
  return position % 2 == 0 ? DecisionKind::kExpertRoute
                           : DecisionKind::kTokenSample;
}

std::size_t HybridModel::logits_size(DecisionKind kind) const {
  return kind == DecisionKind::kTokenSample ? spec_.vocab_size
                                            : spec_.num_experts;
}

StepOutput HybridModel::forward(std::span<const double> state,
                                DecisionKind kind) const {
  const std::size_t h = spec_.hidden_dim;
  check_state(state, h);
  if (kind == DecisionKind::kExpertRoute && !spec_.moe()) {
    throw Error(ErrorCode::kShapeError, "dense model has no routing head");
  }
  StepOutput out;
  out.kind = kind;
  if (kind == DecisionKind::kTokenSample && spec_.moe()) {
    // The routed expert mixture already produced this state.
    out.intermediate.assign(state.begin(), state.end());
  } else {
    out.intermediate.resize(h);
    matvec(w1_, state, h, out.intermediate.data());
    for (std::size_t i = 0; i < h; ++i) {
      out.intermediate[i] = squash(out.intermediate[i] + b1_[i]);
    }
  }
  out.logits.resize(logits_size(kind));
  const auto& head = kind == DecisionKind::kTokenSample ? w_out_ : w_router_;
  matvec(head, out.intermediate, out.logits.size(), out.logits.data());
  return out;
}

HiddenState HybridModel::update(std::span<const double> intermediate,
                                DecisionKind kind,
                                const IndexSet& decision) const {
  const std::size_t h = spec_.hidden_dim;
  check_state(intermediate, h);
  HiddenState next(h);
  if (kind == DecisionKind::kTokenSample) {
    if (decision.size() != 1 || decision.front() >= spec_.vocab_size) {
      throw Error(ErrorCode::kInvalidDecision, "not a valid token decision");
    }
    matvec(recurrence_, intermediate, h, next.data());
    const double* emb = decision_embedding_.data() + std::size_t{decision[0]} * h;
    for (std::size_t i = 0; i < h; ++i) next[i] = squash(next[i] + emb[i]);
    return next;
  }
  if (!spec_.moe() || decision.size() != *spec_.top_k_experts) {
    throw Error(ErrorCode::kInvalidDecision, "not a valid expert selection");
  }
  std::vector<bool> seen(spec_.num_experts, false);
  for (auto e : decision) {
    if (e >= spec_.num_experts || seen[e]) {
      throw Error(ErrorCode::kInvalidDecision, "bad expert index");
    }
    seen[e] = true;
  }
  const double w = 1.0 / static_cast<double>(decision.size());
  for (std::size_t i = 0; i < h; ++i) {
    double shift = 0.0;
    for (auto e : decision) shift += expert_shift_[std::size_t{e} * h + i];
    next[i] = squash(intermediate[i] + w * shift);
  }
  return next;
}

IndexSet top_k_indices(std::span<const double> logits, std::size_t k) {
  if (k == 0 || k > logits.size()) {
    throw Error(ErrorCode::kInvalidK, "k must lie in [1, " +
                                          std::to_string(logits.size()) + "]");
  }
  // Find the k-th largest value on a plain copy, then collect indices above
  // it and fill remaining slots with ties in index order. This equals a
  // partial sort under the (value desc, index asc) order.
  double scratch[256];
  std::vector<double> heap_scratch;
  double* vals = scratch;
  if (logits.size() > std::size(scratch)) {
    heap_scratch.resize(logits.size());
    vals = heap_scratch.data();
  }
  std::copy(logits.begin(), logits.end(), vals);
  std::nth_element(vals, vals + (k - 1), vals + logits.size(), std::greater<>());
  const double kth = vals[k - 1];
  IndexSet idx;
  idx.reserve(k);
  for (std::uint32_t i = 0; i < logits.size(); ++i) {
    if (logits[i] > kth) idx.push_back(i);
  }
  for (std::uint32_t i = 0; i < logits.size() && idx.size() < k; ++i) {
    if (logits[i] == kth) idx.push_back(i);
  }
  std::sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) {
    return logits[a] > logits[b] || (logits[a] == logits[b] && a < b);
  });
  return idx;
}

TokenId select(std::span<const double> logits, std::uint64_t rand_tag,
               std::size_t k) {
  const IndexSet top = top_k_indices(logits, k);
  const double max_logit = logits[top.front()];
  std::vector<double> w(top.size());
  double total = 0.0;
  for (std::size_t i = 0; i < top.size(); ++i) {
    w[i] = std::exp(logits[top[i]] - max_logit);
    total += w[i];
  }
  const double u = to_unit(rand_tag) * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < top.size(); ++i) {
    acc += w[i];
    if (u < acc) return top[i];
  }
  return top.back();
}

std::uint64_t step_rand_tag(const Seed256& seed_r, std::uint64_t step_index) {
  std::uint64_t key = 0;
  for (std::size_t word = 0; word < 4; ++word) {
    std::uint64_t w = 0;
    for (std::size_t b = 0; b < 8; ++b) {
      w |= std::uint64_t{seed_r[word * 8 + b]} << (8 * b);
    }
    key = mix64(key ^ w);
  }
  return prf64(key, kDomSample, step_index);
}

Reconstruction reconstruct_output(std::span<const StepTrace> trace) {
  Reconstruction out;
  for (const auto& step : trace) {
    if (step.decision_kind != DecisionKind::kTokenSample) continue;
    ++out.token_count;
    if (!step.is_dummy() && !step.decision.empty()) {
      out.output_tokens.push_back(step.decision.front());
    }
  }
  return out;
}

DeployedModel::DeployedModel(const ModelSpec& claimed, DeviationConfig deviation)
    : claimed_(claimed), deviation_(std::move(deviation)) {
  deviation_.validate();
  if (deviation_.substitute_seed) {
    ModelSpec alt = claimed;
    alt.seed = *deviation_.substitute_seed;
    substitute_.emplace(alt);
  }
  if (deviation_.bias_scale > 0.0) {
    const std::size_t h = claimed.hidden_dim;
    const double inv_sqrt_h = 1.0 / std::sqrt(static_cast<double>(h));
    // Keyed off the claimed seed so the offset is persistent across runs.
    const std::uint64_t key = mix64(claimed.seed ^ 0x5ab5717a7ULL);
    token_bias_ = prf_matrix(key, kDomTokenBias, claimed.vocab_size * h, inv_sqrt_h);
    router_bias_ = prf_matrix(key, kDomRouterBias, claimed.num_experts * h, inv_sqrt_h);
  }
}

HiddenState DeployedModel::embed(std::span<const TokenId> prompt) const {
  return executing().embed(prompt);
}

HiddenState DeployedModel::update(std::span<const double> intermediate,
                                  DecisionKind kind,
                                  const IndexSet& decision) const {
  return executing().update(intermediate, kind, decision);
}

void DeployedModel::add_bias(std::span<const double> intermediate,
                             DecisionKind kind, Logits& logits) const {
  if (deviation_.bias_scale <= 0.0) return;
  double sq = 0.0;
  for (double x : intermediate) sq += x * x;
  const double rms = std::sqrt(sq / static_cast<double>(intermediate.size()));
  if (rms == 0.0) return;
  const auto& b = kind == DecisionKind::kTokenSample ? token_bias_ : router_bias_;
  Logits offset(logits.size());
  matvec(b, intermediate, logits.size(), offset.data());
  const double scale = deviation_.bias_scale / rms;
  for (std::size_t j = 0; j < logits.size(); ++j) logits[j] += scale * offset[j];
}

void DeployedModel::add_noise(double sigma, Logits& logits,
                              std::mt19937_64& noise) const {
  if (sigma <= 0.0) return;
  // Box-Muller on 53-bit uniforms; std::normal_distribution is several
  // times slower here and this runs once per logit.
  constexpr double kTwoPi = 6.283185307179586;
  for (std::size_t j = 0; j < logits.size(); j += 2) {
    const double u1 = 1.0 - to_unit(noise());
    const double u2 = to_unit(noise());
    const double r = std::sqrt(-2.0 * std::log(u1));
    logits[j] += sigma * std::abs(logits[j]) * r * std::cos(kTwoPi * u2);
    if (j + 1 < logits.size()) {
      logits[j + 1] += sigma * std::abs(logits[j + 1]) * r * std::sin(kTwoPi * u2);
    }
  }
}

StepOutput DeployedModel::step(std::span<const double> state,
                               std::size_t position,
                               std::mt19937_64& noise) const {
  StepOutput out = executing().forward(state, claimed_.kind_at(position));
  add_bias(out.intermediate, out.kind, out.logits);
  add_noise(deviation_.noise_sigma, out.logits, noise);
  return out;
}

ExecutionResult DeployedModel::run(std::span<const TokenId> prompt,
                                   const Seed256& seed_r, LoggingMode mode,
                                   std::mt19937_64& noise) const {
  const ModelSpec& spec = claimed_.spec();
  ExecutionResult result;
  result.seed_r = seed_r;
  HiddenState state = embed(prompt);
  const bool fabricate = deviation_.kind == DeviationKind::kFabricated;

  auto record = [&](DecisionKind kind, const Logits& committed,
                    IndexSet decision, std::uint64_t tag) {
    StepTrace t;
    t.step_index = static_cast<std::uint32_t>(result.trace.size());
    t.decision_kind = kind;
    t.rand_tag = tag;
    if (kind == DecisionKind::kExpertRoute) {
      t.payload = decision;
    } else if (mode == LoggingMode::kFull) {
      t.payload = committed;
    } else {
      t.payload = top_k_indices(committed, spec.top_k_tokens);
    }
    t.decision = std::move(decision);
    result.trace.push_back(std::move(t));
  };

  std::uint32_t tokens = 0;
  std::size_t position = 0;
  while (tokens < spec.max_steps) {
    const std::uint64_t index = result.trace.size();
    const std::uint64_t tag = step_rand_tag(seed_r, index);
    StepOutput out = step(state, position, noise);
    Logits committed;
    if (fabricate) {
      // Committed logits drawn near the reference, independent of the
      // logits that actually drove the decision.
      committed = claimed_.forward(state, out.kind).logits;
      add_noise(deviation_.fabrication_sigma, committed, noise);
    }
    IndexSet decision;
    if (out.kind == DecisionKind::kTokenSample) {
      decision = {select(out.logits, tag, spec.top_k_tokens)};
    } else {
      decision = top_k_indices(out.logits, *spec.top_k_experts);
    }
    state = update(out.intermediate, out.kind, decision);
    if (out.kind == DecisionKind::kTokenSample) {
      ++tokens;
    }
    const bool stop = out.kind == DecisionKind::kTokenSample &&
                      decision.front() == spec.stop_token();
    record(out.kind, fabricate ? committed : out.logits, std::move(decision), tag);
    ++position;
    if (stop) break;
  }

  // F'(h) = (h, l), G'(h~, d-bar) = h: the state is left untouched.
  for (std::uint32_t k = 0; k < deviation_.dummy_steps; ++k) {
    const std::uint64_t tag = step_rand_tag(seed_r, result.trace.size());
    Logits l = executing().forward(state, DecisionKind::kTokenSample).logits;
    add_noise(deviation_.noise_sigma, l, noise);
    record(DecisionKind::kTokenSample, l, IndexSet{kDummyDecision}, tag);
  }

  const Reconstruction rec = reconstruct_output(result.trace);
  result.output_tokens = rec.output_tokens;
  result.reported_token_count = rec.token_count;
  return result;
}

std::vector<std::optional<Logits>> reexecute_aligned_with_gaps(
    const HybridModel& reference, std::span<const TokenId> prompt,
    std::span<const IndexSet> decisions) {
  const std::size_t real = static_cast<std::size_t>(std::count_if(
      decisions.begin(), decisions.end(), [](const IndexSet& d) {
        return !(d.size() == 1 && d.front() == kDummyDecision);
      }));
  const std::size_t per_token = reference.spec().moe() ? 2 : 1;
  if (real > per_token * reference.spec().max_steps) {
    throw Error(ErrorCode::kInvalidArgument,
                "more decisions than max_steps allows");
  }
  std::vector<std::optional<Logits>> out;
  out.reserve(decisions.size());
  HiddenState state = reference.embed(prompt);
  std::size_t position = 0;
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    const IndexSet& d = decisions[i];
    if (d.size() == 1 && d.front() == kDummyDecision) {
      out.emplace_back(std::nullopt);
      continue;
    }
    StepOutput step = reference.forward(state, reference.kind_at(position));
    try {
      state = reference.update(step.intermediate, step.kind, d);
    } catch (const Error& e) {
      throw AlignmentError(i, e.what());
    }
    out.emplace_back(std::move(step.logits));
    ++position;
  }
  return out;
}

std::vector<Logits> reexecute_aligned(const HybridModel& reference,
                                      std::span<const TokenId> prompt,
                                      std::span<const IndexSet> decisions) {
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    if (decisions[i].size() == 1 && decisions[i].front() == kDummyDecision) {
      throw AlignmentError(i, "dummy decision has no reference computation");
    }
  }
  auto with_gaps = reexecute_aligned_with_gaps(reference, prompt, decisions);
  std::vector<Logits> out;
  out.reserve(with_gaps.size());
  for (auto& l : with_gaps) out.push_back(std::move(*l));
  return out;
}

DeployedModel transform_overreport(const ModelSpec& spec, std::uint32_t k_dummy,
                                   double noise_sigma) {
  if (k_dummy == 0) {
    throw Error(ErrorCode::kInvalidArgument, "k_dummy must be at least 1");
  }
  return DeployedModel(spec, DeviationConfig::overreport(k_dummy, noise_sigma));
}

}  // namespace logitaudit
