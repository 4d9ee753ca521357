#pragma once

// Deterministic synthetic LLM expressed as a hybrid computation: an embedding,
// alternating continuous transformations and discrete decisions, and an output
// reconstruction step. Deviation layers model benign non-determinism,
// low-precision execution, substitution, token overreporting and fabricated
// logit commitments.

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <variant>
#include <vector>

namespace logitaudit {

using TokenId = std::uint32_t;
using Prompt = std::vector<TokenId>;
using Logits = std::vector<double>;
using HiddenState = std::vector<double>;
using IndexSet = std::vector<std::uint32_t>;
using Seed256 = std::array<std::uint8_t, 32>;

// The d-bar decision of an overreporting model: a recurrent step whose update
// is the identity and which the reference model never produces.
inline constexpr std::uint32_t kDummyDecision = 0xffffffffu;

struct ModelSpec {
  std::uint64_t seed = 0;
  std::uint32_t hidden_dim = 32;
  std::uint32_t vocab_size = 64;
  std::uint32_t num_experts = 0;
  std::uint32_t top_k_tokens = 20;
  std::optional<std::uint32_t> top_k_experts;
  std::uint32_t max_steps = 32;

  // Throws Error(kInvalidArgument) when the field invariants do not hold.
  void validate() const;
  bool moe() const { return num_experts > 0; }
  TokenId stop_token() const { return vocab_size - 1; }

  bool operator==(const ModelSpec&) const = default;
};

enum class DeviationKind : std::uint8_t {
  kBenign,
  kQuantized,
  kSubstituted,
  kOverreport,
  kFabricated,
};

struct DeviationConfig {
  DeviationKind kind = DeviationKind::kBenign;
  // Relative standard deviation of the fresh per-logit rounding noise.
  double noise_sigma = 0.0;
  // Magnitude of the systematic, state-dependent logit offset (Substituted).
  double bias_scale = 0.0;
  // Alternate weights for the deployed model (Substituted).
  std::optional<std::uint64_t> substitute_seed;
  // Number of appended identity steps (Overreport).
  std::uint32_t dummy_steps = 0;
  // Relative noise of logits committed in place of the executed ones
  // (Fabricated).
  double fabrication_sigma = 0.0;

  void validate() const;

  static DeviationConfig benign(double sigma = 0.0);
  static DeviationConfig quantized(double sigma);
  static DeviationConfig substituted(double bias_scale, double sigma = 0.0);
  static DeviationConfig substituted_weights(std::uint64_t seed,
                                             double sigma = 0.0);
  static DeviationConfig overreport(std::uint32_t dummy_steps,
                                    double sigma = 0.0);
  static DeviationConfig fabricated(double fabrication_sigma, double sigma);

  bool operator==(const DeviationConfig&) const = default;
};

enum class DecisionKind : std::uint8_t { kTokenSample = 0, kExpertRoute = 1 };
enum class LoggingMode : std::uint8_t { kFull = 0, kCompactTopK = 1 };

struct StepTrace {
  std::uint32_t step_index = 0;
  DecisionKind decision_kind = DecisionKind::kTokenSample;
  // Full logits, or only the runtime top-K index set.
  std::variant<Logits, IndexSet> payload;
  // Token id (size 1) or selected expert indices in rank order.
  IndexSet decision;
  std::uint64_t rand_tag = 0;

  bool has_logits() const { return std::holds_alternative<Logits>(payload); }
  const Logits& logits() const { return std::get<Logits>(payload); }
  const IndexSet& top_k_indices() const { return std::get<IndexSet>(payload); }
  bool is_dummy() const {
    return decision.size() == 1 && decision.front() == kDummyDecision;
  }

  bool operator==(const StepTrace&) const = default;
};

struct ExecutionResult {
  std::vector<TokenId> output_tokens;
  std::uint64_t reported_token_count = 0;
  std::vector<StepTrace> trace;
  Seed256 seed_r{};

  bool operator==(const ExecutionResult&) const = default;
};

struct StepOutput {
  DecisionKind kind = DecisionKind::kTokenSample;
  HiddenState intermediate;
  Logits logits;
};

// Output of the reconstruction function D over a decision sequence.
struct Reconstruction {
  std::vector<TokenId> output_tokens;
  std::uint64_t token_count = 0;

  bool operator==(const Reconstruction&) const = default;
};

// Full-precision weights materialized from a ModelSpec.
class HybridModel {
 public:
  explicit HybridModel(ModelSpec spec);

  const ModelSpec& spec() const { return spec_; }

  // E: prompt -> h_0. Order-sensitive recurrence over prompt tokens.
  HiddenState embed(std::span<const TokenId> prompt) const;

  // F: h_{i-1} -> (h~_i, l_i) for a decision point of the given kind.
  StepOutput forward(std::span<const double> state, DecisionKind kind) const;

  // G: (h~_i, d_i) -> h_i.
  HiddenState update(std::span<const double> intermediate, DecisionKind kind,
                     const IndexSet& decision) const;

  // Kind of the n-th (non-dummy) decision point: MoE models alternate
  // expert routing and token sampling, dense models only sample tokens.
  DecisionKind kind_at(std::size_t position) const;

  std::size_t logits_size(DecisionKind kind) const;

 private:
  ModelSpec spec_;
  std::vector<double> prompt_embedding_;  // vocab x hidden
  std::vector<double> prompt_recurrence_;  // hidden x hidden
  std::vector<double> w1_;                 // hidden x hidden
  std::vector<double> b1_;                 // hidden
  std::vector<double> w_out_;              // vocab x hidden
  std::vector<double> w_router_;           // experts x hidden
  std::vector<double> expert_shift_;       // experts x hidden
  std::vector<double> recurrence_;         // hidden x hidden
  std::vector<double> decision_embedding_;  // vocab x hidden
};

// S: restrict to the k largest logits (ties to the lower index), then draw one
// of them from their softmax weights using the uniform derived from rand_tag.
TokenId select(std::span<const double> logits, std::uint64_t rand_tag,
               std::size_t k);

// Indices of the k largest entries ordered by (value desc, index asc).
IndexSet top_k_indices(std::span<const double> logits, std::size_t k);

// r_i := PRF(r, i).
std::uint64_t step_rand_tag(const Seed256& seed_r, std::uint64_t step_index);

// D: y holds the non-dummy sampled tokens in order, T counts every token
// sampling step (dummy steps included).
Reconstruction reconstruct_output(std::span<const StepTrace> trace);

// A claimed model together with how the deployment deviates from it.
class DeployedModel {
 public:
  DeployedModel(const ModelSpec& claimed, DeviationConfig deviation);

  const ModelSpec& claimed_spec() const { return claimed_.spec(); }
  const HybridModel& claimed_model() const { return claimed_; }
  const DeviationConfig& deviation() const { return deviation_; }

  HiddenState embed(std::span<const TokenId> prompt) const;

  // F under the deviation: Benign/Quantized add fresh relative noise drawn
  // from `noise`, Substituted adds the systematic offset or uses the
  // alternate weights. Kind follows the step position.
  StepOutput step(std::span<const double> state, std::size_t position,
                  std::mt19937_64& noise) const;

  HiddenState update(std::span<const double> intermediate, DecisionKind kind,
                     const IndexSet& decision) const;

  // Autoregressive execution producing (y, T) and the per-decision trace.
  ExecutionResult run(std::span<const TokenId> prompt, const Seed256& seed_r,
                      LoggingMode mode, std::mt19937_64& noise) const;

 private:
  const HybridModel& executing() const {
    return substitute_ ? *substitute_ : claimed_;
  }
  void add_bias(std::span<const double> intermediate, DecisionKind kind,
                Logits& logits) const;
  void add_noise(double sigma, Logits& logits, std::mt19937_64& noise) const;

  HybridModel claimed_;
  std::optional<HybridModel> substitute_;
  DeviationConfig deviation_;
  std::vector<double> token_bias_;   // vocab x hidden
  std::vector<double> router_bias_;  // experts x hidden
};

// Runs the full-precision reference while injecting `decisions` at every
// discrete point. Throws AlignmentError(i) for a decision that is invalid at
// step i (including the dummy decision, which the reference cannot take).
std::vector<Logits> reexecute_aligned(const HybridModel& reference,
                                      std::span<const TokenId> prompt,
                                      std::span<const IndexSet> decisions);

// As above, but dummy decisions yield no reference logits and leave the
// state untouched; used by the verifier to localize overreported steps.
std::vector<std::optional<Logits>> reexecute_aligned_with_gaps(
    const HybridModel& reference, std::span<const TokenId> prompt,
    std::span<const IndexSet> decisions);

// Overreport configuration realizing M': `k_dummy` identity steps appended,
// y untouched, T inflated by k_dummy. The base config's noise is kept.
DeployedModel transform_overreport(const ModelSpec& spec,
                                   std::uint32_t k_dummy,
                                   double noise_sigma = 0.0);

}  // namespace logitaudit
