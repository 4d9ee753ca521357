#pragma once

// Trusted re-execution standing in for the verifiable-computation step:
// checks both commitments, re-derives every discrete decision from the
// committed logits, re-runs the claimed full-precision model along those
// decisions and reports the per-step distances.

#include <string>
#include <vector>

#include "logitaudit/commitment.h"
#include "logitaudit/json_io.h"
#include "logitaudit/metrics.h"

namespace logitaudit {

// Public inputs of one proof: (psi_M, psi, x, y, T).
struct VcStatement {
  Commitment model_commitment;
  Commitment trace_commitment;
  Prompt prompt;
  std::vector<TokenId> output_tokens;
  std::uint64_t token_count = 0;

  bool operator==(const VcStatement&) const = default;
};

// Private inputs supplied by the server.
struct VcWitness {
  ModelSpec spec;
  TraceOpening opening;
};

// Abort reasons.
inline constexpr std::string_view kAbortCommitment = "commitment";
inline constexpr std::string_view kAbortOutput = "output";
inline constexpr std::string_view kAbortDecision = "decision";
inline constexpr std::string_view kAbortAlignment = "alignment";

struct VcReport {
  // Echo of the statement the run was bound to; the auditor compares it
  // against what it actually observed.
  VcStatement statement;
  bool commitments_ok = false;
  bool decisions_ok = false;
  bool reconstruction_ok = false;
  bool aborted = false;
  std::string abort_reason;
  DistanceKind distance_kind = DistanceKind::kTV;
  // Token-sampling steps, in trace order. This is the stream the verdict
  // is computed on.
  std::vector<DistanceSample> distance_samples;
  // Expert-routing steps of MoE models (top-K distance between the committed
  // experts and the reference router logits). Reported only.
  std::vector<DistanceSample> routing_samples;

  bool passed() const { return !aborted; }
  bool operator==(const VcReport&) const = default;
};

// Full-precision distances need logged logits; compact traces support only
// kTopK. A mismatch throws Error(kModeError) before any check runs.
// `cached_reference` skips rebuilding the weights when its spec equals the
// witness spec; it is ignored otherwise.
VcReport vc_execute(const VcStatement& statement, const VcWitness& witness,
                    DistanceKind kind,
                    const HybridModel* cached_reference = nullptr);

Json to_json(const VcStatement& s);
VcStatement vc_statement_from_json(const Json& j);
Json to_json(const VcReport& r);
VcReport vc_report_from_json(const Json& j);

}  // namespace logitaudit
