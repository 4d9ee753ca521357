#include "logitaudit/vc.h"

#include <algorithm>
#include <optional>

#include "logitaudit/error.h"

namespace logitaudit {
namespace {

bool valid_index_set(const IndexSet& s, std::size_t size, std::size_t bound) {
  if (s.size() != size) return false;
  IndexSet sorted = s;
  std::sort(sorted.begin(), sorted.end());
  return std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end() &&
         (sorted.empty() || sorted.back() < bound);
}

// Decision the trusted side derives for one step, or nullopt when the step
// is malformed for the claimed model.
std::optional<IndexSet> derive_decision(const HybridModel& model, const StepTrace& step,
                                        std::size_t position) {
  const ModelSpec& spec = model.spec();
  if (step.is_dummy()) {
    // The reference has no counterpart; the step is reported, not derived.
    if (step.decision_kind != DecisionKind::kTokenSample) return std::nullopt;
    return step.decision;
  }
  if (step.decision_kind != model.kind_at(position)) return std::nullopt;
  if (step.decision_kind == DecisionKind::kExpertRoute) {
    if (step.has_logits() || step.top_k_indices() != step.decision) return std::nullopt;
    if (!valid_index_set(step.decision, *spec.top_k_experts, spec.num_experts)) {
      return std::nullopt;
    }
    return step.decision;
  }
  if (step.has_logits()) {
    if (step.logits().size() != spec.vocab_size) return std::nullopt;
    return IndexSet{select(step.logits(), step.rand_tag, spec.top_k_tokens)};
  }
  // Compact: the committed top-K set must be well formed and contain the
  // committed token.
  const IndexSet& top = step.top_k_indices();
  if (!valid_index_set(top, spec.top_k_tokens, spec.vocab_size)) return std::nullopt;
  if (step.decision.size() != 1 ||
      std::find(top.begin(), top.end(), step.decision.front()) == top.end()) {
    return std::nullopt;
  }
  return step.decision;
}

VcReport abort_with(VcReport report, std::string_view reason) {
  report.aborted = true;
  report.abort_reason = std::string(reason);
  report.distance_samples.clear();
  report.routing_samples.clear();
  return report;
}

Json samples_to_json(const std::vector<DistanceSample>& samples) {
  Json out = Json::array();
  for (const auto& s : samples) {
    out.push_back({{"step_index", s.step_index},
                   {"kind", to_string(s.kind)},
                   {"value", real_to_string(s.value)},
                   {"flagged", s.flagged}});
  }
  return out;
}

std::vector<DistanceSample> samples_from_json(const Json& j) {
  std::vector<DistanceSample> out;
  for (const auto& e : j) {
    DistanceSample s;
    s.step_index = e.at("step_index").get<std::uint32_t>();
    s.kind = distance_kind_from_string(e.at("kind").get<std::string>());
    s.value = real_from_json(e.at("value"));
    s.flagged = e.at("flagged").get<bool>();
    out.push_back(s);
  }
  return out;
}

}  // namespace

VcReport vc_execute(const VcStatement& statement, const VcWitness& witness,
                    DistanceKind kind, const HybridModel* cached_reference) {
  const auto& trace = witness.opening.trace;
  const bool wants_logits = kind != DistanceKind::kTopK;
  for (const auto& step : trace) {
    if (step.decision_kind == DecisionKind::kTokenSample && step.has_logits() != wants_logits) {
      throw Error(ErrorCode::kModeError,
                  std::string(to_string(kind)) + " distance does not match the logging mode");
    }
  }

  VcReport report;
  report.statement = statement;
  report.distance_kind = kind;

  // (0) Both commitments must open to the witness.
  try {
    report.commitments_ok = !trace.empty() &&
                            verify(statement.model_commitment, witness.spec) &&
                            verify(statement.trace_commitment, witness.opening);
  } catch (const Error&) {
    report.commitments_ok = false;
  }
  if (!report.commitments_ok) return abort_with(std::move(report), kAbortCommitment);

  // (1) Decisions from the committed logits and the committed randomness.
  std::optional<HybridModel> built;
  if (cached_reference == nullptr || cached_reference->spec() != witness.spec) {
    built.emplace(witness.spec);
  }
  const HybridModel& reference = built ? *built : *cached_reference;
  std::vector<IndexSet> decisions;
  decisions.reserve(trace.size());
  std::size_t position = 0;
  bool decisions_consistent = true;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const StepTrace& step = trace[i];
    if (step.step_index != i || step.rand_tag != step_rand_tag(witness.opening.seed_r, i)) {
      return abort_with(std::move(report), kAbortDecision);
    }
    auto d = derive_decision(reference, step, position);
    if (!d) return abort_with(std::move(report), kAbortDecision);
    if (*d != step.decision) decisions_consistent = false;
    if (!step.is_dummy()) ++position;
    decisions.push_back(std::move(*d));
  }

  // (3) (y, T) = D(d_1..d_N), evaluated on the derived decisions.
  std::vector<StepTrace> derived(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    derived[i].decision_kind = trace[i].decision_kind;
    derived[i].decision = decisions[i];
  }
  const Reconstruction rec = reconstruct_output(derived);
  report.reconstruction_ok = rec.output_tokens == statement.output_tokens &&
                             rec.token_count == statement.token_count;
  if (!report.reconstruction_ok) return abort_with(std::move(report), kAbortOutput);
  report.decisions_ok = decisions_consistent;
  if (!report.decisions_ok) return abort_with(std::move(report), kAbortDecision);

  // (2) Aligned reference run.
  std::vector<std::optional<Logits>> ref;
  try {
    ref = reexecute_aligned_with_gaps(reference, statement.prompt, decisions);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kAlignmentError || e.code() == ErrorCode::kInvalidArgument ||
        e.code() == ErrorCode::kInvalidPrompt) {
      return abort_with(std::move(report), kAbortAlignment);
    }
    throw;
  }

  // (4) Per-step distances.
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (trace[i].decision_kind == DecisionKind::kTokenSample) {
      report.distance_samples.push_back(measure_step(trace[i], ref[i], kind));
    } else {
      report.routing_samples.push_back(measure_step(trace[i], ref[i], DistanceKind::kTopK));
    }
  }
  return report;
}

Json to_json(const VcStatement& s) {
  return {{"model_commitment", s.model_commitment.hex()},
          {"trace_commitment", s.trace_commitment.hex()},
          {"scheme", s.trace_commitment.scheme_id},
          {"prompt", s.prompt},
          {"output_tokens", s.output_tokens},
          {"token_count", s.token_count}};
}

VcStatement vc_statement_from_json(const Json& j) {
  try {
    VcStatement s;
    const auto scheme = j.at("scheme").get<std::string>();
    s.model_commitment = Commitment::from_hex(j.at("model_commitment").get<std::string>(), scheme);
    s.trace_commitment = Commitment::from_hex(j.at("trace_commitment").get<std::string>(), scheme);
    s.prompt = j.at("prompt").get<Prompt>();
    s.output_tokens = j.at("output_tokens").get<std::vector<TokenId>>();
    s.token_count = j.at("token_count").get<std::uint64_t>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
}

Json to_json(const VcReport& r) {
  return {{"statement", to_json(r.statement)},
          {"commitments_ok", r.commitments_ok},
          {"decisions_ok", r.decisions_ok},
          {"reconstruction_ok", r.reconstruction_ok},
          {"aborted", r.aborted},
          {"abort_reason", r.abort_reason},
          {"distance_kind", to_string(r.distance_kind)},
          {"distance_samples", samples_to_json(r.distance_samples)},
          {"routing_samples", samples_to_json(r.routing_samples)}};
}

VcReport vc_report_from_json(const Json& j) {
  try {
    VcReport r;
    r.statement = vc_statement_from_json(j.at("statement"));
    r.commitments_ok = j.at("commitments_ok").get<bool>();
    r.decisions_ok = j.at("decisions_ok").get<bool>();
    r.reconstruction_ok = j.at("reconstruction_ok").get<bool>();
    r.aborted = j.at("aborted").get<bool>();
    r.abort_reason = j.at("abort_reason").get<std::string>();
    r.distance_kind = distance_kind_from_string(j.at("distance_kind").get<std::string>());
    r.distance_samples = samples_from_json(j.at("distance_samples"));
    r.routing_samples = samples_from_json(j.at("routing_samples"));
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
}

}  // namespace logitaudit
