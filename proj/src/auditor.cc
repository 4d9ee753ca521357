#include "logitaudit/auditor.h"

#include "logitaudit/error.h"
#include "logitaudit/prf.h"

namespace logitaudit {

std::string_view to_string(ProbeOutcome o) {
  switch (o) {
    case ProbeOutcome::kAccept: return "0";
    case ProbeOutcome::kFlag: return "1";
    case ProbeOutcome::kBottom: return "bottom";
  }
  return "?";
}

void AuditorConfig::validate() const {
  if (vocab_size < 2) throw Error(ErrorCode::kInvalidArgument, "vocab_size must be >= 2");
  if (min_prompt_len == 0 || min_prompt_len > max_prompt_len) {
    throw Error(ErrorCode::kInvalidArgument, "need 1 <= min_prompt_len <= max_prompt_len");
  }
  if (!(params.t1 >= 0.0) || !(params.t2 >= 0.0 && params.t2 <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "audit params out of range");
  }
}

Auditor::Auditor(AuditorConfig config)
    : config_((config.validate(), std::move(config))),
      prompt_stream_(make_stream(config_.rng_seed, "auditor_prompt")),
      id_stream_(make_stream(config_.rng_seed, "auditor_request_id")) {}

Prompt Auditor::random_prompt() {
  std::uniform_int_distribution<std::uint32_t> len(config_.min_prompt_len, config_.max_prompt_len);
  std::uniform_int_distribution<TokenId> tok(0, config_.vocab_size - 1);
  Prompt p(len(prompt_stream_));
  for (auto& t : p) t = tok(prompt_stream_);
  return p;
}

ProbeResult Auditor::probe(Transport& transport) {
  ProbeResult out;
  out.request_id = RequestId::random(id_stream_);
  out.prompt = random_prompt();

  const Message reply = transport.exchange(RequestMsg{out.request_id, out.prompt});
  const auto* response = std::get_if<ResponseMsg>(&reply);
  if (response == nullptr || response->request_id != out.request_id) {
    const auto* err = std::get_if<ErrorMsg>(&reply);
    throw Error(ErrorCode::kProbeError,
                err ? "request refused: " + err->message : "unexpected reply to request");
  }

  const Message proof_reply = transport.exchange(AuditMsg{out.request_id});
  out.outcome = ProbeOutcome::kBottom;
  const auto* proof = std::get_if<ProofMsg>(&proof_reply);
  if (proof == nullptr || proof->request_id != out.request_id) {
    out.reason = "unavailable";
    return out;
  }
  out.report = proof->report;
  const VcStatement observed{config_.model_commitment, response->trace_commitment, out.prompt,
                             response->output_tokens, response->token_count};
  if (proof->report.statement != observed) {
    out.reason = "statement";
    return out;
  }
  if (proof->report.aborted) {
    out.reason = proof->report.abort_reason;
    return out;
  }
  out.verdict = decide(proof->report.distance_samples, config_.params.t1, config_.params.t2);
  out.outcome = out.verdict->flagged ? ProbeOutcome::kFlag : ProbeOutcome::kAccept;
  return out;
}

}  // namespace logitaudit
