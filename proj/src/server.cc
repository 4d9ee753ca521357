#include "logitaudit/server.h"

#include "logitaudit/error.h"
#include "logitaudit/prf.h"

namespace logitaudit {
namespace {

Seed256 request_seed(std::uint64_t master, std::uint64_t counter) {
  const std::uint64_t key = derive_seed(master, "seed_r", counter);
  Seed256 out{};
  for (std::uint64_t w = 0; w < 4; ++w) {
    const std::uint64_t v = prf64(key, w, 0);
    for (int b = 0; b < 8; ++b) out[w * 8 + b] = static_cast<std::uint8_t>(v >> (8 * b));
  }
  return out;
}

}  // namespace

void ServerConfig::validate() const {
  spec.validate();
  honest.validate();
  if (attack) attack->validate();
  if (!(attack_rate >= 0.0 && attack_rate <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "attack_rate must lie in [0, 1]");
  }
  if (attack_rate > 0.0 && !attack) {
    throw Error(ErrorCode::kInvalidArgument, "attack_rate set without an attack deviation");
  }
  if (witness_spec) witness_spec->validate();
}

Server::Server(ServerConfig config)
    : config_((config.validate(), std::move(config))),
      model_commitment_(commit_model(config_.spec)),
      honest_(config_.spec, config_.honest),
      reference_(config_.witness_spec.value_or(config_.spec)),
      store_(config_.log_capacity),
      id_stream_(make_stream(config_.rng_seed, "request_id")) {
  if (config_.attack) attack_.emplace(config_.spec, *config_.attack);
}

ResponseMsg Server::handle_request(const RequestMsg& request) {
  if (store_.get(request.request_id)) {
    throw Error(ErrorCode::kDuplicateId, request.request_id.str());
  }
  const std::uint64_t c = request_counter_.fetch_add(1);
  const bool attacked =
      attack_ && to_unit(derive_seed(config_.rng_seed, "attack", c)) < config_.attack_rate;
  const DeployedModel& model = attacked ? *attack_ : honest_;

  std::mt19937_64 noise = make_stream(config_.rng_seed, "noise", c);
  LogEntry entry;
  entry.request_id = request.request_id;
  entry.prompt = request.prompt;
  entry.result = model.run(request.prompt, request_seed(config_.rng_seed, c),
                           config_.logging_mode, noise);
  entry.commitment = commit_trace(entry.opening());
  entry.created_at = now();
  entry.attacked = attacked;

  ResponseMsg response{request.request_id, entry.result.output_tokens,
                       entry.result.reported_token_count, entry.commitment};
  store_.put(std::move(entry));
  return response;
}

ResponseMsg Server::handle_prompt(const Prompt& prompt) {
  RequestId id;
  {
    std::lock_guard lock(id_mu_);
    id = RequestId::random(id_stream_);
  }
  return handle_request(RequestMsg{id, prompt});
}

ProofMsg Server::handle_audit(const AuditMsg& audit) {
  const auto entry = store_.get(audit.request_id);
  if (!entry) {
    throw Error(ErrorCode::kAuditUnavailable, "no retained log for " + audit.request_id.str());
  }
  const VcStatement statement{model_commitment_, entry->commitment, entry->prompt,
                              entry->result.output_tokens, entry->result.reported_token_count};
  const VcWitness witness{config_.witness_spec.value_or(config_.spec), entry->opening()};
  return ProofMsg{audit.request_id,
                  vc_execute(statement, witness, config_.distance_kind, &reference_)};
}

Message Server::handle(const Message& message) {
  try {
    if (const auto* r = std::get_if<RequestMsg>(&message)) return handle_request(*r);
    if (const auto* a = std::get_if<AuditMsg>(&message)) return handle_audit(*a);
    return ErrorMsg{request_id_of(message), std::string(error_code_name(ErrorCode::kInvalidArgument)),
                    "server does not accept '" + std::string(message_type(message)) + "' messages"};
  } catch (const Error& e) {
    return ErrorMsg{request_id_of(message), std::string(error_code_name(e.code())), e.what()};
  }
}

std::size_t Server::purge_expired() {
  return store_.purge(now(), config_.retention_seconds);
}

bool Server::was_attacked(const RequestId& id) const {
  const auto entry = store_.get(id);
  return entry && entry->attacked;
}

}  // namespace logitaudit
