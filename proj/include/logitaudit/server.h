#pragma once

// Inference server: answers requests with (y, T, psi), logs the opening, and
// answers audits by running the trusted re-execution on the logged witness.

#include <atomic>
#include <mutex>
#include <random>
#include <optional>

#include "logitaudit/log_store.h"
#include "logitaudit/messages.h"

namespace logitaudit {

struct ServerConfig {
  ModelSpec spec;
  // Deployment used for requests that are not attacked.
  DeviationConfig honest = DeviationConfig::benign();
  // Deployment used on a random `attack_rate` fraction of requests.
  std::optional<DeviationConfig> attack;
  double attack_rate = 0.0;
  LoggingMode logging_mode = LoggingMode::kFull;
  DistanceKind distance_kind = DistanceKind::kTV;
  std::uint64_t rng_seed = 0;
  std::size_t log_capacity = kDefaultLogCapacity;
  std::uint64_t retention_seconds = kDefaultRetentionSeconds;
  // Full-precision spec handed to the verifier instead of `spec`; models a
  // server that cannot open its published model commitment.
  std::optional<ModelSpec> witness_spec;

  void validate() const;
};

class Server {
 public:
  explicit Server(ServerConfig config);

  const ServerConfig& config() const { return config_; }
  // psi_M, published before serving.
  const Commitment& model_commitment() const { return model_commitment_; }

  // Throws Error(kDuplicateId) for a reused id, kInvalidPrompt for a bad
  // prompt.
  ResponseMsg handle_request(const RequestMsg& request);
  // Assigns a fresh request id from the server's own stream.
  ResponseMsg handle_prompt(const Prompt& prompt);
  // Throws Error(kAuditUnavailable) for an unknown or purged id.
  ProofMsg handle_audit(const AuditMsg& audit);
  // Dispatch for the transports; errors become ErrorMsg replies.
  Message handle(const Message& message);

  // Simulated clock in seconds, used for log timestamps and retention.
  std::uint64_t now() const { return clock_.load(); }
  void advance_clock(std::uint64_t seconds) { clock_ += seconds; }
  std::size_t purge_expired();

  LogStore& log_store() { return store_; }
  const LogStore& log_store() const { return store_; }
  // Whether the given request ran under the attack deployment.
  bool was_attacked(const RequestId& id) const;

 private:
  ServerConfig config_;
  Commitment model_commitment_;
  DeployedModel honest_;
  std::optional<DeployedModel> attack_;
  HybridModel reference_;
  LogStore store_;
  std::atomic<std::uint64_t> clock_{0};
  std::atomic<std::uint64_t> request_counter_{0};
  std::mutex id_mu_;
  std::mt19937_64 id_stream_;
};

}  // namespace logitaudit
