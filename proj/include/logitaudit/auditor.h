#pragma once

// Auditor side of the protocol: poses as a user with a random prompt, asks
// for a proof right after the response and turns the proof into 0, 1 or
// bottom.

#include <optional>
#include <random>
#include <string>

#include "logitaudit/calibration.h"
#include "logitaudit/ldd_stats.h"
#include "logitaudit/messages.h"
#include "logitaudit/transport.h"

namespace logitaudit {

enum class ProbeOutcome : std::uint8_t { kAccept = 0, kFlag = 1, kBottom = 2 };

std::string_view to_string(ProbeOutcome o);

struct ProbeResult {
  RequestId request_id;
  Prompt prompt;
  ProbeOutcome outcome = ProbeOutcome::kAccept;
  // Set when the proof was accepted and a verdict computed.
  std::optional<RequestVerdict> verdict;
  // Why the outcome is bottom: a VC abort reason, "unavailable" or
  // "statement" (the proof is bound to something other than what was seen).
  std::string reason;
  std::optional<VcReport> report;

  // Bottom counts as a detection.
  bool detected() const { return outcome != ProbeOutcome::kAccept; }
};

struct AuditorConfig {
  AuditParams params;
  // The published psi_M the proofs must be bound to.
  Commitment model_commitment;
  std::uint32_t vocab_size = 64;
  std::uint32_t min_prompt_len = 8;
  std::uint32_t max_prompt_len = 64;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

class Auditor {
 public:
  explicit Auditor(AuditorConfig config);

  const AuditorConfig& config() const { return config_; }

  // Uniform length in [min, max], uniform tokens.
  Prompt random_prompt();

  // Request, then Audit. Throws Error(kProbeError) if the channel fails or
  // the server refuses the request itself.
  ProbeResult probe(Transport& transport);

 private:
  AuditorConfig config_;
  std::mt19937_64 prompt_stream_;
  std::mt19937_64 id_stream_;
};

}  // namespace logitaudit
