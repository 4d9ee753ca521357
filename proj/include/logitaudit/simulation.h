#pragma once

// Desk-scale drivers: distance corpora for the ceremony and multi-day audit
// campaigns against a simulated server.

#include <cstdint>
#include <vector>

#include "logitaudit/auditor.h"
#include "logitaudit/calibration.h"
#include "logitaudit/server.h"

namespace logitaudit {

struct CorpusConfig {
  ModelSpec spec;
  DeviationConfig deviation;
  LoggingMode logging_mode = LoggingMode::kFull;
  DistanceKind distance_kind = DistanceKind::kTV;
  std::size_t n_requests = 200;
  std::uint64_t rng_seed = 0;
  std::uint32_t min_prompt_len = 8;
  std::uint32_t max_prompt_len = 64;
};

// Token-step distance samples of each request, as reported by the verifier.
// Throws Error(kInvalidArgument) if any proof aborts.
std::vector<std::vector<DistanceSample>> collect_corpus(const CorpusConfig& config);

std::vector<RequestCurve> to_curves(const std::vector<std::vector<DistanceSample>>& corpus);
std::vector<DistanceSample> flatten(const std::vector<std::vector<DistanceSample>>& corpus);

struct CampaignConfig {
  ServerConfig server;
  AuditParams params;
  std::uint64_t n_audits = 3000;
  std::uint64_t reject_threshold_k = 3;
  std::uint32_t days = 1;
  std::uint64_t rng_seed = 0;
  std::uint32_t min_prompt_len = 8;
  std::uint32_t max_prompt_len = 64;
  // Round-trip every in-process message through the wire codec.
  bool use_codec = false;
  // Keep per-probe results (needed for verdict CSVs, costly for long runs).
  bool keep_probes = false;

  void validate() const;
};

struct DayReport {
  std::uint32_t day = 0;
  std::uint64_t audits = 0;
  std::uint64_t flags = 0;    // outcome 1
  std::uint64_t bottoms = 0;  // outcome bottom
  std::uint64_t attacked_audits = 0;
  bool reject = false;  // flags + bottoms > k

  std::uint64_t detections() const { return flags + bottoms; }
};

struct ProbeRecord {
  std::uint32_t day = 0;
  ProbeResult result;
  bool attacked = false;
};

struct CampaignResult {
  std::vector<DayReport> days;
  std::vector<ProbeRecord> probes;

  bool any_reject() const;
  std::uint64_t reject_days() const;
};

// Builds the server and an in-process channel from the config.
CampaignResult run_campaign(const CampaignConfig& config);

// Against an existing channel. `server`, when given, is used for the
// simulated clock, daily purges and attack ground truth.
CampaignResult run_campaign(const CampaignConfig& config, Transport& transport,
                            Server* server);

// Independent repetitions with seeds derived from config.rng_seed, run on up
// to `parallel` threads. Results do not depend on `parallel`.
std::vector<CampaignResult> run_repetitions(const CampaignConfig& config,
                                            std::size_t repetitions,
                                            std::size_t parallel = 1);

Json to_json(const DayReport& d);

}  // namespace logitaudit
