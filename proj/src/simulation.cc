#include "logitaudit/simulation.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

#include "logitaudit/error.h"
#include "logitaudit/prf.h"

namespace logitaudit {

std::vector<std::vector<DistanceSample>> collect_corpus(const CorpusConfig& config) {
  ServerConfig sc;
  sc.spec = config.spec;
  sc.honest = config.deviation;
  sc.logging_mode = config.logging_mode;
  sc.distance_kind = config.distance_kind;
  sc.rng_seed = derive_seed(config.rng_seed, "corpus_server");
  Server server(sc);
  InProcessTransport transport(server);

  AuditorConfig ac;
  ac.params = AuditParams{0.0, 1.0, 0.0, 0.0};
  ac.model_commitment = server.model_commitment();
  ac.vocab_size = config.spec.vocab_size;
  ac.min_prompt_len = config.min_prompt_len;
  ac.max_prompt_len = config.max_prompt_len;
  ac.rng_seed = derive_seed(config.rng_seed, "corpus_auditor");
  Auditor auditor(ac);

  std::vector<std::vector<DistanceSample>> out;
  out.reserve(config.n_requests);
  for (std::size_t i = 0; i < config.n_requests; ++i) {
    ProbeResult r = auditor.probe(transport);
    if (!r.verdict) {
      throw Error(ErrorCode::kInvalidArgument, "corpus request aborted: " + r.reason);
    }
    out.push_back(std::move(r.report->distance_samples));
    // Corpus requests are audited at once; nothing needs to stay logged.
    server.log_store().purge(server.now(), 0);
  }
  return out;
}

std::vector<RequestCurve> to_curves(const std::vector<std::vector<DistanceSample>>& corpus) {
  std::vector<RequestCurve> out;
  out.reserve(corpus.size());
  for (const auto& r : corpus) out.push_back(make_request_curve(r));
  return out;
}

std::vector<DistanceSample> flatten(const std::vector<std::vector<DistanceSample>>& corpus) {
  std::vector<DistanceSample> out;
  for (const auto& r : corpus) out.insert(out.end(), r.begin(), r.end());
  return out;
}

void CampaignConfig::validate() const {
  server.validate();
  if (n_audits == 0) throw Error(ErrorCode::kInvalidArgument, "n_audits must be positive");
  if (days == 0) throw Error(ErrorCode::kInvalidArgument, "days must be positive");
}

bool CampaignResult::any_reject() const { return reject_days() > 0; }

std::uint64_t CampaignResult::reject_days() const {
  return static_cast<std::uint64_t>(
      std::count_if(days.begin(), days.end(), [](const DayReport& d) { return d.reject; }));
}

CampaignResult run_campaign(const CampaignConfig& config) {
  config.validate();
  Server server(config.server);
  InProcessTransport transport(server, config.use_codec);
  return run_campaign(config, transport, &server);
}

CampaignResult run_campaign(const CampaignConfig& config, Transport& transport, Server* server) {
  config.validate();
  AuditorConfig ac;
  ac.params = config.params;
  ac.model_commitment = commit_model(config.server.spec);
  ac.vocab_size = config.server.spec.vocab_size;
  ac.min_prompt_len = config.min_prompt_len;
  ac.max_prompt_len = config.max_prompt_len;
  ac.rng_seed = derive_seed(config.rng_seed, "campaign_auditor");
  Auditor auditor(ac);

  constexpr std::uint64_t kDay = 24 * 3600;
  CampaignResult result;
  for (std::uint32_t day = 0; day < config.days; ++day) {
    DayReport report;
    report.day = day;
    for (std::uint64_t i = 0; i < config.n_audits; ++i) {
      ProbeResult r = auditor.probe(transport);
      const bool attacked = server != nullptr && server->was_attacked(r.request_id);
      ++report.audits;
      if (attacked) ++report.attacked_audits;
      if (r.outcome == ProbeOutcome::kFlag) ++report.flags;
      if (r.outcome == ProbeOutcome::kBottom) ++report.bottoms;
      if (config.keep_probes) {
        result.probes.push_back(ProbeRecord{day, std::move(r), attacked});
      }
    }
    report.reject = report.detections() > config.reject_threshold_k;
    result.days.push_back(report);
    if (server != nullptr) {
      server->advance_clock(kDay);
      server->purge_expired();
    }
  }
  return result;
}

std::vector<CampaignResult> run_repetitions(const CampaignConfig& config, std::size_t repetitions,
                                            std::size_t parallel) {
  config.validate();
  std::vector<CampaignResult> out(repetitions);
  std::vector<std::exception_ptr> errors(repetitions);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < repetitions; r = next++) {
      try {
        CampaignConfig c = config;
        c.rng_seed = derive_seed(config.rng_seed, "repetition", r);
        c.server.rng_seed = derive_seed(config.server.rng_seed, "repetition", r);
        out[r] = run_campaign(c);
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(parallel, 1, std::max<std::size_t>(1, repetitions));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

Json to_json(const DayReport& d) {
  return {{"day", d.day},
          {"audits", d.audits},
          {"flags", d.flags},
          {"bottoms", d.bottoms},
          {"attacked_audits", d.attacked_audits},
          {"reject", d.reject}};
}

}  // namespace logitaudit
