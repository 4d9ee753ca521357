#pragma once

// Command-line front end: ceremony | campaign | report | plan.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "logitaudit/audit_math.h"
#include "logitaudit/calibration.h"
#include "logitaudit/core_model.h"
#include "logitaudit/json_io.h"
#include "logitaudit/metrics.h"

namespace logitaudit::cli {

// Process exit statuses.
enum ExitCode : int {
  kExitOk = 0,
  kExitError = 1,                  // any other library or I/O failure
  kExitCalibrationInfeasible = 2,  // ceremony found no admissible (t1, t2)
  kExitUnreachable = 3,            // remote server could not be reached
  kExitPlanInfeasible = 4,         // plan: no k meets the completeness target
  kExitUsage = 64,                 // bad flags or incomplete config
  kExitDataError = 65,             // config present but malformed
  kExitNoInput = 66,               // a required input file or directory is missing
};

struct CampaignSection {
  std::uint64_t n_audits = 3000;
  std::uint64_t reject_threshold_k = 3;
  std::uint32_t days = 1;
};

struct PlanSection {
  double alpha = 0.1;
  double p_detect = 0.01;
  double eta = 0.05;
  double fp = 1e-5;
  double completeness_target = 1e-7;
};

struct RunConfig {
  ModelSpec model;
  // Deployment of the honest (benign) server.
  DeviationConfig deviation = DeviationConfig::benign();
  // Attack deployment: the ceremony's attack corpus, and in campaigns the
  // deviation applied on an `attack_rate` fraction of requests.
  std::optional<DeviationConfig> attack;
  double attack_rate = 0.0;
  LoggingMode logging_mode = LoggingMode::kFull;
  DistanceKind distance_kind = DistanceKind::kTV;
  std::size_t corpus_size = 200;
  double detection_target = 0.05;
  std::vector<double> t1_grid = default_t1_grid();
  std::size_t histogram_bins = 50;
  std::optional<AuditParams> audit_params;
  std::optional<CampaignSection> campaign;
  std::optional<PlanSection> plan;
  // Distance CSVs (as written by a previous ceremony) to use instead of
  // generating corpora.
  std::optional<std::string> benign_corpus;
  std::optional<std::string> attack_corpus;
  // "host:port" of a remote server; in-process when absent.
  std::optional<std::string> server;
  std::string output_dir = "out";
  std::uint64_t rng_seed = 0;
};

// Throws Error(kParseError) for malformed or invalid fields. Missing keys
// keep their defaults.
RunConfig run_config_from_json(const Json& j);
Json to_json(const RunConfig& c);

// Applies "a.b.c=VALUE" to a config object. VALUE is parsed as JSON when it
// parses, otherwise taken as a string. Throws Error(kInvalidArgument).
void apply_override(Json& config, std::string_view assignment);

// Request-tagged distance CSV: request_id,step_index,kind,value,flagged.
void write_distance_csv(std::ostream& out,
                        const std::vector<std::string>& request_ids,
                        const std::vector<std::vector<DistanceSample>>& samples);
// Groups rows back into requests, in first-seen order.
std::vector<std::vector<DistanceSample>> read_distance_csv(std::istream& in);

// Entry point used by the logitaudit binary.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace logitaudit::cli
