#include "logitaudit/cli.h"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <sstream>

#include "logitaudit/error.h"
#include "logitaudit/ldd_stats.h"
#include "logitaudit/prf.h"
#include "logitaudit/simulation.h"
#include "logitaudit/transport.h"

namespace logitaudit::cli {
namespace fs = std::filesystem;

namespace {

// An error already mapped to an exit status.
struct ExitError {
  int code;
  std::string message;
};

[[noreturn]] void fail(int code, std::string message) { throw ExitError{code, std::move(message)}; }

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  return j[key].get<T>();
}

double real_or(const Json& j, const char* key, double fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  return real_from_json(j[key]);
}

DistanceKind parse_distance_kind(const std::string& s) { return distance_kind_from_string(s); }

// Writes a file and fails with a library error if the stream breaks.
void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot write " + path.string());
}

std::string tail_table_csv(const LddHistogram& h) {
  std::ostringstream s;
  s << "tau,tail_prob\n";
  for (const auto& [tau, p] : h.tail_probs) s << real_to_string(tau) << ',' << real_to_string(p) << '\n';
  return s.str();
}

std::string separation_csv(const std::vector<SeparationRow>& rows) {
  std::ostringstream s;
  s << "tau,benign_tail,attack_tail,ratio,ordered\n";
  for (const auto& r : rows) {
    s << real_to_string(r.threshold) << ',' << real_to_string(r.benign_tail) << ','
      << real_to_string(r.attack_tail) << ',' << real_to_string(r.ratio) << ','
      << (r.ordered ? 1 : 0) << '\n';
  }
  return s.str();
}

// Quarter-decade bins from 1e-6 upwards, plus a [0, 1e-6) bin and an
// overflow bin for infinite values.
std::string log_histogram_csv(const std::vector<double>& values) {
  double hi = 1e-6;
  bool any_inf = false;
  for (double v : values) {
    if (std::isinf(v)) any_inf = true;
    else hi = std::max(hi, v);
  }
  std::vector<double> edges = {0.0};
  for (int q = -24;; ++q) {
    const double e = std::pow(10.0, q / 4.0);
    edges.push_back(e);
    if (e > hi) break;
  }
  if (any_inf) edges.push_back(std::numeric_limits<double>::infinity());
  std::vector<std::uint64_t> counts(edges.size() - 1, 0);
  for (double v : values) {
    auto it = std::upper_bound(edges.begin(), edges.end(), v);
    std::size_t b = static_cast<std::size_t>(it - edges.begin());
    b = b == 0 ? 0 : b - 1;
    if (std::isinf(v)) b = counts.size() - 1;
    ++counts[std::min(b, counts.size() - 1)];
  }
  std::ostringstream s;
  s << "bin_lo,bin_hi,count,fraction\n";
  for (std::size_t i = 0; i < counts.size(); ++i) {
    s << real_to_string(edges[i]) << ',' << real_to_string(edges[i + 1]) << ',' << counts[i] << ','
      << real_to_string(values.empty() ? 0.0 : static_cast<double>(counts[i]) / static_cast<double>(values.size()))
      << '\n';
  }
  return s.str();
}

std::vector<std::vector<DistanceSample>> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(kExitNoInput, "cannot read corpus " + path);
  return read_distance_csv(in);
}

std::vector<std::string> index_ids(std::string_view prefix, std::size_t n) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back(std::string(prefix) + std::to_string(i));
  return ids;
}

int cmd_ceremony(const RunConfig& cfg, std::size_t parallel, std::ostream& out) {
  if (!cfg.attack && !cfg.attack_corpus) fail(kExitUsage, "ceremony needs an attack deviation or attack_corpus");
  fs::create_directories(cfg.output_dir);

  auto corpus_for = [&](const DeviationConfig& dev, std::string_view stream) {
    CorpusConfig c;
    c.spec = cfg.model;
    c.deviation = dev;
    c.logging_mode = cfg.logging_mode;
    c.distance_kind = cfg.distance_kind;
    c.n_requests = cfg.corpus_size;
    c.rng_seed = derive_seed(cfg.rng_seed, stream);
    return collect_corpus(c);
  };
  auto make_benign = [&] {
    return cfg.benign_corpus ? load_corpus(*cfg.benign_corpus) : corpus_for(cfg.deviation, "ceremony_benign");
  };
  auto make_attack = [&] {
    return cfg.attack_corpus ? load_corpus(*cfg.attack_corpus) : corpus_for(*cfg.attack, "ceremony_attack");
  };
  std::vector<std::vector<DistanceSample>> benign;
  std::vector<std::vector<DistanceSample>> attack;
  if (parallel > 1) {
    auto pending = std::async(std::launch::async, make_attack);
    benign = make_benign();
    attack = pending.get();
  } else {
    benign = make_benign();
    attack = make_attack();
  }
  if (benign.empty() || attack.empty()) fail(kExitUsage, "ceremony corpora must be non-empty");

  {
    std::ostringstream b, a;
    write_distance_csv(b, index_ids("benign-", benign.size()), benign);
    write_distance_csv(a, index_ids("attack-", attack.size()), attack);
    write_file(fs::path(cfg.output_dir) / "benign_distances.csv", b.str());
    write_file(fs::path(cfg.output_dir) / "attack_distances.csv", a.str());
  }
  const auto hb = build_histogram(flatten(benign), cfg.histogram_bins);
  const auto ha = build_histogram(flatten(attack), cfg.histogram_bins);
  write_file(fs::path(cfg.output_dir) / "separation.csv", separation_csv(separation_report(hb, ha)));
  write_file(fs::path(cfg.output_dir) / "histogram.json",
             Json{{"benign", to_json(hb)}, {"attack", to_json(ha)}}.dump(2) + "\n");

  CeremonyInput input{to_curves(benign), to_curves(attack), cfg.detection_target};
  const AuditParams params = run_ceremony(input, cfg.t1_grid);
  const std::string text = to_json(params).dump(2) + "\n";
  write_file(fs::path(cfg.output_dir) / "audit_params.json", text);
  out << text;
  return kExitOk;
}

std::pair<std::string, std::uint16_t> split_endpoint(const std::string& s) {
  const auto colon = s.rfind(':');
  if (colon == std::string::npos) fail(kExitUsage, "server must be host:port");
  try {
    const unsigned long port = std::stoul(s.substr(colon + 1));
    if (port == 0 || port > 65535) throw std::out_of_range("port");
    return {s.substr(0, colon), static_cast<std::uint16_t>(port)};
  } catch (const std::exception&) {
    fail(kExitUsage, "bad port in '" + s + "'");
  }
}

int cmd_campaign(const RunConfig& cfg, std::ostream& out) {
  if (!cfg.audit_params) fail(kExitUsage, "campaign needs audit_params (config or --params)");
  const CampaignSection section = cfg.campaign.value_or(CampaignSection{});
  if (section.n_audits == 0) fail(kExitUsage, "campaign.n_audits must be positive");
  if (section.days == 0) fail(kExitUsage, "campaign.days must be positive");

  CampaignConfig cc;
  cc.server.spec = cfg.model;
  cc.server.honest = cfg.deviation;
  cc.server.attack = cfg.attack;
  cc.server.attack_rate = cfg.attack ? cfg.attack_rate : 0.0;
  cc.server.logging_mode = cfg.logging_mode;
  cc.server.distance_kind = cfg.distance_kind;
  cc.server.rng_seed = derive_seed(cfg.rng_seed, "server");
  cc.params = *cfg.audit_params;
  cc.n_audits = section.n_audits;
  cc.reject_threshold_k = section.reject_threshold_k;
  cc.days = section.days;
  cc.rng_seed = derive_seed(cfg.rng_seed, "auditor");
  cc.keep_probes = true;

  CampaignResult result;
  if (cfg.server) {
    const auto [host, port] = split_endpoint(*cfg.server);
    std::unique_ptr<TcpTransport> transport;
    try {
      transport = std::make_unique<TcpTransport>(host, port);
      result = run_campaign(cc, *transport, nullptr);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kProbeError) fail(kExitUnreachable, e.what());
      throw;
    }
  } else {
    result = run_campaign(cc);
  }

  fs::create_directories(cfg.output_dir);
  std::ostringstream verdicts;
  verdicts << "request_id,day,outcome,reason,p_t1,t1,t2,flagged,num_steps\n";
  std::vector<std::string> ids;
  std::vector<std::vector<DistanceSample>> samples;
  std::map<std::string, std::uint64_t> reasons;
  for (const auto& p : result.probes) {
    const auto& r = p.result;
    verdicts << r.request_id.str() << ',' << p.day << ',' << to_string(r.outcome) << ',' << r.reason << ',';
    if (r.verdict) {
      verdicts << real_to_string(r.verdict->p_t1) << ',' << real_to_string(r.verdict->t1) << ','
               << real_to_string(r.verdict->t2) << ',' << (r.verdict->flagged ? 1 : 0) << ','
               << r.verdict->num_steps << '\n';
      ids.push_back(r.request_id.str());
      samples.push_back(r.report->distance_samples);
    } else {
      verdicts << "nan," << real_to_string(cc.params.t1) << ',' << real_to_string(cc.params.t2) << ",1,0\n";
      ++reasons[r.reason];
    }
  }
  write_file(fs::path(cfg.output_dir) / "verdicts.csv", verdicts.str());
  {
    std::ostringstream d;
    write_distance_csv(d, ids, samples);
    write_file(fs::path(cfg.output_dir) / "distances.csv", d.str());
  }
  const auto all = flatten(samples);
  if (!all.empty()) {
    const auto h = build_histogram(all, cfg.histogram_bins);
    write_file(fs::path(cfg.output_dir) / "histogram.json", to_json(h).dump(2) + "\n");
    write_file(fs::path(cfg.output_dir) / "tail_table.csv", tail_table_csv(h));
  }

  Json days = Json::array();
  for (const auto& d : result.days) days.push_back(to_json(d));
  const Json report = {{"verdict", result.any_reject() ? "REJECT" : "ACCEPT"},
                       {"reject_days", result.reject_days()},
                       {"reject_threshold_k", cc.reject_threshold_k},
                       {"n_audits", cc.n_audits},
                       {"days", std::move(days)},
                       {"bottom_reasons", reasons},
                       {"audit_params", to_json(cc.params)},
                       {"distance_kind", to_string(cfg.distance_kind)}};
  const std::string text = report.dump(2) + "\n";
  write_file(fs::path(cfg.output_dir) / "campaign_report.json", text);
  out << text;
  return kExitOk;
}

struct ReportInput {
  std::vector<DistanceSample> samples;
};

ReportInput read_report_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) fail(kExitNoInput, "no such directory " + dir.string());
  const fs::path file = dir / "distances.csv";
  if (!fs::exists(file)) fail(kExitNoInput, "missing " + file.string());
  std::ifstream in(file);
  return {flatten(read_distance_csv(in))};
}

int cmd_report(const RunConfig& cfg, const std::vector<std::string>& inputs, std::ostream& out) {
  if (inputs.empty()) fail(kExitUsage, "report needs at least one input directory");
  if (inputs.size() > 2) fail(kExitUsage, "report takes one or two input directories");
  std::vector<ReportInput> data;
  for (const auto& d : inputs) data.push_back(read_report_dir(d));
  if (data.front().samples.empty()) fail(kExitNoInput, inputs.front() + " holds no distance samples");
  fs::create_directories(cfg.output_dir);

  std::map<DistanceKind, std::vector<double>> by_kind;
  for (const auto& s : data.front().samples) by_kind[s.kind].push_back(s.flagged ? std::numeric_limits<double>::infinity() : s.value);
  for (const auto& [kind, values] : by_kind) {
    write_file(fs::path(cfg.output_dir) / ("histogram_" + std::string(to_string(kind)) + ".csv"),
               log_histogram_csv(values));
  }
  const auto h0 = build_histogram(data.front().samples, cfg.histogram_bins);
  write_file(fs::path(cfg.output_dir) / "tail_table.csv", tail_table_csv(h0));
  Json summary = {{"inputs", inputs}, {"tail_probs", to_json(h0)["tail_probs"]}};
  if (data.size() == 2) {
    if (data.back().samples.empty()) fail(kExitNoInput, inputs.back() + " holds no distance samples");
    const auto h1 = build_histogram(data.back().samples, cfg.histogram_bins);
    const auto rows = separation_report(h0, h1);
    write_file(fs::path(cfg.output_dir) / "separation.csv", separation_csv(rows));
    summary["attack_tail_probs"] = to_json(h1)["tail_probs"];
  }
  out << summary.dump(2) << "\n";
  return kExitOk;
}

int cmd_plan(const RunConfig& cfg, std::ostream& out) {
  const PlanSection p = cfg.plan.value_or(PlanSection{});
  CampaignPlan plan;
  try {
    plan = plan_campaign(p.alpha, p.p_detect, p.eta, p.fp, p.completeness_target);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInfeasible) fail(kExitPlanInfeasible, e.what());
    if (e.code() == ErrorCode::kInvalidArgument) fail(kExitUsage, e.what());
    throw;
  }
  Json j = to_json(plan);
  // Raw and folded readings of the per-audit detection probability.
  j["detect_prob_folded"] = real_to_string(plan.soundness);
  j["detect_prob_raw"] = real_to_string(detect_prob(plan.n_audits, p.p_detect, plan.reject_threshold_k));
  const std::string text = j.dump(2) + "\n";
  fs::create_directories(cfg.output_dir);
  write_file(fs::path(cfg.output_dir) / "plan.json", text);
  out << text;
  return kExitOk;
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kCalibrationInfeasible: return kExitCalibrationInfeasible;
    case ErrorCode::kProbeError: return kExitUnreachable;
    case ErrorCode::kInfeasible: return kExitPlanInfeasible;
    case ErrorCode::kParseError: return kExitDataError;
    default: return kExitError;
  }
}

}  // namespace

RunConfig run_config_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kParseError, "config must be a JSON object");
  RunConfig c;
  try {
    if (j.contains("model")) c.model = model_spec_from_json(j["model"]);
    if (j.contains("deviation")) c.deviation = deviation_from_json(j["deviation"]);
    if (j.contains("attack") && !j["attack"].is_null()) c.attack = deviation_from_json(j["attack"]);
    c.attack_rate = real_or(j, "attack_rate", c.attack_rate);
    if (j.contains("logging_mode")) c.logging_mode = logging_mode_from_string(j["logging_mode"].get<std::string>());
    if (j.contains("distance_kind")) c.distance_kind = parse_distance_kind(j["distance_kind"].get<std::string>());
    c.corpus_size = get_or<std::size_t>(j, "corpus_size", c.corpus_size);
    c.detection_target = real_or(j, "detection_target", c.detection_target);
    if (j.contains("t1_grid")) {
      c.t1_grid.clear();
      for (const auto& v : j["t1_grid"]) c.t1_grid.push_back(real_from_json(v));
    }
    c.histogram_bins = get_or<std::size_t>(j, "histogram_bins", c.histogram_bins);
    if (j.contains("audit_params") && !j["audit_params"].is_null()) {
      const Json& a = j["audit_params"];
      AuditParams p;
      p.t1 = real_from_json(a.at("t1"));
      p.t2 = real_from_json(a.at("t2"));
      p.estimated_fp = real_or(a, "estimated_fp", 0.0);
      p.estimated_detection = real_or(a, "estimated_detection", 0.0);
      c.audit_params = p;
    }
    if (j.contains("campaign") && !j["campaign"].is_null()) {
      const Json& s = j["campaign"];
      CampaignSection cs;
      cs.n_audits = get_or<std::uint64_t>(s, "n_audits", cs.n_audits);
      cs.reject_threshold_k = get_or<std::uint64_t>(s, "reject_threshold_k", cs.reject_threshold_k);
      cs.days = get_or<std::uint32_t>(s, "days", cs.days);
      c.campaign = cs;
    }
    if (j.contains("plan") && !j["plan"].is_null()) {
      const Json& s = j["plan"];
      PlanSection ps;
      ps.alpha = real_or(s, "alpha", ps.alpha);
      ps.p_detect = real_or(s, "p_detect", ps.p_detect);
      ps.eta = real_or(s, "eta", ps.eta);
      ps.fp = real_or(s, "fp", ps.fp);
      ps.completeness_target = real_or(s, "completeness_target", ps.completeness_target);
      c.plan = ps;
    }
    if (j.contains("benign_corpus")) c.benign_corpus = j["benign_corpus"].get<std::string>();
    if (j.contains("attack_corpus")) c.attack_corpus = j["attack_corpus"].get<std::string>();
    if (j.contains("server") && !j["server"].is_null()) c.server = j["server"].get<std::string>();
    c.output_dir = get_or<std::string>(j, "output_dir", c.output_dir);
    c.rng_seed = get_or<std::uint64_t>(j, "rng_seed", c.rng_seed);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
  try {
    c.model.validate();
    c.deviation.validate();
    if (c.attack) c.attack->validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
  if (!(c.attack_rate >= 0.0 && c.attack_rate <= 1.0)) {
    throw Error(ErrorCode::kParseError, "attack_rate must lie in [0, 1]");
  }
  return c;
}

Json to_json(const RunConfig& c) {
  Json j = {{"model", to_json(c.model)},
            {"deviation", to_json(c.deviation)},
            {"attack_rate", real_to_string(c.attack_rate)},
            {"logging_mode", to_string(c.logging_mode)},
            {"distance_kind", to_string(c.distance_kind)},
            {"corpus_size", c.corpus_size},
            {"detection_target", real_to_string(c.detection_target)},
            {"histogram_bins", c.histogram_bins},
            {"output_dir", c.output_dir},
            {"rng_seed", c.rng_seed}};
  Json grid = Json::array();
  for (double t : c.t1_grid) grid.push_back(real_to_string(t));
  j["t1_grid"] = std::move(grid);
  if (c.attack) j["attack"] = to_json(*c.attack);
  if (c.audit_params) j["audit_params"] = to_json(*c.audit_params);
  if (c.campaign) {
    j["campaign"] = {{"n_audits", c.campaign->n_audits},
                     {"reject_threshold_k", c.campaign->reject_threshold_k},
                     {"days", c.campaign->days}};
  }
  if (c.plan) {
    j["plan"] = {{"alpha", real_to_string(c.plan->alpha)},
                 {"p_detect", real_to_string(c.plan->p_detect)},
                 {"eta", real_to_string(c.plan->eta)},
                 {"fp", real_to_string(c.plan->fp)},
                 {"completeness_target", real_to_string(c.plan->completeness_target)}};
  }
  if (c.benign_corpus) j["benign_corpus"] = *c.benign_corpus;
  if (c.attack_corpus) j["attack_corpus"] = *c.attack_corpus;
  if (c.server) j["server"] = *c.server;
  return j;
}

void apply_override(Json& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw Error(ErrorCode::kInvalidArgument, "override must look like key.path=value");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  Json value = Json::parse(raw, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) value = raw;

  Json* node = &config;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw Error(ErrorCode::kInvalidArgument, "empty path segment in '" + key + "'");
    if (!node->is_object()) {
      if (!node->is_null()) throw Error(ErrorCode::kInvalidArgument, "'" + key + "' crosses a non-object");
      *node = Json::object();
    }
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  *node = std::move(value);
}

void write_distance_csv(std::ostream& out, const std::vector<std::string>& request_ids,
                        const std::vector<std::vector<DistanceSample>>& samples) {
  if (request_ids.size() != samples.size()) {
    throw Error(ErrorCode::kShapeError, "one request id per sample list is required");
  }
  out << "request_id,step_index,kind,value,flagged\n";
  for (std::size_t r = 0; r < samples.size(); ++r) {
    for (const auto& s : samples[r]) {
      out << request_ids[r] << ',' << s.step_index << ',' << to_string(s.kind) << ','
          << real_to_string(s.value) << ',' << (s.flagged ? 1 : 0) << '\n';
    }
  }
}

std::vector<std::vector<DistanceSample>> read_distance_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "request_id,step_index,kind,value,flagged") {
    throw Error(ErrorCode::kParseError, "missing distance CSV header");
  }
  std::vector<std::vector<DistanceSample>> out;
  std::map<std::string, std::size_t> slot;
  std::ostringstream rest;
  rest << "step_index,kind,value,flagged\n";
  std::vector<std::string> owners;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(ErrorCode::kParseError, "malformed row: " + line);
    owners.push_back(line.substr(0, comma));
    rest << line.substr(comma + 1) << '\n';
  }
  std::istringstream body(rest.str());
  const auto samples = read_samples_csv(body);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    auto [it, inserted] = slot.emplace(owners[i], out.size());
    if (inserted) out.emplace_back();
    out[it->second].push_back(samples[i]);
  }
  return out;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Randomized logit auditing: ceremony, campaigns, reports and plans"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  std::size_t parallel = 1;
  std::optional<std::uint64_t> seed;
  std::string params_path;
  std::vector<std::string> report_inputs;

  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--set", overrides, "Override KEY=VALUE (dotted keys, JSON values)");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--parallel", parallel, "Worker threads (results do not depend on it)")
      ->check(CLI::Range(std::size_t{1}, std::size_t{256}));
  app.add_option("--seed", seed, "Master RNG seed");

  auto* ceremony = app.add_subcommand("ceremony", "Calibrate (t1, t2) from benign and attack corpora");
  auto* campaign = app.add_subcommand("campaign", "Run audit probes against a server");
  campaign->add_option("--params", params_path, "audit_params.json from a ceremony");
  auto* report = app.add_subcommand("report", "Plot-ready tables from campaign outputs");
  report->add_option("inputs", report_inputs, "One campaign directory, or benign and attack directories");
  auto* plan = app.add_subcommand("plan", "Audit count and flag threshold for a campaign");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    Json cfg_json = Json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) fail(kExitNoInput, "cannot read config " + config_path);
      try {
        cfg_json = Json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        fail(kExitDataError, std::string("config: ") + e.what());
      }
    }
    for (const auto& o : overrides) {
      try {
        apply_override(cfg_json, o);
      } catch (const Error& e) {
        fail(kExitUsage, e.what());
      }
    }
    if (!params_path.empty()) {
      std::ifstream in(params_path);
      if (!in) fail(kExitNoInput, "cannot read params " + params_path);
      try {
        cfg_json["audit_params"] = Json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        fail(kExitDataError, std::string("params: ") + e.what());
      }
    }
    RunConfig cfg = run_config_from_json(cfg_json);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (seed) cfg.rng_seed = *seed;

    if (*ceremony) return cmd_ceremony(cfg, parallel, out);
    if (*campaign) return cmd_campaign(cfg, out);
    if (*report) return cmd_report(cfg, report_inputs, out);
    if (*plan) return cmd_plan(cfg, out);
    return kExitUsage;
  } catch (const ExitError& e) {
    err << "error: " << e.message << "\n";
    return e.code;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace logitaudit::cli
