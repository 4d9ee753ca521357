// Acceptance harness: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <boost/multiprecision/cpp_dec_float.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "logitaudit/audit_math.h"
#include "logitaudit/auditor.h"
#include "logitaudit/calibration.h"
#include "logitaudit/cli.h"
#include "logitaudit/error.h"
#include "logitaudit/ldd_stats.h"
#include "logitaudit/metrics.h"
#include "logitaudit/server.h"
#include "logitaudit/simulation.h"
#include "logitaudit/transport.h"
#include "logitaudit/vc.h"

using namespace logitaudit;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Prompt random_prompt(std::mt19937_64& rng, std::uint32_t vocab, std::uint32_t lo, std::uint32_t hi) {
  Prompt p(std::uniform_int_distribution<std::uint32_t>(lo, hi)(rng));
  std::uniform_int_distribution<TokenId> tok(0, vocab - 1);
  for (auto& t : p) t = tok(rng);
  return p;
}

ServerConfig server_with(DeviationConfig dev, LoggingMode mode = LoggingMode::kFull,
                         DistanceKind kind = DistanceKind::kTV, std::uint64_t seed = 1) {
  ServerConfig c;
  c.honest = dev;
  c.logging_mode = mode;
  c.distance_kind = kind;
  c.rng_seed = seed;
  return c;
}

VcStatement statement_for(const Server& s, const LogEntry& e) {
  return {s.model_commitment(), e.commitment, e.prompt, e.result.output_tokens,
          e.result.reported_token_count};
}

// ---------------------------------------------------------------- 1
Outcome criterion1() {
  Outcome o;
  const double ex1 = topk_distance(std::vector<double>{1, 2, 3}, IndexSet{0}, 1);
  const double ex2 = topk_distance(std::vector<double>{5, 4, 3, 2}, IndexSet{0, 2}, 2);
  const bool examples = std::abs(ex1 - 2.0) <= 1e-12 && std::abs(ex2 - 1.0) <= 1e-12;

  struct Instance {
    std::vector<double> l;
    IndexSet idx;
    std::size_t k;
  };
  std::mt19937_64 rng(101);
  std::vector<Instance> inst(10000);
  for (auto& in : inst) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 20)(rng);
    in.k = std::uniform_int_distribution<std::size_t>(1, n)(rng);
    in.l.resize(n);
    for (auto& x : in.l) x = std::uniform_real_distribution<double>(-10.0, 10.0)(rng);
    std::vector<std::uint32_t> all(n);
    for (std::uint32_t i = 0; i < n; ++i) all[i] = i;
    std::shuffle(all.begin(), all.end(), rng);
    in.idx.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(in.k));
  }
  std::vector<double> fast(inst.size());
  const auto t0 = Clock::now();
  for (std::size_t i = 0; i < inst.size(); ++i) fast[i] = topk_distance(inst[i].l, inst[i].idx, inst[i].k);
  const double fast_s = seconds_since(t0);

  const auto t1 = Clock::now();
  double worst = 0.0;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    const double ref = topk_distance_oracle(inst[i].l, inst[i].idx, inst[i].k, 1e-2);
    worst = std::max(worst, std::abs(ref - fast[i]));
  }
  const double oracle_s = seconds_since(t1);
  o.pass = examples && worst <= 1e-9 && fast_s < 5.0;
  o.detail = fmt("worked examples %s (%g, %g); max |fast - oracle| = %.3g over 1e4; fast %.3fs, oracle %.1fs",
                 examples ? "ok" : "WRONG", ex1, ex2, worst, fast_s, oracle_s);
  return o;
}

// ---------------------------------------------------------------- 2
Outcome criterion2() {
  using Big = boost::multiprecision::cpp_dec_float_50;
  const std::uint64_t n = required_samples(0.1, 0.01, 0.05);
  // Smallest n with (1 - alpha p)^n <= eta, evaluated at 50 digits.
  const Big q = Big(1) - Big(1) / 1000;
  const Big eta = Big(5) / 100;
  Big acc = 1;
  std::uint64_t exact = 0;
  for (std::uint64_t i = 1; i < 100000; ++i) {
    acc *= q;
    if (acc <= eta) {
      exact = i;
      break;
    }
  }
  Outcome o;
  o.pass = n == 2995 && exact == 2995;
  o.detail = fmt("required_samples(0.1, 0.01, 0.05) = %llu; 50-digit search gives %llu",
                 static_cast<unsigned long long>(n), static_cast<unsigned long long>(exact));
  return o;
}

// ---------------------------------------------------------------- 3
Outcome criterion3() {
  const double fr = false_reject_prob(3000, 1e-5, 3);
  // Poisson(0.03) upper tail P[X > 3] as a direct series from j = 4.
  const double lambda = 0.03;
  double term = std::exp(-lambda);
  for (int j = 1; j <= 4; ++j) term *= lambda / j;
  double poisson = 0.0;
  for (int j = 4; j < 40; ++j) {
    poisson += term;
    term *= lambda / (j + 1);
  }
  const double rel = std::abs(fr - poisson) / poisson;
  Outcome o;
  o.pass = fr <= 1e-7 && rel <= 0.10;
  o.detail = fmt("false_reject_prob = %.6g (<= 1e-7), Poisson tail %.6g, relative gap %.3g%%", fr,
                 poisson, 100 * rel);
  return o;
}

// ---------------------------------------------------------------- 4
Outcome criterion4() {
  const double p = detect_prob(3000, 1e-3, 3);
  std::mt19937_64 rng(404);
  std::binomial_distribution<int> draws(3000, 1e-3);
  const int trials = 1'000'000;
  int hits = 0;
  for (int t = 0; t < trials; ++t) hits += draws(rng) > 3;
  const double mc = static_cast<double>(hits) / trials;
  const double se = std::sqrt(p * (1 - p) / trials);
  Outcome o;
  o.pass = p >= 0.30 && p <= 0.40 && std::abs(mc - p) <= 3 * se;
  o.detail = fmt("detect_prob = %.6f; Monte-Carlo %.6f over 1e6 trials, |diff| = %.2f SE", p, mc,
                 std::abs(mc - p) / se);
  return o;
}

// ---------------------------------------------------------------- 5
Outcome criterion5() {
  std::mt19937_64 rng(505);
  std::size_t checked = 0, y_mismatch = 0, t_mismatch = 0, vc_fail = 0, unflagged_dummy = 0,
              flagged_real = 0;
  for (std::uint32_t k : {1u, 5u, 17u}) {
    Server honest(server_with(DeviationConfig::benign(), LoggingMode::kFull, DistanceKind::kTV, k));
    Server over(server_with(DeviationConfig::overreport(k), LoggingMode::kFull, DistanceKind::kTV, k));
    for (int i = 0; i < 100; ++i) {
      const RequestMsg req{RequestId::random(rng), random_prompt(rng, 64, 8, 64)};
      const auto a = honest.handle_request(req);
      const auto b = over.handle_request(req);
      ++checked;
      y_mismatch += a.output_tokens != b.output_tokens;
      t_mismatch += b.token_count != a.token_count + k;
      const auto proof = over.handle_audit(AuditMsg{req.request_id});
      if (!proof.vc_ok()) {
        ++vc_fail;
        continue;
      }
      std::set<std::uint32_t> dummies;
      for (const auto& s : over.log_store().get(req.request_id)->result.trace) {
        if (s.is_dummy()) dummies.insert(s.step_index);
      }
      std::set<std::uint32_t> flagged;
      for (const auto& s : proof.report.distance_samples) {
        if (s.flagged) flagged.insert(s.step_index);
      }
      for (auto d : dummies) unflagged_dummy += !flagged.contains(d);
      for (auto f : flagged) flagged_real += !dummies.contains(f);
      if (dummies.size() != k) ++t_mismatch;
    }
  }
  Outcome o;
  o.pass = checked == 300 && y_mismatch == 0 && t_mismatch == 0 && vc_fail == 0 &&
           unflagged_dummy == 0 && flagged_real == 0;
  o.detail = fmt("%zu runs over K in {1,5,17}: y mismatches %zu, T != T_honest + K %zu, VC failures %zu, "
                 "unflagged dummy steps %zu, flagged real steps %zu",
                 checked, y_mismatch, t_mismatch, vc_fail, unflagged_dummy, flagged_real);
  return o;
}

// ---------------------------------------------------------------- 6
Outcome criterion6() {
  Server server(server_with(DeviationConfig::benign()));
  InProcessTransport transport(server);
  AuditorConfig ac;
  ac.params = {0.0, 0.0, 0.0, 0.0};  // strictest thresholds: any positive distance flags
  ac.model_commitment = server.model_commitment();
  ac.rng_seed = 606;
  Auditor auditor(ac);
  std::size_t passes = 0, zero = 0, verdict0 = 0, steps = 0;
  for (int i = 0; i < 100; ++i) {
    const auto r = auditor.probe(transport);
    if (r.report && r.report->passed()) ++passes;
    bool all_zero = r.report.has_value();
    if (r.report) {
      for (const auto& s : r.report->distance_samples) {
        all_zero = all_zero && s.value == 0.0 && !s.flagged;
        ++steps;
      }
    }
    zero += all_zero;
    verdict0 += r.outcome == ProbeOutcome::kAccept;
  }
  Outcome o;
  o.pass = passes == 100 && zero == 100 && verdict0 == 100;
  o.detail = fmt("VC passes %zu/100, all-zero distance traces %zu/100 (%zu steps), verdict 0 %zu/100",
                 passes, zero, steps, verdict0);
  return o;
}

// ---------------------------------------------------------------- 7
// One random single-field mutation of an opening (o) or of the response
// fields that end up in the statement (st). Returns a label.
std::string mutate(TraceOpening& o, VcStatement& st, std::mt19937_64& rng) {
  auto bit = [&](int width) { return static_cast<std::uint64_t>(1) << (rng() % width); };
  auto& s = o.trace[rng() % o.trace.size()];
  switch (rng() % 9) {
    case 0:
      o.seed_r[rng() % o.seed_r.size()] ^= static_cast<std::uint8_t>(bit(8));
      return "seed";
    case 1:
      if (s.has_logits()) {
        auto& l = std::get<Logits>(s.payload);
        auto& x = l[rng() % l.size()];
        x = std::bit_cast<double>(std::bit_cast<std::uint64_t>(x) ^ bit(64));
        return "logit";
      } else {
        auto& idx = std::get<IndexSet>(s.payload);
        idx[rng() % idx.size()] ^= static_cast<std::uint32_t>(bit(6));
        return "topk_index";
      }
    case 2:
      s.decision[rng() % s.decision.size()] ^= static_cast<std::uint32_t>(bit(6));
      return "decision";
    case 3:
      s.rand_tag ^= bit(64);
      return "rand_tag";
    case 4:
      s.step_index += 1 + static_cast<std::uint32_t>(rng() % 3);
      return "step_index";
    case 5:
      if (o.trace.size() > 1 && rng() % 2) {
        o.trace.erase(o.trace.begin() + static_cast<std::ptrdiff_t>(rng() % o.trace.size()));
      } else {
        o.trace.push_back(o.trace.back());
      }
      return "step_count";
    case 6:
      if (!st.output_tokens.empty() && rng() % 2) {
        auto& t = st.output_tokens[rng() % st.output_tokens.size()];
        t = (t + 1 + static_cast<TokenId>(rng() % 62)) % 64;
      } else {
        st.output_tokens.push_back(static_cast<TokenId>(rng() % 64));
      }
      return "response_y";
    case 7:
      st.token_count = rng() % 2 ? st.token_count + 1 + rng() % 5
                                 : (st.token_count == 0 ? 1 : st.token_count - 1);
      return "response_T";
    default:
      st.trace_commitment.digest[rng() % st.trace_commitment.digest.size()] ^=
          static_cast<std::uint8_t>(bit(8));
      return "response_commitment";
  }
}

Outcome criterion7() {
  std::mt19937_64 rng(707);
  std::size_t trials = 0, escapes = 0;
  std::map<std::string, std::size_t> kinds;
  for (auto [mode, kind] : {std::pair{LoggingMode::kFull, DistanceKind::kTV},
                            std::pair{LoggingMode::kCompactTopK, DistanceKind::kTopK}}) {
    Server server(server_with(DeviationConfig::benign(0.01), mode, kind, 7));
    HybridModel reference(server.config().spec);
    std::vector<std::shared_ptr<const LogEntry>> pool;
    for (int i = 0; i < 50; ++i) {
      const auto r = server.handle_prompt(random_prompt(rng, 64, 8, 32));
      pool.push_back(server.log_store().get(r.request_id));
    }
    for (int t = 0; t < 500; ++t) {
      const auto& e = *pool[rng() % pool.size()];
      const TraceOpening original = e.opening();
      const VcStatement honest_st = statement_for(server, e);
      TraceOpening o = original;
      VcStatement st = honest_st;
      const std::string label = mutate(o, st, rng);
      if (o == original && st == honest_st) {
        --t;  // no-op draw
        continue;
      }
      ++trials;
      ++kinds[label];
      VcReport rep;
      try {
        rep = vc_execute(st, VcWitness{server.config().spec, o}, kind, &reference);
      } catch (const Error&) {
        continue;  // refusing to run counts as an abort
      }
      if (!rep.aborted) {
        ++escapes;
        std::fprintf(stderr, "escape: %s\n", label.c_str());
      }
    }
  }
  std::string mix;
  for (const auto& [k, n] : kinds) mix += k + "=" + std::to_string(n) + " ";
  Outcome o;
  o.pass = trials == 1000 && escapes == 0;
  o.detail = fmt("%zu mutations (%s), escapes %zu", trials, mix.c_str(), escapes);
  return o;
}

// ---------------------------------------------------------------- 8
struct Corpora {
  std::vector<std::vector<DistanceSample>> benign, quantized, substituted;
};

Corpora criterion8_corpora() {
  auto collect = [](DeviationConfig dev, std::uint64_t seed) {
    CorpusConfig cc;
    cc.deviation = dev;
    cc.n_requests = 5000;
    cc.rng_seed = seed;
    return collect_corpus(cc);
  };
  return {collect(DeviationConfig::benign(0.01), 801), collect(DeviationConfig::quantized(0.05), 802),
          collect(DeviationConfig::substituted(0.5), 803)};
}

Outcome criterion8(const Corpora& c) {
  const auto hb = build_histogram(flatten(c.benign), 50);
  const auto hq = build_histogram(flatten(c.quantized), 50);
  const auto hs = build_histogram(flatten(c.substituted), 50);
  const double b = hb.tail_probs.at(0.1), q = hq.tail_probs.at(0.1), s = hs.tail_probs.at(0.1);
  const bool ordered = b < q && q < s;
  const bool gaps = q >= 10 * b && s >= 10 * q;
  const std::uint64_t min_steps = std::min({hb.total, hq.total, hs.total});
  Outcome o;
  o.pass = ordered && gaps && min_steps >= 100000;
  o.detail = fmt("tail(0.1): benign %.3g < quantized %.3g < substituted %.3g; ratios q/b %s, s/q %.1f; "
                 "steps %llu / %llu / %llu",
                 b, q, s, b == 0 ? "inf (benign tail is 0)" : fmt("%.1f", q / b).c_str(), s / q,
                 static_cast<unsigned long long>(hb.total), static_cast<unsigned long long>(hq.total),
                 static_cast<unsigned long long>(hs.total));
  return o;
}

// ---------------------------------------------------------------- 9
Outcome criterion9(const Corpora& c, const Corpora& again) {
  auto head = [](const std::vector<std::vector<DistanceSample>>& v) {
    return std::vector<std::vector<DistanceSample>>(v.begin(), v.begin() + 200);
  };
  const auto grid = default_t1_grid();
  const CeremonyInput in{to_curves(head(c.benign)), to_curves(head(c.quantized)), 0.05};
  const auto params = run_ceremony(in, grid);
  const CeremonyInput in2{to_curves(head(again.benign)), to_curves(head(again.quantized)), 0.05};
  const bool rerun_identical = to_json(run_ceremony(in2, grid)).dump() == to_json(params).dump();

  std::size_t detected = 0;
  for (const auto& curve : in.attack_stats) detected += request_tail(curve, params.t1) > params.t2;
  const double detection = static_cast<double>(detected) / 200.0;

  // The FP figure must come from the tail model, not the empirical fallback.
  std::vector<double> benign_p;
  for (const auto& curve : in.benign_stats) benign_p.push_back(request_tail(curve, params.t1));
  const auto fit = fit_evt(benign_p);
  const bool from_evt = params.t2 >= fit.threshold_u && estimate_fp_evt(fit, params.t2) == params.estimated_fp;

  // Byte-identical CLI reruns.
  const fs::path base = fs::temp_directory_path() / "logitaudit_acceptance_c9";
  fs::remove_all(base);
  auto cli_run = [&](const std::string& dir) {
    std::vector<std::string> args{"logitaudit", "--out", (base / dir).string(), "--seed", "9",
                                  "--set", R"(deviation={"kind":"Benign","noise_sigma":0.01})",
                                  "--set", R"(attack={"kind":"Quantized","noise_sigma":0.05})",
                                  "ceremony"};
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream out, err;
    return cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  };
  const bool cli_ok = cli_run("a") == 0 && cli_run("b") == 0;
  bool files_identical = cli_ok;
  for (const auto& entry : fs::directory_iterator(base / "a")) {
    auto slurp = [](const fs::path& p) {
      std::ifstream f(p, std::ios::binary);
      std::ostringstream s;
      s << f.rdbuf();
      return s.str();
    };
    files_identical = files_identical && slurp(entry.path()) == slurp(base / "b" / entry.path().filename());
  }
  fs::remove_all(base);

  Outcome o;
  o.pass = detection >= 0.05 && params.estimated_fp < 1e-3 && from_evt && rerun_identical && files_identical;
  o.detail = fmt("t1 = %.5g, t2 = %.5g, post-hoc detection %.3f, EVT FP %.3g (xi %.3g, u %.3g, %s), "
                 "in-process rerun %s, CLI rerun files %s",
                 params.t1, params.t2, detection, params.estimated_fp, fit.shape_xi, fit.threshold_u,
                 from_evt ? "EVT branch" : "NOT from EVT", rerun_identical ? "identical" : "DIFFERENT",
                 files_identical ? "identical" : "DIFFERENT");
  return o;
}

// ---------------------------------------------------------------- 10
Outcome criterion10() {
  std::mt19937_64 rng(1010);
  std::vector<double> ex(10000), un(10000);
  std::exponential_distribution<double> e(1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& x : ex) x = e(rng);
  for (auto& x : un) x = u(rng);
  const auto fe = fit_evt(ex);
  const auto fu = fit_evt(un);
  Outcome o;
  o.pass = std::abs(fe.shape_xi) <= 0.15 && std::abs(fu.shape_xi + 1.0) <= 0.15;
  o.detail = fmt("exponential xi = %.4f (target 0), uniform xi = %.4f (target -1), 1e4 samples each",
                 fe.shape_xi, fu.shape_xi);
  return o;
}

// ---------------------------------------------------------------- 11
Outcome criterion11() {
  const auto t0 = Clock::now();
  ModelSpec spec;  // vocab 64, hidden 32
  spec.max_steps = 12;
  const std::uint32_t min_len = 8, max_len = 16;

  CorpusConfig cc;
  cc.spec = spec;
  cc.min_prompt_len = min_len;
  cc.max_prompt_len = max_len;
  cc.deviation = DeviationConfig::benign(0.01);
  cc.rng_seed = 1101;
  const auto benign = to_curves(collect_corpus(cc));
  cc.deviation = DeviationConfig::quantized(0.05);
  cc.rng_seed = 1102;
  const auto attack = to_curves(collect_corpus(cc));
  const auto params = run_ceremony({benign, attack, 0.05}, default_t1_grid());

  CampaignConfig camp;
  camp.server.spec = spec;
  camp.server.honest = DeviationConfig::benign(0.01);
  camp.server.attack = DeviationConfig::quantized(0.05);
  camp.server.attack_rate = 0.1;
  camp.server.rng_seed = 1103;
  camp.params = params;
  camp.n_audits = 3000;
  camp.reject_threshold_k = 3;
  camp.days = 30;
  camp.rng_seed = 1104;
  camp.min_prompt_len = min_len;
  camp.max_prompt_len = max_len;
  const std::size_t reps = 20;
  const auto results = run_repetitions(camp, reps, 1);

  std::uint64_t reject_days = 0, total_days = 0, reps_with_reject = 0, flags = 0, attacked = 0;
  for (const auto& r : results) {
    reject_days += r.reject_days();
    total_days += r.days.size();
    reps_with_reject += r.any_reject();
    for (const auto& d : r.days) {
      flags += d.detections();
      attacked += d.attacked_audits;
    }
  }
  const double d = static_cast<double>(reject_days) / static_cast<double>(total_days);
  const double predicted = 1.0 - persistent_evasion_prob(d, 30);
  const double empirical = static_cast<double>(reps_with_reject) / static_cast<double>(reps);
  const double sigma = std::sqrt(predicted * (1 - predicted) / static_cast<double>(reps));
  const bool consistent = std::abs(empirical - predicted) <= 3 * sigma + 1e-12;
  const double wall = seconds_since(t0);
  Outcome o;
  o.pass = reject_days >= 1 && consistent && wall < 600.0;
  o.detail = fmt("params t1 = %.4g t2 = %.4g; %llu/%llu REJECT days (d = %.4f), predicted P(>=1 in 30) = %.4f, "
                 "empirical %.2f over %zu reps (3 sigma = %.3g); detections %llu on %llu attacked audits; "
                 "max_steps 12, prompts 8-16; wall %.0fs",
                 params.t1, params.t2, static_cast<unsigned long long>(reject_days),
                 static_cast<unsigned long long>(total_days), d, predicted, empirical, reps, 3 * sigma,
                 static_cast<unsigned long long>(flags), static_cast<unsigned long long>(attacked), wall);
  return o;
}

// ---------------------------------------------------------------- 12
Outcome criterion12() {
  Server server(server_with(DeviationConfig::benign(0.01), LoggingMode::kCompactTopK, DistanceKind::kTopK));
  std::mt19937_64 rng(1212);
  double worst = 0.0, sum = 0.0;
  const int n = 200;
  for (int i = 0; i < n; ++i) {
    const auto r = server.handle_prompt(random_prompt(rng, 64, 8, 64));
    const double b = bytes_per_token(*server.log_store().get(r.request_id));
    worst = std::max(worst, b);
    sum += b;
  }
  Outcome o;
  o.pass = worst <= 1024.0;
  o.detail = fmt("compact entries: max %.1f B/token, mean %.1f B/token over %d requests", worst, sum / n, n);
  return o;
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s criterion %d (%s): %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  };
  report(1, "top-K distance oracle", criterion1);
  report(2, "sample-size arithmetic", criterion2);
  report(3, "completeness bound", criterion3);
  report(4, "soundness bound", criterion4);
  report(5, "token overreporting", criterion5);
  report(6, "honest-path completeness", criterion6);
  report(7, "tamper evidence", criterion7);
  Corpora corpora;
  report(8, "benign < quantized < substituted tails", [&] {
    corpora = criterion8_corpora();
    return criterion8(corpora);
  });
  report(9, "ceremony end to end", [&] { return criterion9(corpora, criterion8_corpora()); });
  report(10, "EVT recovery", criterion10);
  report(11, "campaign-level detection", criterion11);
  report(12, "storage bound", criterion12);
  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
