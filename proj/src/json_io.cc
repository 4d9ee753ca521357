#include "logitaudit/json_io.h"

#include <charconv>
#include <cmath>

#include "logitaudit/error.h"

namespace logitaudit {
namespace {

[[noreturn]] void parse_fail(const std::string& what) {
  throw Error(ErrorCode::kParseError, what);
}

const Json& field(const Json& j, const char* name) {
  if (!j.is_object()) parse_fail("expected a JSON object");
  auto it = j.find(name);
  if (it == j.end()) parse_fail(std::string("missing field '") + name + "'");
  return *it;
}

template <typename T>
T integer_field(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (!v.is_number_integer()) {
    parse_fail(std::string("field '") + name + "' must be an integer");
  }
  if (v.is_number_unsigned()) return static_cast<T>(v.get<std::uint64_t>());
  const auto s = v.get<std::int64_t>();
  if (s < 0) parse_fail(std::string("field '") + name + "' must be non-negative");
  return static_cast<T>(s);
}

IndexSet index_list(const Json& j) {
  if (!j.is_array()) parse_fail("expected an index array");
  IndexSet out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number_unsigned() && !v.is_number_integer()) {
      parse_fail("index must be an integer");
    }
    out.push_back(v.get<std::uint32_t>());
  }
  return out;
}

}  // namespace

std::string real_to_string(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, end);
}

double real_from_json(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (!j.is_string()) parse_fail("real must be a decimal string");
  const auto& s = j.get_ref<const std::string&>();
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && s.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) parse_fail("bad real '" + s + "'");
  return v;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

std::vector<std::uint8_t> from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) parse_fail("hex string has odd length");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    parse_fail("non-hex character");
  };
  std::vector<std::uint8_t> out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 |
                                       nibble(hex[2 * i + 1]));
  }
  return out;
}

std::string_view to_string(DeviationKind kind) {
  switch (kind) {
    case DeviationKind::kBenign: return "Benign";
    case DeviationKind::kQuantized: return "Quantized";
    case DeviationKind::kSubstituted: return "Substituted";
    case DeviationKind::kOverreport: return "Overreport";
    case DeviationKind::kFabricated: return "Fabricated";
  }
  return "?";
}

std::string_view to_string(DecisionKind kind) {
  return kind == DecisionKind::kTokenSample ? "TokenSample" : "ExpertRoute";
}

std::string_view to_string(LoggingMode mode) {
  return mode == LoggingMode::kFull ? "Full" : "CompactTopK";
}

DeviationKind deviation_kind_from_string(std::string_view s) {
  for (auto k : {DeviationKind::kBenign, DeviationKind::kQuantized,
                 DeviationKind::kSubstituted, DeviationKind::kOverreport,
                 DeviationKind::kFabricated}) {
    if (to_string(k) == s) return k;
  }
  parse_fail("unknown deviation kind '" + std::string(s) + "'");
}

LoggingMode logging_mode_from_string(std::string_view s) {
  if (s == "Full") return LoggingMode::kFull;
  if (s == "CompactTopK") return LoggingMode::kCompactTopK;
  parse_fail("unknown logging mode '" + std::string(s) + "'");
}

Json to_json(const ModelSpec& spec) {
  Json j = {
      {"seed", spec.seed},
      {"hidden_dim", spec.hidden_dim},
      {"vocab_size", spec.vocab_size},
      {"num_experts", spec.num_experts},
      {"top_k_tokens", spec.top_k_tokens},
      {"max_steps", spec.max_steps},
  };
  if (spec.top_k_experts) j["top_k_experts"] = *spec.top_k_experts;
  return j;
}

ModelSpec model_spec_from_json(const Json& j) {
  ModelSpec s;
  s.seed = integer_field<std::uint64_t>(j, "seed");
  s.hidden_dim = integer_field<std::uint32_t>(j, "hidden_dim");
  s.vocab_size = integer_field<std::uint32_t>(j, "vocab_size");
  s.num_experts = integer_field<std::uint32_t>(j, "num_experts");
  s.top_k_tokens = integer_field<std::uint32_t>(j, "top_k_tokens");
  s.max_steps = integer_field<std::uint32_t>(j, "max_steps");
  if (j.contains("top_k_experts") && !j["top_k_experts"].is_null()) {
    s.top_k_experts = integer_field<std::uint32_t>(j, "top_k_experts");
  }
  s.validate();
  return s;
}

Json to_json(const DeviationConfig& dev) {
  Json j = {
      {"kind", to_string(dev.kind)},
      {"noise_sigma", real_to_string(dev.noise_sigma)},
      {"bias_scale", real_to_string(dev.bias_scale)},
      {"dummy_steps", dev.dummy_steps},
      {"fabrication_sigma", real_to_string(dev.fabrication_sigma)},
  };
  if (dev.substitute_seed) j["substitute_seed"] = *dev.substitute_seed;
  return j;
}

DeviationConfig deviation_from_json(const Json& j) {
  DeviationConfig d;
  const Json& kind = field(j, "kind");
  if (!kind.is_string()) parse_fail("kind must be a string");
  d.kind = deviation_kind_from_string(kind.get<std::string>());
  auto real_or_zero = [&](const char* name) {
    return j.contains(name) ? real_from_json(j[name]) : 0.0;
  };
  d.noise_sigma = real_or_zero("noise_sigma");
  d.bias_scale = real_or_zero("bias_scale");
  d.fabrication_sigma = real_or_zero("fabrication_sigma");
  if (j.contains("dummy_steps")) {
    d.dummy_steps = integer_field<std::uint32_t>(j, "dummy_steps");
  }
  if (j.contains("substitute_seed") && !j["substitute_seed"].is_null()) {
    d.substitute_seed = integer_field<std::uint64_t>(j, "substitute_seed");
  }
  d.validate();
  return d;
}

Json to_json(const StepTrace& step) {
  Json j = {
      {"step_index", step.step_index},
      {"decision_kind", to_string(step.decision_kind)},
      {"decision", step.decision},
      {"rand_tag", step.rand_tag},
  };
  if (step.has_logits()) {
    Json logits = Json::array();
    for (double v : step.logits()) logits.push_back(real_to_string(v));
    j["logits"] = std::move(logits);
  } else {
    j["top_k_indices"] = step.top_k_indices();
  }
  return j;
}

StepTrace step_trace_from_json(const Json& j) {
  StepTrace t;
  t.step_index = integer_field<std::uint32_t>(j, "step_index");
  const Json& kind = field(j, "decision_kind");
  if (kind == "TokenSample") {
    t.decision_kind = DecisionKind::kTokenSample;
  } else if (kind == "ExpertRoute") {
    t.decision_kind = DecisionKind::kExpertRoute;
  } else {
    parse_fail("unknown decision_kind");
  }
  t.decision = index_list(field(j, "decision"));
  t.rand_tag = integer_field<std::uint64_t>(j, "rand_tag");
  const bool has_logits = j.contains("logits");
  const bool has_indices = j.contains("top_k_indices");
  if (has_logits == has_indices) {
    parse_fail("exactly one of logits / top_k_indices must be present");
  }
  if (has_logits) {
    Logits l;
    for (const auto& v : j["logits"]) l.push_back(real_from_json(v));
    t.payload = std::move(l);
  } else {
    t.payload = index_list(j["top_k_indices"]);
  }
  return t;
}

Json to_json(const ExecutionResult& result) {
  Json trace = Json::array();
  for (const auto& s : result.trace) trace.push_back(to_json(s));
  return {
      {"output_tokens", result.output_tokens},
      {"reported_token_count", result.reported_token_count},
      {"seed_r", to_hex(result.seed_r)},
      {"trace", std::move(trace)},
  };
}

ExecutionResult execution_result_from_json(const Json& j) {
  ExecutionResult r;
  r.output_tokens = index_list(field(j, "output_tokens"));
  r.reported_token_count = integer_field<std::uint64_t>(j, "reported_token_count");
  const auto seed = from_hex(field(j, "seed_r").get<std::string>());
  if (seed.size() != r.seed_r.size()) parse_fail("seed_r must be 32 bytes");
  std::copy(seed.begin(), seed.end(), r.seed_r.begin());
  const Json& trace = field(j, "trace");
  if (!trace.is_array()) parse_fail("trace must be an array");
  for (const auto& s : trace) r.trace.push_back(step_trace_from_json(s));
  return r;
}

}  // namespace logitaudit
