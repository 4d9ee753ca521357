#include "logitaudit/messages.h"

#include "logitaudit/error.h"

namespace logitaudit {

std::string RequestId::str() const {
  const std::string h = to_hex(bytes);
  return h.substr(0, 8) + '-' + h.substr(8, 4) + '-' + h.substr(12, 4) + '-' +
         h.substr(16, 4) + '-' + h.substr(20);
}

RequestId RequestId::parse(std::string_view s) {
  std::string digits;
  for (char c : s) {
    if (c != '-') digits.push_back(c);
  }
  if (digits.size() != 32) throw Error(ErrorCode::kParseError, "request id needs 32 hex digits");
  const auto raw = from_hex(digits);
  RequestId id;
  std::copy(raw.begin(), raw.end(), id.bytes.begin());
  return id;
}

RequestId RequestId::random(std::mt19937_64& rng) {
  RequestId id;
  for (int half = 0; half < 2; ++half) {
    std::uint64_t v = rng();
    for (int b = 0; b < 8; ++b) {
      id.bytes[half * 8 + b] = static_cast<std::uint8_t>(v >> (56 - 8 * b));
    }
  }
  return id;
}

const RequestId& request_id_of(const Message& m) {
  return std::visit([](const auto& v) -> const RequestId& { return v.request_id; }, m);
}

std::string_view message_type(const Message& m) {
  struct Name {
    std::string_view operator()(const RequestMsg&) const { return "request"; }
    std::string_view operator()(const ResponseMsg&) const { return "response"; }
    std::string_view operator()(const AuditMsg&) const { return "audit"; }
    std::string_view operator()(const ProofMsg&) const { return "proof"; }
    std::string_view operator()(const ErrorMsg&) const { return "error"; }
  };
  return std::visit(Name{}, m);
}

Json to_json(const Message& m) {
  Json j = {{"type", message_type(m)}, {"request_id", request_id_of(m).str()}};
  if (const auto* r = std::get_if<RequestMsg>(&m)) {
    j["prompt"] = r->prompt;
  } else if (const auto* r = std::get_if<ResponseMsg>(&m)) {
    j["output_tokens"] = r->output_tokens;
    j["token_count"] = r->token_count;
    j["trace_commitment"] = r->trace_commitment.hex();
    j["scheme"] = r->trace_commitment.scheme_id;
  } else if (const auto* r = std::get_if<ProofMsg>(&m)) {
    j["report"] = to_json(r->report);
    j["vc_ok"] = r->vc_ok();
  } else if (const auto* r = std::get_if<ErrorMsg>(&m)) {
    j["code"] = r->code;
    j["message"] = r->message;
  }
  return j;
}

Message message_from_json(const Json& j) {
  try {
    const auto type = j.at("type").get<std::string>();
    const RequestId id = RequestId::parse(j.at("request_id").get<std::string>());
    if (type == "request") return RequestMsg{id, j.at("prompt").get<Prompt>()};
    if (type == "response") {
      return ResponseMsg{id, j.at("output_tokens").get<std::vector<TokenId>>(),
                         j.at("token_count").get<std::uint64_t>(),
                         Commitment::from_hex(j.at("trace_commitment").get<std::string>(),
                                              j.at("scheme").get<std::string>())};
    }
    if (type == "audit") return AuditMsg{id};
    if (type == "proof") {
      ProofMsg p{id, vc_report_from_json(j.at("report"))};
      if (j.at("vc_ok").get<bool>() != p.vc_ok()) {
        throw Error(ErrorCode::kParseError, "vc_ok disagrees with the report");
      }
      return p;
    }
    if (type == "error") {
      return ErrorMsg{id, j.at("code").get<std::string>(), j.at("message").get<std::string>()};
    }
    throw Error(ErrorCode::kParseError, "unknown message type '" + type + "'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
}

std::vector<std::uint8_t> encode_frame(const Message& m) {
  const std::string body = to_json(m).dump();
  if (body.size() > kMaxFrameBytes) throw Error(ErrorCode::kTooLarge, "message exceeds frame limit");
  const auto n = static_cast<std::uint32_t>(body.size());
  std::vector<std::uint8_t> out;
  out.reserve(4 + body.size());
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(n >> s));
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

Message decode_frame(std::span<const std::uint8_t> frame) {
  if (frame.size() < 4) throw Error(ErrorCode::kParseError, "frame shorter than its header");
  std::uint32_t n = 0;
  for (int i = 0; i < 4; ++i) n = (n << 8) | frame[i];
  if (n > kMaxFrameBytes || frame.size() - 4 != n) {
    throw Error(ErrorCode::kParseError, "frame length does not match its header");
  }
  Json j;
  try {
    j = Json::parse(frame.begin() + 4, frame.end());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
  return message_from_json(j);
}

}  // namespace logitaudit
