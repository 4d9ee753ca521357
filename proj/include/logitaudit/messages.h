#pragma once

// Protocol messages and their wire encoding: a 4-byte big-endian length
// followed by a compact JSON object (see docs/wire_format.md).

#include <array>
#include <compare>
#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "logitaudit/vc.h"

namespace logitaudit {

struct RequestId {
  std::array<std::uint8_t, 16> bytes{};

  // 8-4-4-4-12 lowercase hex.
  std::string str() const;
  // Accepts the dashed form or 32 bare hex digits; throws Error(kParseError).
  static RequestId parse(std::string_view s);
  static RequestId random(std::mt19937_64& rng);

  auto operator<=>(const RequestId&) const = default;
};

struct RequestMsg {
  RequestId request_id;
  Prompt prompt;
  bool operator==(const RequestMsg&) const = default;
};

struct ResponseMsg {
  RequestId request_id;
  std::vector<TokenId> output_tokens;
  std::uint64_t token_count = 0;
  Commitment trace_commitment;
  bool operator==(const ResponseMsg&) const = default;
};

struct AuditMsg {
  RequestId request_id;
  bool operator==(const AuditMsg&) const = default;
};

struct ProofMsg {
  RequestId request_id;
  VcReport report;
  bool vc_ok() const { return report.passed(); }
  bool operator==(const ProofMsg&) const = default;
};

// Failure reply, e.g. an audit of a purged request.
struct ErrorMsg {
  RequestId request_id;
  std::string code;
  std::string message;
  bool operator==(const ErrorMsg&) const = default;
};

using Message = std::variant<RequestMsg, ResponseMsg, AuditMsg, ProofMsg, ErrorMsg>;

const RequestId& request_id_of(const Message& m);
std::string_view message_type(const Message& m);

Json to_json(const Message& m);
Message message_from_json(const Json& j);

// Length-prefixed frame. decode_frame throws Error(kParseError) on a short,
// oversized or malformed frame.
inline constexpr std::uint32_t kMaxFrameBytes = 64u << 20;
std::vector<std::uint8_t> encode_frame(const Message& m);
Message decode_frame(std::span<const std::uint8_t> frame);

}  // namespace logitaudit
