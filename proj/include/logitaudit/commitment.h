#pragma once

// Hash commitments to the claimed full-precision model and to per-request
// logit traces. The byte layout is documented in docs/wire_format.md.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "logitaudit/core_model.h"

namespace logitaudit {

inline constexpr std::string_view kSchemeSha256V1 = "sha256-v1";

using Digest = std::array<std::uint8_t, 32>;

struct Commitment {
  Digest digest{};
  std::string scheme_id{kSchemeSha256V1};

  std::string hex() const;
  static Commitment from_hex(std::string_view hex,
                             std::string scheme = std::string(kSchemeSha256V1));

  bool operator==(const Commitment&) const = default;
};

// (r, {l_1..l_N}) as held by the server for later opening.
struct TraceOpening {
  Seed256 seed_r{};
  std::vector<StepTrace> trace;

  bool operator==(const TraceOpening&) const = default;
};

Digest sha256(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> canonical_bytes(const ModelSpec& spec);
std::vector<std::uint8_t> canonical_bytes(const TraceOpening& opening);

// Inverse of canonical_bytes(TraceOpening); throws Error(kParseError).
TraceOpening decode_trace_opening(std::span<const std::uint8_t> bytes);

Commitment commit_model(const ModelSpec& spec);
// Throws Error(kInvalidArgument) for an empty trace.
Commitment commit_trace(const TraceOpening& opening);

// Throw Error(kUnsupportedScheme) for an unknown scheme_id.
bool verify(const Commitment& commitment, const TraceOpening& opening);
bool verify(const Commitment& commitment, const ModelSpec& spec);

}  // namespace logitaudit
