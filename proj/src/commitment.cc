#include "logitaudit/commitment.h"

#include <openssl/evp.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <memory>

#include "logitaudit/error.h"
#include "logitaudit/json_io.h"

namespace logitaudit {
namespace {

constexpr std::uint8_t kModelDomain = 'M';
constexpr std::uint8_t kTraceDomain = 'T';
constexpr std::uint8_t kPayloadLogits = 0;
constexpr std::uint8_t kPayloadIndices = 1;

class ByteWriter {
 public:
  void u8(std::uint8_t v) { put(&v, 1); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void f64s(std::span<const double> vs) {
    if constexpr (std::endian::native == std::endian::little) {
      put(reinterpret_cast<const std::uint8_t*>(vs.data()), vs.size_bytes());
    } else {
      for (double v : vs) f64(v);
    }
  }
  void bytes(std::span<const std::uint8_t> b) { put(b.data(), b.size()); }
  void reserve(std::size_t n) {
    if (out_.size() < n) out_.resize(n);
  }
  std::vector<std::uint8_t> take() {
    out_.resize(len_);
    return std::move(out_);
  }

 private:
  void le(std::uint64_t v, int n) {
    std::uint8_t buf[8];
    for (int i = 0; i < n; ++i) buf[i] = static_cast<std::uint8_t>(v >> (8 * i));
    put(buf, static_cast<std::size_t>(n));
  }
  // out_ is grown geometrically; only the first len_ bytes are meaningful.
  void put(const std::uint8_t* p, std::size_t n) {
    if (out_.size() - len_ < n) out_.resize(std::max(2 * out_.size(), len_ + n));
    std::memcpy(out_.data() + len_, p, n);
    len_ += n;
  }
  std::vector<std::uint8_t> out_;
  std::size_t len_ = 0;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  double f64() { return std::bit_cast<double>(u64()); }
  void bytes(std::span<std::uint8_t> dst) {
    need(dst.size());
    std::memcpy(dst.data(), in_.data() + pos_, dst.size());
    pos_ += dst.size();
  }
  // Length prefix for `elem_size`-byte elements, bounded by what remains.
  std::size_t length(std::size_t elem_size) {
    const std::uint64_t n = u64();
    if (n > (in_.size() - pos_) / elem_size) fail("length prefix overruns input");
    return static_cast<std::size_t>(n);
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  [[noreturn]] static void fail(const char* what) {
    throw Error(ErrorCode::kParseError, what);
  }
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) fail("truncated canonical encoding");
  }
  std::uint64_t le(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= std::uint64_t{in_[pos_ + i]} << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

void check_scheme(const Commitment& c) {
  if (c.scheme_id != kSchemeSha256V1) {
    throw Error(ErrorCode::kUnsupportedScheme, "unknown scheme '" + c.scheme_id + "'");
  }
}

Commitment make_commitment(std::span<const std::uint8_t> bytes) {
  Commitment c;
  c.digest = sha256(bytes);
  return c;
}

}  // namespace

std::string Commitment::hex() const { return to_hex(digest); }

Commitment Commitment::from_hex(std::string_view hex, std::string scheme) {
  const auto bytes = logitaudit::from_hex(hex);
  if (bytes.size() != 32) {
    throw Error(ErrorCode::kParseError, "digest must be 32 bytes");
  }
  Commitment c;
  std::copy(bytes.begin(), bytes.end(), c.digest.begin());
  c.scheme_id = std::move(scheme);
  return c;
}

Digest sha256(std::span<const std::uint8_t> bytes) {
  Digest out{};
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                               &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), out.data(), &len) != 1 || len != out.size()) {
    throw std::runtime_error("SHA-256 computation failed");
  }
  return out;
}

std::vector<std::uint8_t> canonical_bytes(const ModelSpec& spec) {
  ByteWriter w;
  w.u8(kModelDomain);
  w.u64(spec.seed);
  w.u64(spec.hidden_dim);
  w.u64(spec.vocab_size);
  w.u64(spec.num_experts);
  w.u64(spec.top_k_tokens);
  w.u64(spec.top_k_experts.value_or(0));
  w.u64(spec.max_steps);
  return w.take();
}

std::vector<std::uint8_t> canonical_bytes(const TraceOpening& opening) {
  ByteWriter w;
  std::size_t estimate = 64;
  for (const auto& step : opening.trace) {
    estimate += 48 + 4 * step.decision.size() +
                (step.has_logits() ? 8 * step.logits().size() : 4 * step.top_k_indices().size());
  }
  w.reserve(estimate);
  w.u8(kTraceDomain);
  w.bytes(opening.seed_r);
  w.u64(opening.trace.size());
  for (const auto& step : opening.trace) {
    w.u32(step.step_index);
    w.u8(static_cast<std::uint8_t>(step.decision_kind));
    if (step.has_logits()) {
      w.u8(kPayloadLogits);
      w.u64(step.logits().size());
      w.f64s(step.logits());
    } else {
      w.u8(kPayloadIndices);
      w.u64(step.top_k_indices().size());
      for (auto i : step.top_k_indices()) w.u32(i);
    }
    w.u64(step.decision.size());
    for (auto d : step.decision) w.u32(d);
    w.u64(step.rand_tag);
  }
  return w.take();
}

TraceOpening decode_trace_opening(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (r.u8() != kTraceDomain) {
    throw Error(ErrorCode::kParseError, "not a trace opening");
  }
  TraceOpening o;
  r.bytes(o.seed_r);
  // Smallest possible step encoding is 4+1+1+8+8+8 bytes.
  const std::size_t n = r.length(30);
  o.trace.resize(n);
  for (auto& step : o.trace) {
    step.step_index = r.u32();
    const auto kind = r.u8();
    if (kind > 1) throw Error(ErrorCode::kParseError, "bad decision kind");
    step.decision_kind = static_cast<DecisionKind>(kind);
    const auto tag = r.u8();
    if (tag == kPayloadLogits) {
      Logits l(r.length(8));
      for (double& v : l) v = r.f64();
      step.payload = std::move(l);
    } else if (tag == kPayloadIndices) {
      IndexSet idx(r.length(4));
      for (auto& i : idx) i = r.u32();
      step.payload = std::move(idx);
    } else {
      throw Error(ErrorCode::kParseError, "bad payload tag");
    }
    step.decision.resize(r.length(4));
    for (auto& d : step.decision) d = r.u32();
    step.rand_tag = r.u64();
  }
  if (!r.done()) throw Error(ErrorCode::kParseError, "trailing bytes");
  return o;
}

Commitment commit_model(const ModelSpec& spec) {
  return make_commitment(canonical_bytes(spec));
}

Commitment commit_trace(const TraceOpening& opening) {
  if (opening.trace.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "cannot commit an empty trace");
  }
  return make_commitment(canonical_bytes(opening));
}

bool verify(const Commitment& commitment, const TraceOpening& opening) {
  check_scheme(commitment);
  return sha256(canonical_bytes(opening)) == commitment.digest;
}

bool verify(const Commitment& commitment, const ModelSpec& spec) {
  check_scheme(commitment);
  return sha256(canonical_bytes(spec)) == commitment.digest;
}

}  // namespace logitaudit
