#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace logitaudit {

// Counter-mode pseudo-random function built on the splitmix64 finalizer.
// Not cryptographic; it only has to be deterministic, fast and well mixed.
inline constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t prf64(std::uint64_t key, std::uint64_t domain,
                                     std::uint64_t counter) noexcept {
  return mix64(mix64(key ^ mix64(domain)) ^ mix64(counter + 0x632be59bd9b4e019ULL));
}

// Uniform double in [0, 1) from the top 53 bits.
inline constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// FNV-1a, used to turn stream names into domain separators.
inline constexpr std::uint64_t name_hash(std::string_view name) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Seed for an independent named sub-stream of a master seed.
inline constexpr std::uint64_t derive_seed(std::uint64_t master,
                                           std::string_view stream,
                                           std::uint64_t index = 0) noexcept {
  return prf64(master, name_hash(stream), index);
}

inline std::mt19937_64 make_stream(std::uint64_t master, std::string_view stream,
                                   std::uint64_t index = 0) {
  return std::mt19937_64(derive_seed(master, stream, index));
}

}  // namespace logitaudit
