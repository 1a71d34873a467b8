#pragma once

#include <cstdint>
#include <random>

namespace dnslab {

/// Deterministic RNG used everywhere randomness is needed. Range reduction is
/// plain modulo so draws are reproducible across standard libraries
/// (std::uniform_int_distribution is implementation-defined).
class SeededRng {
public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform draw in [lo, hi], inclusive.
  std::uint32_t uniform(std::uint32_t lo, std::uint32_t hi) {
    std::uint64_t span = static_cast<std::uint64_t>(hi) - lo + 1;
    return lo + static_cast<std::uint32_t>(engine_() % span);
  }

  std::uint16_t txid() { return static_cast<std::uint16_t>(uniform(0, 0xFFFF)); }

  /// Fresh sub-stream so components can be reseeded independently.
  SeededRng fork() { return SeededRng(engine_()); }

private:
  std::mt19937_64 engine_;
};

}  // namespace dnslab
