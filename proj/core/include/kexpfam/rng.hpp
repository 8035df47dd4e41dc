#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace kexpfam {

// Deterministic random source. std::mt19937_64 has a standard-mandated bit
// stream, and the variate transforms below are written out explicitly, so a
// given seed yields identical draws on every platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform in the half-open interval [0, 1).
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  // Uniform in (0, 1]; safe to pass to log().
  double uniform_pos() {
    return static_cast<double>((eng_() >> 11) + 1) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller (both variates used).
  double normal();

  // Unbiased integer in [0, bound) by rejection; bound >= 1.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// FNV-1a 64-bit hash of a byte string.
std::uint64_t fnv1a(std::string_view bytes);
std::uint64_t fnv1a_update(std::uint64_t state, std::string_view bytes);

// Derives an independent stream seed from a base seed and a context tag.
std::uint64_t mix_seed(std::uint64_t base, std::string_view tag);

}  // namespace kexpfam
