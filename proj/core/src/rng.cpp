#include "kexpfam/rng.hpp"

#include <cmath>
#include <numbers>

namespace kexpfam {

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform_pos();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::uint64_t Rng::below(std::uint64_t bound) {
  // Rejection sampling over the largest multiple of `bound`; bias-free.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t draw = eng_();
  while (draw >= limit) draw = eng_();
  return draw % bound;
}

std::uint64_t fnv1a_update(std::uint64_t state, std::string_view bytes) {
  for (unsigned char ch : bytes) {
    state ^= static_cast<std::uint64_t>(ch);
    state *= 0x100000001b3ULL;
  }
  return state;
}

std::uint64_t fnv1a(std::string_view bytes) {
  return fnv1a_update(0xcbf29ce484222325ULL, bytes);
}

std::uint64_t mix_seed(std::uint64_t base, std::string_view tag) {
  // splitmix64 finalizer over the combined value; decorrelates nearby seeds.
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (1 + fnv1a(tag));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace kexpfam
