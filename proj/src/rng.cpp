#include "selfbound/rng.hpp"

#include <cmath>
#include <cstddef>

namespace selfbound {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
  return h;
}

// splitmix64 finalizer; spreads low-entropy seeds before feeding mt19937_64.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed) : key_(seed), engine_(mix(seed)) {}

Rng Rng::derive(std::string_view label, std::uint64_t index) const {
  std::uint64_t h = kFnvOffset;
  h = fnv1a(h, &key_, sizeof(key_));
  h = fnv1a(h, label.data(), label.size());
  h = fnv1a(h, &index, sizeof(index));
  return Rng(h);
}

std::uint64_t Rng::below(std::uint64_t bound) {
  const std::uint64_t threshold = -bound % bound;  // 2^64 mod bound
  for (;;) {
    const std::uint64_t r = bits();
    if (r >= threshold) return r % bound;
  }
}

double Rng::normal() {
  // u1 in (0,1] so log never sees zero.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace selfbound
