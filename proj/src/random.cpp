#include "mtmbsp/random.hpp"

#include <cmath>

namespace mtmbsp {

namespace {

inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), cached_normal_(0.0), has_cached_normal_(false) {
  std::uint64_t x = seed;
  std::uint64_t mix = splitmix64(x);
  x = mix ^ (stream_id * 0xda942042e4dd58b5ULL + 0x2545f4914f6cdd1dULL);
  for (int i = 0; i < 4; ++i) s_[i] = splitmix64(x);
}

RandomStream RandomStream::child(std::uint64_t index) const {
  std::uint64_t x = stream_id_ ^ 0x6a09e667f3bcc909ULL;
  std::uint64_t h = splitmix64(x);
  x = h ^ (index + 0x9e3779b97f4a7c15ULL);
  return RandomStream(seed_, splitmix64(x));
}

std::uint64_t RandomStream::next_u64() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RandomStream::uniform() {
  // 53-bit mantissa, shifted into the open interval.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double rad = std::sqrt(-2.0 * std::log(u1));
  const double ang = 2.0 * M_PI * u2;
  cached_normal_ = rad * std::sin(ang);
  has_cached_normal_ = true;
  return rad * std::cos(ang);
}

double RandomStream::exponential() { return -std::log(uniform()); }

}  // namespace mtmbsp
