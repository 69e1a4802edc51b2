#pragma once

#include <cstdint>

namespace mtmbsp {

// Counter-seeded xoshiro256++ stream. A (seed, stream_id) pair fully determines
// the draw sequence; child streams derived from distinct indices are
// statistically independent of the parent and of each other.
//
// A stream is single-owner: never share one instance across concurrent tasks.
// Derive a child per task instead.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  // Child stream keyed by index; independent of the parent's draw position.
  RandomStream child(std::uint64_t index) const;

  std::uint64_t next_u64();

  // Uniform on (0, 1), never exactly 0 or 1.
  double uniform();

  // Standard normal draw (Box-Muller pair, second value cached).
  double normal();

  double exponential();  // rate 1

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t s_[4];
  double cached_normal_;
  bool has_cached_normal_;
};

}  // namespace mtmbsp
