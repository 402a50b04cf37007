#pragma once

#include <cstdint>
#include <random>

namespace slicedmi {

// 64-bit finalizer from SplitMix64.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class Rng;

/// Root of a tree of reproducible random streams. Child streams are derived
/// by counter-style mixing of (seed, index), so the stream handed to slice j
/// or run r does not depend on which thread consumes it or when.
struct MasterSeed {
  std::uint64_t value = 0;

  constexpr MasterSeed child(std::uint64_t stream) const noexcept {
    return MasterSeed{mix64(value ^ mix64(stream + 0x632BE59BD9B4E019ULL))};
  }

  Rng rng() const;

  friend constexpr bool operator==(MasterSeed, MasterSeed) = default;
};

/// Seeded generator with platform-independent variate transforms. The
/// std:: distributions are implementation-defined, so uniform and normal
/// draws are produced here from the raw mt19937_64 output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on the open interval (0, 1).
  double uniform_open() {
    return (static_cast<double>(engine_() >> 12) + 0.5) * 0x1.0p-52;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal();

  double exponential();

  // Fair coin in {-1, +1}.
  double sign() { return (engine_() >> 63) ? 1.0 : -1.0; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline Rng MasterSeed::rng() const { return Rng(value); }

}  // namespace slicedmi
