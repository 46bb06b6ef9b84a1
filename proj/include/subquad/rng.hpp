#pragma once

#include <cstdint>
#include <string_view>

namespace subquad {

// Counter-based pseudorandom stream. The output sequence is a pure function
// of (key, counter), so a fixed seed replays the identical draw sequence on
// every platform. Child streams derived from (seed, label) are independent
// streams in the usual PRNG design sense and may be handed to concurrent
// tasks; no draw ordering is shared between streams.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : key_(mix(seed ^ kKeyTweak)) {}

  // Derived stream for a labelled subtask. Deterministic in (seed, label).
  RngStream child(std::uint64_t label) const {
    RngStream s(0);
    s.key_ = mix(key_ ^ mix(label + kGolden));
    s.counter_ = 0;
    return s;
  }

  RngStream child(std::uint64_t a, std::uint64_t b) const {
    return child(mix(a + kGolden) ^ b);
  }

  std::uint64_t next_u64() { return mix(key_ + kGolden * ++counter_); }

  // Uniform on [0,1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Rejection-free is unnecessary here; modulo bias at 64 bits is far
    // below the statistical resolution of any test in this project.
    return next_u64() % n;
  }

  // Standard normal via the polar method (no library dependence, replayable).
  double normal();

  // Gamma(shape, 1) via Marsaglia-Tsang squeeze, valid for shape > 0.
  double gamma(double shape);

  // Beta(a, b).
  double beta(double a, double b);

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kKeyTweak = 0xD1B54A32D192ED03ULL;

  // SplitMix64 finalizer.
  static std::uint64_t mix(std::uint64_t z) {
    z += kGolden;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace subquad
