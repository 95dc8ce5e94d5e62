#pragma once

#include <cstdint>

namespace propimp {

// splitmix64 output mix (Vigna 2015, public domain reference constants).
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Substream seed rule: child `index` of `base` is mix64(base + G*(index+1))
// with G the 64-bit golden-ratio increment. Replications, per-horizon refits
// and the simulate/fit halves of an experiment all derive their seeds through
// this function, so every run is reproducible from one root seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return mix64(base + 0x9e3779b97f4a7c15ULL * (index + 1));
}

// Deterministic splitmix64 stream. One stream per logical consumer; a stream
// is never shared across threads.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  // Uniform draw strictly inside (0, 1): 53 mantissa bits plus a half-bin
  // offset, so inverse-CDF transforms never see an endpoint.
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  // True with probability p. Always consumes exactly one draw.
  bool bernoulli(double p) { return uniform() < p; }

  RngStream substream(std::uint64_t index) const { return RngStream(derive_seed(seed_, index)); }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

}  // namespace propimp
