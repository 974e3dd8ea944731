#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace advil {

struct Seed {
  std::uint64_t value = 0;
};

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Stable sub-seed for (seed, component name, index). Independent of call order.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view name, std::uint64_t index = 0);

/// Seeded random stream. Every draw helper documents how many raw draws it
/// consumes so that paired rollouts stay aligned (common random numbers).
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(mix64(seed)) {}
  explicit Rng(Seed seed) : Rng(seed.value) {}

  std::uint64_t seed() const { return seed_; }

  /// Named child stream derived from this stream's seed (not its position).
  Rng substream(std::string_view name, std::uint64_t index = 0) const {
    return Rng(derive_seed(seed_, name, index));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1), one draw.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// One draw.
  bool bernoulli(double p) { return uniform() < p; }

  /// Inverse-CDF categorical sample, one draw.
  int categorical(std::span<const double> probs);

  /// Standard normal via Box-Muller, two draws.
  double normal();

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace advil
