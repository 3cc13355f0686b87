#pragma once

#include <cstdint>
#include <random>

namespace lodae {

/// Seedable random stream. Streams derived from the same master seed with
/// different ids are statistically independent, so parallel trials never
/// share state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  double uniform();  // [0, 1)
  double normal();
  bool bernoulli(double p);
  std::int64_t binomial(std::int64_t n, double p);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace lodae
