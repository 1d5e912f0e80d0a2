#pragma once

#include <cstdint>
#include <random>

namespace cmest {

// Deterministic random source. std::mt19937_64 has a fully specified
// output sequence, and every variate below is derived from its raw words
// by hand, so a given seed yields the same stream on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0,1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0,1], safe as a log argument.
  double uniform01_open0() {
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Uniform index in [0, n).
  std::size_t index(std::size_t n);

  double normal();           // Box-Muller
  double gamma(double shape);  // Marsaglia-Tsang, any shape > 0
  double beta(double a, double b);

 private:
  std::mt19937_64 engine_;
};

// Mixes (master, a, b) into an independent stream seed. Used to give each
// (level, repetition) cell of a sweep its own generator so that the
// results do not depend on execution order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                          std::uint64_t b);

}  // namespace cmest
