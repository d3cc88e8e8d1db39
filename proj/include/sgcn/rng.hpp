#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace sgcn {

// SplitMix64 finalizer. Used to derive independent child seeds from
// (seed, stream) pairs so parallel loops stay reproducible.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return mix_seed(mix_seed(seed) ^ (stream * 0xD1B54A32D192ED03ull + 1));
}

// Portable generator. The engine is std::mt19937_64, whose output sequence
// is fixed by the standard; the variate transforms below are written out
// instead of using <random> distributions, whose algorithms are
// implementation-defined.
//
//   uniform():  top 53 bits of one engine draw, scaled to [0, 1).
//   normal():   Box-Muller from two uniform() draws; no caching of the
//               second variate, so each call consumes two draws (three or more only
//               when the first draw is exactly zero).
//   below(n):   rejection-sampled modulo on 64-bit draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

 private:
  std::mt19937_64 engine_;
};

// Fisher-Yates using Rng::below, so permutations are portable too.
template <typename Container>
void shuffle(Container& c, Rng& rng) {
  for (std::size_t i = c.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    using std::swap;
    swap(c[i - 1], c[j]);
  }
}

}  // namespace sgcn
