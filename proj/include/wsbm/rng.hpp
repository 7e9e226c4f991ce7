#ifndef WSBM_RNG_HPP
#define WSBM_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace wsbm {

// Deterministic RNG wrapper. All variate transforms are implemented here so
// that streams are reproducible for a given seed regardless of the standard
// library's distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), eng_(splitmix(seed)) {}

  // Derive an independent stream, e.g. one per chain.
  Rng fork(std::uint64_t salt) const {
    return Rng(seed_ ^ splitmix(salt + 0x9e3779b97f4a7c15ull));
  }

  std::uint64_t bits() { return eng_(); }

  // Uniform in [0, 1).
  double uniform() { return double(bits() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1].
  double uniform_pos() { return (double(bits() >> 11) + 1.0) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  std::uint64_t uniform_under(std::uint64_t n) {
    // rejection to avoid modulo bias
    std::uint64_t threshold = (~n + 1) % n;
    for (;;) {
      std::uint64_t r = bits();
      if (r >= threshold) return r % n;
    }
  }

  double exponential(double rate = 1.0) { return -std::log(uniform_pos()) / rate; }

  double normal(double mean = 0.0, double sd = 1.0) {
    if (have_spare_) {
      have_spare_ = false;
      return mean + sd * spare_;
    }
    double u = uniform_pos(), v = uniform();
    double r = std::sqrt(-2.0 * std::log(u));
    spare_ = r * std::sin(2.0 * M_PI * v);
    have_spare_ = true;
    return mean + sd * r * std::cos(2.0 * M_PI * v);
  }

  std::int64_t poisson(double lambda) {
    // inversion for small lambda, normal approx fallback rejection otherwise
    if (lambda < 30.0) {
      double p = std::exp(-lambda), c = p, u = uniform();
      std::int64_t k = 0;
      while (u > c && k < 10000000) {
        ++k;
        p *= lambda / double(k);
        c += p;
      }
      return k;
    }
    std::int64_t m = std::int64_t(lambda / 2.0);
    return m + poisson(lambda - double(m));
  }

  std::int64_t geometric(double p) {
    // number of failures before first success
    return std::int64_t(std::floor(std::log(uniform_pos()) / std::log1p(-p)));
  }

  std::int64_t binomial(std::int64_t n, double p) {
    std::int64_t k = 0;
    for (std::int64_t i = 0; i < n; ++i)
      if (uniform() < p) ++k;
    return k;
  }

 private:
  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  std::uint64_t seed_ = 0;
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace wsbm

#endif
