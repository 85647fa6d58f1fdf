#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace bctree {

// splitmix64 finalizer, used to derive independent substream seeds from a
// master seed so results do not depend on worker scheduling.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  return mix_seed(mix_seed(a) ^ b);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return mix_seed(mix_seed(a, b) ^ c);
}

// Deterministic RNG: mt19937_64 is pinned by the C++ standard, so the same
// seed yields the same stream on every platform. Distribution transforms are
// implemented here explicitly because std:: distributions are not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double next_in(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::next_below: n must be positive");
    // Rejection sampling for an unbiased draw.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return x % n;
  }

  // Normal via the inverse-CDF transform (Acklam's rational approximation,
  // |relative error| < 1.15e-9). Chosen over std::normal_distribution for
  // cross-platform reproducibility.
  double next_normal(double mean, double sd) {
    double u = next_unit();
    while (u <= 0.0) u = next_unit();  // guard against -inf at u == 0
    return mean + sd * inverse_normal_cdf(u);
  }

  static double inverse_normal_cdf(double p) {
    static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                    -2.759285104469687e+02, 1.383577518672690e+02,
                                    -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                    -1.556989798598866e+02, 6.680131188771972e+01,
                                    -1.328068155288572e+01};
    static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                    -2.400758277161838e+00, -2.549732539343734e+00,
                                    4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                    2.445134137142996e+00, 3.754408661907416e+00};
    static constexpr double plow = 0.02425;
    static constexpr double phigh = 1.0 - plow;
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("inverse_normal_cdf: p outside (0,1)");
    if (p < plow) {
      const double q = std::sqrt(-2.0 * std::log(p));
      return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
             ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > phigh) {
      const double q = std::sqrt(-2.0 * std::log(1.0 - p));
      return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
             ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace bctree
