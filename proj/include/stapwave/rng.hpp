#pragma once

#include <cmath>
#include <cstdint>

#include "stapwave/types.hpp"

namespace stapwave {

/// Deterministic splitmix64 generator with a hand-rolled Box-Muller transform.
/// std::normal_distribution is implementation-defined, which would break the
/// byte-identical-output guarantee across standard libraries; this does not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in (0, 1]; never returns 0 so log() below is safe.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double ang = 2.0 * M_PI * u2;
    spare_ = r * std::sin(ang);
    have_spare_ = true;
    return r * std::cos(ang);
  }

  /// Standard complex Gaussian CN(0, 1): real and imaginary parts N(0, 1/2).
  cxd normal_complex() {
    constexpr double half = 0.7071067811865476;  // 1/sqrt(2)
    double re = normal();
    double im = normal();
    return {half * re, half * im};
  }

  VecC normal_complex_vector(int n) {
    VecC v(n);
    for (int i = 0; i < n; ++i) v(i) = normal_complex();
    return v;
  }

  /// Independent stream for worker/trial `index`; deterministic regardless of
  /// how trials are distributed across threads.
  static std::uint64_t substream(std::uint64_t master, std::uint64_t index) {
    Rng mix(master ^ (0xa0761d6478bd642fULL * (index + 1)));
    return mix.next_u64();
  }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace stapwave
