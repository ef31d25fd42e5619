#pragma once

#include <cmath>
#include <cstdint>

#include <Eigen/Dense>

namespace crosscurve {

// Deterministic generator with explicit distributions. The standard library
// distributions are implementation-defined, which would break the
// byte-identical-report contract across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {
    // decorrelate small seeds
    next_u64();
    next_u64();
  }

  std::uint64_t next_u64() {  // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0,1).
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  double exponential() { return -std::log(1.0 - uniform()); }

  double normal() {
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  Eigen::VectorXd normal_vec(int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  Eigen::VectorXd box_vec(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    Eigen::VectorXd v(lo.size());
    for (int i = 0; i < lo.size(); ++i) v[i] = uniform(lo[i], hi[i]);
    return v;
  }

  Eigen::VectorXd unit_vec(int n) {
    Eigen::VectorXd v = normal_vec(n);
    double nv = v.norm();
    while (nv < 1e-12) { v = normal_vec(n); nv = v.norm(); }
    return v / nv;
  }

  /// Symmetric Dirichlet(1) weights.
  Eigen::VectorXd dirichlet(int n) {
    Eigen::VectorXd w(n);
    for (int i = 0; i < n; ++i) w[i] = exponential();
    return w / w.sum();
  }

  /// Independent stream for sample `index`; threading-invariant.
  static Rng substream(std::uint64_t seed, std::uint64_t index) {
    Rng r(seed ^ (0x5851f42d4c957f2dULL * (index + 1)));
    return r;
  }

 private:
  std::uint64_t state_;
};

}  // namespace crosscurve
