#include "doctest.h"

#include <cmath>

#include "crosscurve/gw.hpp"
#include "test_helpers.hpp"

using namespace crosscurve;

namespace {

GaugedSpace two_point(double gap, double w0 = 0.5) {
  Eigen::MatrixXd g(2, 2);
  g << 0, gap, gap, 0;
  Vec w(2);
  w << w0, 1.0 - w0;
  return GaugedSpace(g, w);
}

GaugedSpace random_gauged(int n, Rng& rng) {
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i) {
    g(i, i) = 0.0;
    for (int j = i + 1; j < n; ++j) g(i, j) = g(j, i) = rng.uniform(0.1, 2.5);
  }
  return GaugedSpace(g, rng.dirichlet(n));
}

Eigen::MatrixXd random_coupling(const Vec& mu, const Vec& nu, Rng& rng) {
  // independent coupling plus a few mass-preserving square moves
  Eigen::MatrixXd pi = mu * nu.transpose();
  int n = static_cast<int>(mu.size()), m = static_cast<int>(nu.size());
  for (int rep = 0; rep < 10; ++rep) {
    int i = int(rng.below(std::uint64_t(n))), i2 = int(rng.below(std::uint64_t(n)));
    int j = int(rng.below(std::uint64_t(m))), j2 = int(rng.below(std::uint64_t(m)));
    if (i == i2 || j == j2) continue;
    double eps = std::min({pi(i, j), pi(i2, j2)}) * rng.uniform();
    pi(i, j) -= eps;
    pi(i2, j2) -= eps;
    pi(i, j2) += eps;
    pi(i2, j) += eps;
  }
  return pi;
}

}  // namespace

TEST_CASE("gw_cost: diagonal identity, 16-term hand sum, relabeling invariance") {
  Rng rng(301);
  auto x = random_gauged(3, rng);
  Eigen::MatrixXd diag = x.w.asDiagonal();
  CHECK(gw_cost(diag, x, x) <= 1e-14);

  auto a = two_point(1.0);
  auto b = two_point(2.0);
  Eigen::MatrixXd half_diag = Eigen::MatrixXd::Zero(2, 2);
  half_diag(0, 0) = half_diag(1, 1) = 0.5;
  CHECK(gw_cost(half_diag, a, b) == doctest::Approx(0.5).epsilon(1e-14));

  // simultaneous relabeling of one space leaves the value unchanged
  auto c = random_gauged(3, rng);
  auto d = random_gauged(3, rng);
  Eigen::MatrixXd pi = random_coupling(c.w, d.w, rng);
  std::vector<int> perm{2, 0, 1};
  Eigen::MatrixXd gp(3, 3);
  Vec wp(3);
  Eigen::MatrixXd pip(3, 3);
  for (int i = 0; i < 3; ++i) {
    wp[i] = c.w[perm[size_t(i)]];
    for (int j = 0; j < 3; ++j) gp(i, j) = c.gauge(perm[size_t(i)], perm[size_t(j)]);
    for (int j = 0; j < 3; ++j) pip(i, j) = pi(perm[size_t(i)], j);
  }
  GaugedSpace cp(gp, wp);
  CHECK(gw_cost(pip, cp, d) == doctest::Approx(gw_cost(pi, c, d)).epsilon(1e-12));
}

TEST_CASE("gw_solve_tiny: identity, pinned 2-point fixtures, shift oracle") {
  Rng rng(302);
  auto x = random_gauged(3, rng);
  auto self = gw_solve_tiny(x, x);
  CHECK(self.value <= 1e-10);

  // uniform 2-point spaces with gaps 1 and 2: E(t) = 16 t(1/2 - t) + 1/2
  auto a = two_point(1.0);
  auto b = two_point(2.0);
  auto res = gw_solve_tiny(a, b);
  double oracle = 1e300;
  for (int k = 0; k <= 100000; ++k) {
    double t = 0.5 * k / 100000.0;
    oracle = std::min(oracle, 16.0 * t * (0.5 - t) + 0.5);
  }
  CHECK(res.value == doctest::Approx(oracle).epsilon(1e-8));
  CHECK(res.value == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(res.certified);

  // shifting the second gauge by +1 everywhere: E(t) = 10(a^2+b^2) + 36ab
  Eigen::MatrixXd g2 = b.gauge.array() + 1.0;
  GaugedSpace bshift(0.5 * (g2 + g2.transpose()), b.w);
  auto res2 = gw_solve_tiny(a, bshift);
  double oracle2 = 1e300;
  for (int k = 0; k <= 100000; ++k) {
    double t = 0.5 * k / 100000.0, u = 0.5 - t;
    oracle2 = std::min(oracle2, 10.0 * (t * t + u * u) + 36.0 * t * u);
  }
  CHECK(res2.value == doctest::Approx(oracle2).epsilon(1e-8));
  CHECK(res2.value == doctest::Approx(2.5).epsilon(1e-10));
}

TEST_CASE("any feasible coupling upper-bounds the tiny solver") {
  Rng rng(303);
  for (int trial = 0; trial < 20; ++trial) {
    auto x = random_gauged(3, rng);
    auto y = two_point(rng.uniform(0.2, 2.0), rng.uniform(0.2, 0.8));
    auto opt = gw_solve_tiny(x, y);
    for (int rep = 0; rep < 5; ++rep) {
      Eigen::MatrixXd pi = random_coupling(x.w, y.w, rng);
      CHECK(gw_cost(pi, x, y) >= opt.value - 1e-9);
    }
  }
}

TEST_CASE("gw segment: diagonal self-glue is the space itself; midpoint gauge is the mean") {
  Rng rng(304);
  auto x = random_gauged(2, rng);
  auto y = two_point(1.3);
  auto r = gw_solve_tiny(x, y);
  // diagonal 3-plan gamma_iik = pi_ik: both projections reproduce the plan
  ThreePlan gamma = gw_glue(x, x, y, r.plan, r.plan);
  std::fill(gamma.gamma.begin(), gamma.gamma.end(), 0.0);
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k) gamma.at(i, i, k) = r.plan(i, k);
  auto seg = gw_segment(x, x, y, gamma);
  auto mid = seg.at(0.5);
  // the charged pairs carry gauge values (f0 + f1)/2 = original gauge values
  for (int a = 0; a < mid.n(); ++a)
    for (int b = 0; b < mid.n(); ++b) {
      double expect = 0.5 * (seg.f0_pull(a, b) + seg.f1_pull(a, b));
      CHECK(mid.gauge(a, b) == doctest::Approx(expect).epsilon(1e-14));
    }
  // endpoints are the inputs themselves and reproduce the certified optima
  CHECK((seg.at(0.0).gauge - x.gauge).norm() == 0.0);
  CHECK(gw_cost(r.plan, seg.at(0.0), y) == doctest::Approx(r.value).epsilon(1e-12));

  // isomorphic constant segment: GW distance to x stays zero along s
  for (double s : {0.25, 0.75}) {
    auto xs = seg.at(s);
    CHECK(gw_solve_tiny(xs, x).value <= 1e-8);
  }
}

TEST_CASE("gw segment rejects non-optimal plans") {
  Rng rng(305);
  auto x0 = two_point(0.4);
  auto x1 = two_point(1.9);
  auto y = two_point(1.0);
  // anti-optimal plan: maximize instead of minimize by brute grid
  Eigen::MatrixXd worst(2, 2);
  double worst_val = -1.0;
  for (int k = 0; k <= 64; ++k) {
    double t = 0.5 * k / 64.0;
    Eigen::MatrixXd pi(2, 2);
    pi << t, 0.5 - t, 0.5 - t, t;
    double v = gw_cost(pi, x0, y);
    if (v > worst_val) {
      worst_val = v;
      worst = pi;
    }
  }
  auto r1 = gw_solve_tiny(x1, y);
  auto opt0 = gw_solve_tiny(x0, y);
  if (worst_val > opt0.value + 1e-6) {
    ThreePlan gamma = gw_glue(x0, x1, y, worst, r1.plan);
    CHECK_THROWS_AS(gw_segment(x0, x1, y, gamma), OptimalityError);
  }
  (void)rng;
}

TEST_CASE("gw segments pass the chord check against sampled 2-point spaces") {
  Rng rng(306);
  for (int trial = 0; trial < 4; ++trial) {
    auto x0 = two_point(rng.uniform(0.3, 2.0), rng.uniform(0.2, 0.8));
    auto x1 = two_point(rng.uniform(0.3, 2.0), rng.uniform(0.2, 0.8));
    auto y = two_point(rng.uniform(0.3, 2.0), rng.uniform(0.2, 0.8));
    GwCheckConfig cfg;
    cfg.seed = 500 + trial;
    cfg.n_test_spaces = 12;
    cfg.s_grid = equispaced_grid(9);
    cfg.tol = 1e-6;
    auto rep = gw_segment_nncc_check(x0, x1, y, cfg);
    CHECK(rep.passed);
  }
}

TEST_CASE("cone cost: wfr fixtures and the KL closed form") {
  CHECK(wfr_cone_cost(0.0, 2.0, 2.0) == doctest::Approx(0.0));
  double r = 1.7, s = 0.4;
  CHECK(wfr_cone_cost(0.0, r, s) ==
        doctest::Approx(std::pow(std::sqrt(r) - std::sqrt(s), 2)).epsilon(1e-13));

  Rng rng(307);
  for (int trial = 0; trial < 300; ++trial) {
    double d = rng.uniform(0.0, M_PI / 2);  // transport-active range of the identity
    double rr = trial % 17 == 0 ? 0.0 : rng.uniform(0.0, 3.0);
    double ss = trial % 23 == 0 ? 0.0 : rng.uniform(0.0, 3.0);
    double base_c = -std::log(std::pow(std::cos(std::min(d, M_PI)), 2));
    double numeric = cone_cost(EntropyKind::KL, EntropyKind::KL, base_c, rr, ss);
    CHECK(std::abs(numeric - wfr_cone_cost(d, rr, ss)) <= 1e-9);
  }
}

TEST_CASE("cone cost: total-variation entropies against a brute-force grid") {
  Rng rng(308);
  for (int trial = 0; trial < 40; ++trial) {
    double r = rng.uniform(0.0, 2.0), s = rng.uniform(0.0, 2.0), c = rng.uniform(0.0, 3.0);
    double numeric = cone_cost(EntropyKind::TotalVariation, EntropyKind::TotalVariation, c, r, s);
    // piecewise-linear objective: grid plus its exact breakpoints
    double oracle = r + s;  // z = 0
    for (int k = 1; k <= 40000; ++k) {
      double z = 4.0 * k / 40000.0;
      oracle = std::min(oracle, std::abs(z - r) + std::abs(z - s) + c * z);
    }
    for (double z : {r, s}) oracle = std::min(oracle, std::abs(z - r) + std::abs(z - s) + c * z);
    CHECK(std::abs(numeric - oracle) <= 1e-12);
  }
}

TEST_CASE("cone cost: 1-homogeneity and the sphere embedding") {
  Rng rng(309);
  for (int trial = 0; trial < 60; ++trial) {
    double d = rng.uniform(0.0, M_PI / 2);
    double r = rng.uniform(0.01, 2.0), s = rng.uniform(0.01, 2.0);
    double base_c = -std::log(std::pow(std::cos(d), 2));
    double lambda = rng.uniform(0.1, 5.0);
    double v1 = cone_cost(EntropyKind::KL, EntropyKind::KL, base_c, r, s);
    double v2 = cone_cost(EntropyKind::KL, EntropyKind::KL, base_c, lambda * r, lambda * s);
    CHECK(std::abs(v2 - lambda * v1) <= 1e-10 * (1.0 + std::abs(v2)));
  }

  // embedding: |sqrt(r) x - sqrt(s) y|^2 over the full distance range
  for (int trial = 0; trial < 100; ++trial) {
    Vec x = rng.unit_vec(3), y = rng.unit_vec(3);
    double r = rng.uniform(0.0, 3.0), s = rng.uniform(0.0, 3.0);
    double d = std::acos(std::clamp(x.dot(y), -1.0, 1.0));
    double emb = (std::sqrt(r) * x - std::sqrt(s) * y).squaredNorm();
    CHECK(std::abs(wfr_cone_cost(d, r, s) - emb) <= 1e-10 * (1.0 + emb));
  }
}

TEST_CASE("cone nncc check: apex triple, random triples, unsupported base") {
  ConeCheckConfig cfg;
  cfg.seed = 310;
  cfg.n_triples = 12;
  cfg.y_count = 24;
  auto rep = cone_nncc_check(ConeBase::Sphere, cfg);
  CHECK(rep.passed);
  CHECK(rep.max_gap <= 1e-10);

  CHECK_THROWS_AS(cone_nncc_check(ConeBase::PsdUnitTrace, cfg), UnsupportedError);
}

TEST_CASE("gh distance: identity, forced correspondence, symmetry, diameter bound") {
  Rng rng(311);
  for (int trial = 0; trial < 10; ++trial) {
    int n = 2 + int(rng.below(4));
    auto dx = random_finite_metric(n, rng);
    CHECK(gh_distance(dx, dx) <= 1e-12);
  }

  // one point against two points at distance 2: only one correspondence exists
  Eigen::MatrixXd one = Eigen::MatrixXd::Zero(1, 1);
  Eigen::MatrixXd pair(2, 2);
  pair << 0, 2, 2, 0;
  CHECK(gh_distance(one, pair) == doctest::Approx(2.0));

  for (int trial = 0; trial < 8; ++trial) {
    int n = 2 + int(rng.below(3)), m = 2 + int(rng.below(3));
    auto dx = random_finite_metric(n, rng);
    auto dy = random_finite_metric(m, rng);
    double ab = gh_distance(dx, dy), ba = gh_distance(dy, dx);
    CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
    double diam = std::max(dx.maxCoeff(), dy.maxCoeff());
    CHECK(ab <= diam + 1e-12);
  }

  Eigen::MatrixXd six = Eigen::MatrixXd::Zero(6, 6);
  CHECK_THROWS_AS(gh_distance(six, six), DomainError);
}

TEST_CASE("gw stress: dense fine grids confirm the tiny solver optimum") {
  Rng rng(321);
  // 2x2 instances: exhaustive 1-d scan at 1e-6 resolution
  for (int trial = 0; trial < 6; ++trial) {
    auto x = two_point(rng.uniform(0.2, 2.5), rng.uniform(0.2, 0.8));
    auto y = two_point(rng.uniform(0.2, 2.5), rng.uniform(0.2, 0.8));
    auto res = gw_solve_tiny(x, y);
    double lo = 0.0, hi = std::min(x.w[0], y.w[0]);
    double best = 1e300;
    for (int k = 0; k <= 2000000; ++k) {
      double t = lo + (hi - lo) * k / 2000000.0;
      Eigen::MatrixXd pi(2, 2);
      pi << t, x.w[0] - t, y.w[0] - t, x.w[1] - (y.w[0] - t);
      if (pi.minCoeff() < -1e-12) continue;
      best = std::min(best, gw_cost(pi, x, y));
    }
    CHECK(res.value <= best + 1e-9);
    CHECK(res.value >= best - 1e-6);  // the scan itself is 1e-6-accurate
  }

  // 3x2 instance: 600x600 feasibility grid cross-check
  auto x = random_gauged(3, rng);
  auto y = two_point(1.1, 0.4);
  auto res = gw_solve_tiny(x, y);
  double best = 1e300;
  for (int a = 0; a <= 600; ++a)
    for (int b = 0; b <= 600; ++b) {
      double t0 = x.w[0] * a / 600.0, t1 = x.w[1] * b / 600.0;
      Eigen::MatrixXd pi(3, 2);
      pi << t0, x.w[0] - t0, t1, x.w[1] - t1, y.w[0] - t0 - t1,
          x.w[2] - (y.w[0] - t0 - t1);
      if (pi.minCoeff() < -1e-12) continue;
      best = std::min(best, gw_cost(pi, x, y));
    }
  CHECK(res.value <= best + 1e-9);
}

TEST_CASE("gh matches a full subset enumeration on small products") {
  Rng rng(322);
  for (int trial = 0; trial < 6; ++trial) {
    int n = 2 + int(rng.below(2)), m = 2 + int(rng.below(3));  // nm <= 12
    auto dx = random_finite_metric(n, rng);
    auto dy = random_finite_metric(m, rng);
    double fast = gh_distance(dx, dy);
    // exhaustive correspondence scan
    double slow = 1e300;
    for (int mask = 1; mask < (1 << (n * m)); ++mask) {
      int rows = 0, cols = 0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
          if (mask >> (i * m + j) & 1) {
            rows |= 1 << i;
            cols |= 1 << j;
          }
      if (rows != (1 << n) - 1 || cols != (1 << m) - 1) continue;
      double dist = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
          if (!(mask >> (i * m + j) & 1)) continue;
          for (int i2 = 0; i2 < n; ++i2)
            for (int j2 = 0; j2 < m; ++j2) {
              if (!(mask >> (i2 * m + j2) & 1)) continue;
              dist = std::max(dist, std::abs(dx(i, i2) - dy(j, j2)));
            }
        }
      slow = std::min(slow, dist);
    }
    CHECK(fast == doctest::Approx(slow).epsilon(1e-12));
  }
}

TEST_CASE("regression: 4-point segment solve escapes the coordinate-descent valley") {
  // instance recorded from a failing sweep: grid + single-coordinate descent
  // stalled 1.6e-3 above the optimum of GW(X(1/2), Y); the stationary-face
  // enumeration must reach it
  std::uint64_t seed = 4;
  Rng rng(seed + 99);
  auto rand2 = [&rng]() {
    Eigen::MatrixXd g(2, 2);
    double gap = rng.uniform(0.3, 2.0);
    g << 0, gap, gap, 0;
    double w0 = rng.uniform(0.2, 0.8);
    Vec w(2);
    w << w0, 1 - w0;
    return GaugedSpace(g, w);
  };
  GaugedSpace x0 = rand2(), x1 = rand2(), y = rand2();
  auto r0 = gw_solve_tiny(x0, y);
  auto r1 = gw_solve_tiny(x1, y);
  auto seg = gw_segment(x0, x1, y, gw_glue(x0, x1, y, r0.plan, r1.plan));
  auto xs = seg.at(0.5);
  REQUIRE(xs.n() == 4);
  auto vy = gw_solve_tiny(xs, y);
  CHECK(vy.value <= 0.0484928);  // stationary-face optimum, below the stalled 0.0502815
  CHECK(vy.value >= 0.0484926);

  // full chord sweep over the originally failing configuration
  GwCheckConfig cfg;
  cfg.seed = seed;
  cfg.n_test_spaces = 12;
  cfg.s_grid = equispaced_grid(17);
  cfg.tol = 1e-6;
  CHECK(gw_segment_nncc_check(x0, x1, y, cfg).passed);
}
