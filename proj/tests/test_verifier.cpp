#include "doctest.h"

#include "crosscurve/families.hpp"
#include "crosscurve/measures.hpp"
#include "crosscurve/products.hpp"
#include "crosscurve/verifier.hpp"
#include "test_helpers.hpp"

using namespace crosscurve;

TEST_CASE("hilbert chord gap vanishes to machine precision") {
  auto fam = hilbert_family(2);
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    Vec x0 = rng.normal_vec(2), x1 = rng.normal_vec(2), yb = rng.normal_vec(2);
    auto cfg = box_config(2, -3, 3, 100 + trial, 32);
    cfg.tol = 1e-12;
    auto rep = nncc_check(fam.segment(x0, x1, yb), fam.cost, cfg);
    CHECK(rep.passed);
    CHECK(rep.max_gap <= 1e-12);
    // equality: the reversed inequality holds as well
    auto rep_rev = nncc_check(fam.segment(x0, x1, yb), negated(fam.cost), cfg);
    CHECK(rep_rev.max_gap <= 1e-12);
  }
}

TEST_CASE("constant segment always passes") {
  auto fam = hilbert_family(3);
  Vec x = vec3(0.4, -1.2, 2.0), yb = vec3(1, 1, 1);
  auto rep = nncc_check(fam.segment(x, x, yb), fam.cost, box_config(3, -2, 2, 5));
  CHECK(rep.passed);
  CHECK(rep.max_gap <= 1e-14);
}

TEST_CASE("quartic control: verifier reports the chord violation") {
  auto fam = quartic_control_family();
  auto w = quartic_control_witness();
  auto cfg = box_config(2, -2, 2, 11);
  cfg.extra_y = {w.y};
  auto rep = nncc_check(fam.segment(w.x0, w.x1, w.y_bar), fam.cost, cfg);
  CHECK_FALSE(rep.passed);
  CHECK(rep.max_gap >= w.expected_gap - 1e-12);
  REQUIRE(rep.witness.has_value());

  // brute-force search confirms the violation is not an artifact of the
  // pinned point: scan a coarse grid of (x0, x1, y) configurations
  double worst = 0.0;
  for (double a = -1.0; a <= 1.0; a += 0.5)
    for (double b = -1.0; b <= 1.0; b += 0.5)
      for (double yv = -1.5; yv <= 1.5; yv += 0.75) {
        double mid = 0.5 * (a + b);
        double lhs = std::pow(mid, 4) - std::pow(mid - yv, 4);
        double rhs = 0.5 * (std::pow(a, 4) - std::pow(a - yv, 4)) +
                     0.5 * (std::pow(b, 4) - std::pow(b - yv, 4));
        worst = std::max(worst, lhs - rhs);
      }
  CHECK(worst > 1.0);
}

TEST_CASE("lmp gap is dominated by the nncc gap on shared samples") {
  auto fam = quartic_control_family();
  Rng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    Vec x0 = rng.normal_vec(2), x1 = rng.normal_vec(2), yb = rng.normal_vec(2);
    auto cfg = box_config(2, -2, 2, 300 + trial, 40);
    auto seg = fam.segment(x0, x1, yb);
    auto rep_nncc = nncc_check(seg, fam.cost, cfg);
    auto rep_lmp = lmp_check(seg, fam.cost, cfg);
    CHECK(rep_lmp.max_gap <= rep_nncc.max_gap + 1e-12);
  }
}

TEST_CASE("conv pass implies nncc pass on the affine families") {
  auto fam = hilbert_family(2);
  Rng rng(33);
  Vec x0 = rng.normal_vec(2), x1 = rng.normal_vec(2), yb = rng.normal_vec(2);
  auto cfg = box_config(2, -2, 2, 17);
  auto seg = fam.segment(x0, x1, yb);
  auto conv = conv_check(seg, fam.cost, cfg);
  auto nncc = nncc_check(seg, fam.cost, cfg);
  CHECK(conv.passed);
  CHECK(nncc.passed);

  auto bad = quartic_control_family();
  auto w = quartic_control_witness();
  auto cfg_bad = box_config(2, -2, 2, 18);
  cfg_bad.extra_y = {w.y};
  auto seg_bad = bad.segment(w.x0, w.x1, w.y_bar);
  CHECK_FALSE(conv_check(seg_bad, bad.cost, cfg_bad).passed);
  CHECK_FALSE(nncc_check(seg_bad, bad.cost, cfg_bad).passed);
}

TEST_CASE("one-convexity is an equality for straight lines in Euclidean space") {
  auto fam = hilbert_family(3);
  Rng rng(44);
  for (int trial = 0; trial < 20; ++trial) {
    Vec x0 = rng.normal_vec(3), x1 = rng.normal_vec(3), yb = rng.normal_vec(3);
    auto rep = one_convexity_check(fam.segment(x0, x1, yb), fam.cost, box_config(3, -2, 2, 60));
    CHECK(rep.passed);
    CHECK(std::abs(rep.max_gap) <= 1e-12);
  }
  Vec z = vec3(0.3, 0.3, -0.1);
  auto rep = one_convexity_check(fam.segment(z, z, z), fam.cost, box_config(3, -1, 1, 61));
  CHECK(rep.passed);
}

TEST_CASE("pc_check: flat space ties, sphere passes, hyperbolic fails") {
  auto flat = hilbert_family(2);
  Rng rng(55);
  Vec x0 = rng.normal_vec(2), x1 = rng.normal_vec(2);
  auto geo = flat.segment(x0, x1, x0);
  auto rep = pc_check(geo, flat.cost, box_config(2, -2, 2, 70));
  CHECK(rep.passed);
  CHECK(std::abs(rep.max_gap) <= 1e-12);

  auto sph = sphere_family(2);
  for (int trial = 0; trial < 10; ++trial) {
    Vec a, b, dummy;
    random_sphere_triple(rng, 2.0, a, b, dummy);
    auto arc = sph.segment(a, b, a);  // minor great-circle arc via exp/log at a
    auto cfg = box_config(3, -1, 1, 80 + trial, 0);
    cfg.y_sampler = [](Rng& r) { return random_sphere_point(r); };
    cfg.y_count = 40;
    cfg.tol = 1e-9;
    auto srep = pc_check(arc, sph.cost, cfg);
    CHECK(srep.passed);
  }

  auto hyp = poincare_disk_family();
  Vec h0 = vec2(-0.8, 0.0), h1 = vec2(0.8, 0.0);
  auto hgeo = hyp.segment(h0, h1, h0);
  auto hcfg = box_config(2, -0.6, 0.6, 90, 60);
  auto hrep = pc_check(hgeo, hyp.cost, hcfg);
  CHECK_FALSE(hrep.passed);
  CHECK(hrep.max_gap > 1e-3);
}

TEST_CASE("pc_check rejects non-constant-speed parametrizations") {
  auto flat = hilbert_family(2);
  Vec x0 = vec2(0, 0), x1 = vec2(2, 0);
  SegmentPath warped;
  warped.x0 = x0;
  warped.x1 = x1;
  warped.base_y = x0;
  warped.interior = [x0, x1](double s) -> Vec { return (1 - s * s) * x0 + s * s * x1; };
  CHECK_THROWS_AS(pc_check(warped, flat.cost, box_config(2, -1, 1, 95)), ParametrizationError);
}

TEST_CASE("geodesics are variational c-segments exactly when PC holds") {
  Rng rng(66);

  // flat line, base at the midpoint: both checks tie at zero gap
  auto flat = hilbert_family(2);
  Vec f0 = rng.normal_vec(2), f1 = rng.normal_vec(2);
  auto line = flat.segment(f0, f1, f0);
  auto fcfg = box_config(2, -2, 2, 199);
  auto fvcs = geodesic_is_vcs(line, flat.cost, 0.5, fcfg);
  CHECK(fvcs.passed);
  CHECK(std::abs(fvcs.max_gap) <= 1e-12);

  auto sph = sphere_family(2);
  for (int trial = 0; trial < 8; ++trial) {
    Vec a, b, dummy;
    random_sphere_triple(rng, 1.8, a, b, dummy);
    auto arc = sph.segment(a, b, a);
    auto cfg = box_config(3, -1, 1, 200 + trial, 0);
    cfg.y_sampler = [](Rng& r) { return random_sphere_point(r); };
    cfg.y_count = 40;
    cfg.tol = 1e-9;
    auto vcs = geodesic_is_vcs(arc, sph.cost, 0.0, cfg);
    auto pc = pc_check(arc, sph.cost, cfg);
    CHECK(vcs.passed == pc.passed);
    CHECK(vcs.passed);
  }

  auto hyp = poincare_disk_family();
  Vec h0 = vec2(-0.8, 0.0), h1 = vec2(0.8, 0.0);
  auto hgeo = hyp.segment(h0, h1, h0);
  auto hcfg = box_config(2, -0.6, 0.6, 210, 60);
  auto vcs = geodesic_is_vcs(hgeo, hyp.cost, 0.5, hcfg);
  auto pc = pc_check(hgeo, hyp.cost, hcfg);
  CHECK_FALSE(vcs.passed);
  CHECK_FALSE(pc.passed);
}

TEST_CASE("segment through the cost singularity raises an error") {
  auto logc = log_distance_cost(2);
  Vec x0 = vec2(0, 0), x1 = vec2(1, 0), yb = vec2(0, 0);
  // endpoint on the diagonal: evaluation fails immediately
  CHECK_THROWS(nncc_check(linear_segment(x0, x1, yb), logc, box_config(2, -1, 1, 1)));

  Vec a = vec2(-1, 0), b = vec2(1, 0), yb2 = vec2(0, 0);
  CHECK_THROWS_AS(nncc_check(linear_segment(a, b, yb2), logc, box_config(2, -2, 2, 2)),
                  DomainError);
}

TEST_CASE("report JSON is deterministic and carries the schema tag") {
  auto fam = hilbert_family(2);
  Vec x0 = vec2(0, 0), x1 = vec2(1, 1), yb = vec2(0.5, 0);
  auto cfg = box_config(2, -1, 1, 123);
  auto rep1 = nncc_check(fam.segment(x0, x1, yb), fam.cost, cfg);
  auto rep2 = nncc_check(fam.segment(x0, x1, yb), fam.cost, cfg);
  CHECK(rep1.to_json() == rep2.to_json());
  CHECK(rep1.to_json().find("\"schema\":1") != std::string::npos);
  CHECK(rep1.to_json().find("\"check_kind\":\"nncc\"") != std::string::npos);
}

TEST_CASE("product of passing factors passes; violating factor poisons the product") {
  auto h2 = hilbert_family(2);
  auto prod_cost = product_cost(h2.cost, h2.cost);
  Rng rng(77);
  Vec x0a = rng.normal_vec(2), x1a = rng.normal_vec(2), yba = rng.normal_vec(2);
  Vec x0b = rng.normal_vec(2), x1b = rng.normal_vec(2), ybb = rng.normal_vec(2);
  auto seg = product_segment(h2.segment(x0a, x1a, yba), h2.segment(x0b, x1b, ybb));
  auto rep = nncc_check(seg, prod_cost, box_config(4, -2, 2, 301));
  CHECK(rep.passed);
  CHECK(rep.max_gap <= 1e-12);

  auto bad = quartic_control_family();
  auto w = quartic_control_witness();
  auto mixed_cost = product_cost(h2.cost, bad.cost);
  auto mixed_seg = product_segment(h2.segment(x0a, x1a, yba), bad.segment(w.x0, w.x1, w.y_bar));
  auto cfg = box_config(4, -2, 2, 302);
  Vec adv(4);
  adv << yba[0], yba[1], w.y[0], w.y[1];
  cfg.extra_y = {adv};
  auto bad_rep = nncc_check(mixed_seg, mixed_cost, cfg);
  CHECK_FALSE(bad_rep.passed);
}

TEST_CASE("submersion projection: identity is a no-op, non-optimal endpoints rejected") {
  auto h2 = hilbert_family(2);
  Rng rng(88);
  Vec x0 = rng.normal_vec(2), x1 = rng.normal_vec(2), yb = rng.normal_vec(2);
  auto seg = h2.segment(x0, x1, yb);
  auto id = [](const Vec& v) { return v; };
  auto proj = submersion_project(seg, id, id, h2.cost, h2.cost, box_config(2, -2, 2, 1));
  CHECK((proj.at(0.37) - seg.at(0.37)).norm() == 0.0);

  auto h1 = hilbert_family(1);
  auto sum = [](const Vec& v) { Vec w(1); w << v.sum(); return w; };
  CHECK_THROWS_AS(submersion_project(seg, sum, sum, h2.cost, h1.cost, box_config(1, -2, 2, 1)),
                  OptimalityError);
}

TEST_CASE("matrix square-root submersion reproduces the bures-wasserstein segment") {
  // total space: 2x2 matrices with the squared Frobenius cost; projection MM^T
  int n = 2;
  auto frob = hilbert_family(n * n);
  auto proj = [n](const Vec& flat) {
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = flat[i * n + j];
    Eigen::MatrixXd s = m * m.transpose();
    Vec out(n * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out[i * n + j] = s(i, j);
    return out;
  };
  Rng rng(991);
  for (int trial = 0; trial < 10; ++trial) {
    auto s0 = random_psd(n, rng);
    auto s1 = random_psd(n, rng);
    auto s2 = random_psd(n, rng);
    // optimal lifts: M_i = S_i^{1/2} U_i^T against the base lift S_2^{1/2}
    Eigen::MatrixXd r2 = psd_sqrt(s2.m);
    auto lift = [&](const Psd& si) {
      Eigen::MatrixXd ri = psd_sqrt(si.m);
      Eigen::MatrixXd u = (r2 * ri) * psd_pinv_sqrt(ri * s2.m * ri);
      Eigen::MatrixXd m = ri * u.transpose();
      Vec flat(n * n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) flat[i * n + j] = m(i, j);
      return flat;
    };
    Vec up0 = lift(s0), up1 = lift(s1), upb(n * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) upb[i * n + j] = r2(i, j);

    VerifierConfig cfg;
    cfg.tol = 1e-8;
    auto projected = submersion_project(linear_segment(up0, up1, upb), proj, proj, frob.cost,
                                        bw_cost(n), cfg);
    auto direct = bw_segment(s0, s1, s2);
    for (double s : {0.2, 0.5, 0.8})
      CHECK((projected.at(s) - direct.at(s)).norm() <= 1e-10);
  }
}

TEST_CASE("product of two spheres passes with factor exp/log segments") {
  auto sph = sphere_family(2);
  auto prod = product_cost(sph.cost, sph.cost);
  Rng rng(992);
  for (int trial = 0; trial < 8; ++trial) {
    Vec a1, b1, c1, a2, b2, c2;
    random_sphere_triple(rng, 2.4, a1, b1, c1);
    random_sphere_triple(rng, 2.4, a2, b2, c2);
    auto seg = product_segment(sph.segment(a1, b1, c1), sph.segment(a2, b2, c2));
    VerifierConfig cfg;
    cfg.seed = 9920 + std::uint64_t(trial);
    cfg.tol = 1e-9;
    cfg.y_count = 32;
    cfg.y_sampler = [](Rng& r) {
      Vec y(6);
      y << r.unit_vec(3), r.unit_vec(3);
      return y;
    };
    auto rep = nncc_check(seg, prod, cfg);
    CHECK(rep.passed);
  }
}
