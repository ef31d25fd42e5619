#include "crosscurve/measures.hpp"

#include <cmath>

#include "crosscurve/families.hpp"

namespace crosscurve {

ProbVector::ProbVector(Vec weights) : w(std::move(weights)) {
  for (int i = 0; i < w.size(); ++i)
    if (w[i] < -1e-12) throw DomainError("ProbVector: negative weight");
  double sum = w.sum();
  if (std::abs(sum - 1.0) > 1e-9) throw DomainError("ProbVector: weights must sum to 1");
  for (int i = 0; i < w.size(); ++i) w[i] = std::max(0.0, w[i]);
  w /= w.sum();
}

ProbVector random_prob_vector(int n, Rng& rng) { return ProbVector(rng.dirichlet(n)); }

ExtReal kl(const ProbVector& mu, const ProbVector& nu) {
  double acc = 0.0;
  for (int i = 0; i < mu.size(); ++i) {
    double m = mu.w[i], n = nu.w[i];
    if (n > 0.0) {
      if (m > 0.0) {
        double t = m / n;
        acc += (t * std::log(t) - t + 1.0) * n;
      } else {
        acc += n;  // F(0) = 1
      }
    } else if (m > 0.0) {
      return ExtReal::pos_inf();  // absolute continuity fails
    }
  }
  return ExtReal(acc);
}

ProbVector kl_segment_at(const ProbVector& mu0, const ProbVector& mu1, double s) {
  return ProbVector((1.0 - s) * mu0.w + s * mu1.w);
}

double kl_identity_residual(const ProbVector& mu0, const ProbVector& mu1, const ProbVector& nu,
                            double s) {
  ExtReal k0 = kl(mu0, nu), k1 = kl(mu1, nu);
  if (!k0.finite() || !k1.finite())
    throw PreconditionError("kl_identity_residual: endpoint divergences must be finite");
  ProbVector mus = kl_segment_at(mu0, mu1, s);
  double lhs = (1.0 - s) * k0.value() + s * k1.value() - kl(mus, nu).value();
  double rhs = (1.0 - s) * kl(mu0, mus).value() + s * kl(mu1, mus).value();
  return std::abs(lhs - rhs);
}

double hellinger_sq(const ProbVector& mu, const ProbVector& nu) {
  double acc = 0.0;
  for (int i = 0; i < mu.size(); ++i) {
    double d = std::sqrt(mu.w[i]) - std::sqrt(nu.w[i]);
    acc += d * d;
  }
  return acc;
}

double bhattacharyya(const ProbVector& mu, const ProbVector& nu) {
  double acc = 0.0;
  for (int i = 0; i < mu.size(); ++i) acc += std::sqrt(mu.w[i] * nu.w[i]);
  return acc;
}

double fisher_rao(const ProbVector& mu, const ProbVector& nu) {
  double bc = bhattacharyya(mu, nu);
  if (bc > 1.0 + 1e-12) throw NumericError("fisher_rao: Bhattacharyya coefficient above 1");
  return std::acos(std::clamp(bc, 0.0, 1.0));
}

namespace {

Vec sqrt_coords(const ProbVector& p) {
  Vec a(p.size());
  for (int i = 0; i < p.size(); ++i) a[i] = std::sqrt(p.w[i]);
  return a;
}

Vec square_coords(const Vec& a) {
  Vec w(a.size());
  for (int i = 0; i < a.size(); ++i) w[i] = a[i] * a[i];
  return w;
}

Vec clamp_tiny_negative(const Vec& a, double tol) {
  Vec out = a;
  for (int i = 0; i < out.size(); ++i) {
    if (out[i] < -tol)
      throw NumericError("segment left the nonnegative part of the sphere");
    out[i] = std::max(0.0, out[i]);
  }
  return out;
}

}  // namespace

SegmentPath hellinger_segment(const ProbVector& mu0, const ProbVector& mu1,
                              const ProbVector& nu_bar) {
  Vec a0 = sqrt_coords(mu0), a1 = sqrt_coords(mu1), bb = sqrt_coords(nu_bar);
  Vec a0p = a0 - a0.dot(bb) * bb;
  Vec a1p = a1 - a1.dot(bb) * bb;
  SegmentPath seg;
  seg.x0 = mu0.w;
  seg.x1 = mu1.w;
  seg.base_y = nu_bar.w;
  seg.interior = [a0p, a1p, bb](double s) -> Vec {
    Vec ap = (1.0 - s) * a0p + s * a1p;
    double rad2 = std::max(0.0, 1.0 - ap.squaredNorm());
    Vec a = ap + std::sqrt(rad2) * bb;
    a = clamp_tiny_negative(a, 1e-9);
    Vec w = square_coords(a);
    return w / w.sum();
  };
  return seg;
}

SegmentPath fr_segment(const ProbVector& mu0, const ProbVector& mu1, const ProbVector& nu_bar) {
  Vec a0 = sqrt_coords(mu0), a1 = sqrt_coords(mu1), bb = sqrt_coords(nu_bar);
  int n = static_cast<int>(a0.size());

  // orthonormal frame (b, e, f) spanning {bb, a0, a1}; degenerate directions drop
  std::vector<Vec> frame{bb};
  for (const Vec* cand : {&a0, &a1}) {
    Vec v = *cand;
    for (const Vec& f : frame) v -= v.dot(f) * f;
    double nv = v.norm();
    if (nv > 1e-10) frame.push_back(v / nv);
  }
  int k = static_cast<int>(frame.size());
  Eigen::MatrixXd basis(n, k);
  for (int c = 0; c < k; ++c) basis.col(c) = frame[static_cast<std::size_t>(c)];

  // coordinates on the embedded unit sphere S^{k-1}
  Vec c0 = basis.transpose() * a0;
  Vec c1 = basis.transpose() * a1;
  Vec cb = Vec::Zero(k);
  cb[0] = 1.0;
  auto renorm = [](Vec v) {
    double nv = v.norm();
    if (std::abs(nv - 1.0) > 1e-8)
      throw NumericError("fr_segment: square-root density left the unit sphere");
    return Vec(v / nv);
  };
  c0 = renorm(c0);
  c1 = renorm(c1);

  Vec v0 = sphere_log(cb, c0);
  Vec v1 = sphere_log(cb, c1);
  SegmentPath seg;
  seg.x0 = mu0.w;
  seg.x1 = mu1.w;
  seg.base_y = nu_bar.w;
  seg.interior = [v0, v1, cb, basis](double s) -> Vec {
    Vec cs = sphere_exp(cb, Vec((1.0 - s) * v0 + s * v1));
    Vec a = basis * cs;
    a = clamp_tiny_negative(a, 1e-7);
    Vec w = square_coords(a);
    return w / w.sum();
  };
  return seg;
}

namespace {

ProbVector as_prob(const Vec& w) { return ProbVector(w); }

}  // namespace

CostSpace kl_cost(int n) {
  CostSpace c;
  c.dim_x = c.dim_y = n;
  c.name = "kl";
  c.eval = [](const Vec& x, const Vec& y) { return kl(as_prob(x), as_prob(y)); };
  return c;
}

CostSpace hellinger_cost(int n) {
  CostSpace c;
  c.dim_x = c.dim_y = n;
  c.name = "hellinger_sq";
  c.eval = [](const Vec& x, const Vec& y) { return ExtReal(hellinger_sq(as_prob(x), as_prob(y))); };
  return c;
}

CostSpace fisher_rao_sq_cost(int n) {
  CostSpace c;
  c.dim_x = c.dim_y = n;
  c.name = "fisher_rao_sq";
  c.eval = [](const Vec& x, const Vec& y) {
    double d = fisher_rao(as_prob(x), as_prob(y));
    return ExtReal(d * d);
  };
  return c;
}

// ---- Bures-Wasserstein -------------------------------------------------------

Psd::Psd(const Eigen::MatrixXd& sym) : m(sym) {
  if (m.rows() != m.cols()) throw DomainError("Psd: square matrix required");
  if ((m - m.transpose()).norm() > 1e-12 * (1.0 + m.norm()))
    throw DomainError("Psd: matrix not symmetric");
  m = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.eigenvalues().minCoeff() < -1e-10 * (1.0 + m.norm()))
    throw DomainError("Psd: spectrum below the clamp tolerance");
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  m = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  m = 0.5 * (m + m.transpose());
}

Vec psd_flatten(const Psd& s) {
  int n = s.n();
  Vec v(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) v[i * n + j] = s.m(i, j);
  return v;
}

Psd psd_unflatten(const Vec& v) {
  int n = static_cast<int>(std::lround(std::sqrt(double(v.size()))));
  if (n * n != v.size()) throw DomainError("psd_unflatten: length is not a perfect square");
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = v[i * n + j];
  return Psd(0.5 * (m + m.transpose()));
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (s + s.transpose()));
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::MatrixXd psd_pinv_sqrt(const Eigen::MatrixXd& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (s + s.transpose()));
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  double thresh = 1e-10 * std::max(1.0, ev.maxCoeff());
  Eigen::VectorXd inv(ev.size());
  for (int i = 0; i < ev.size(); ++i) inv[i] = ev[i] > thresh ? 1.0 / std::sqrt(ev[i]) : 0.0;
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

double bw_distance_sq(const Psd& s1, const Psd& s2) {
  // tr((S1^{1/2} S2 S1^{1/2})^{1/2}) equals the nuclear norm of
  // S2^{1/2} S1^{1/2}; the SVD route avoids squaring small eigenvalues
  Eigen::MatrixXd a = psd_sqrt(s2.m) * psd_sqrt(s1.m);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  double val = s1.m.trace() + s2.m.trace() - 2.0 * svd.singularValues().sum();
  if (val < -1e-10 * (1.0 + s1.m.norm() + s2.m.norm()))
    throw NumericError("bw_distance_sq: negative value beyond tolerance");
  return std::max(0.0, val);
}

SegmentPath bw_segment(const Psd& s0, const Psd& s1, const Psd& s2) {
  int n = s0.n();
  Eigen::MatrixXd r2 = psd_sqrt(s2.m);
  auto optimal_factor = [&](const Psd& si) {
    // orthogonal polar factor of A = S2^{1/2} Si^{1/2}. The pseudo-inverse
    // form A (A^T A)^{-1/2} is only a partial isometry when A loses rank and
    // then fails to reproduce the endpoint; the full polar factor is an
    // equally optimal alignment and is orthogonal for every PSD input.
    Eigen::MatrixXd ri = psd_sqrt(si.m);
    Eigen::MatrixXd a = r2 * ri;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::MatrixXd u = svd.matrixU() * svd.matrixV().transpose();
    return std::pair<Eigen::MatrixXd, Eigen::MatrixXd>(ri, u);
  };
  auto [r0, u0] = optimal_factor(s0);
  auto [r1, u1] = optimal_factor(s1);
  Eigen::MatrixXd m0 = r0 * u0.transpose();
  Eigen::MatrixXd m1 = r1 * u1.transpose();
  if ((m0 * m0.transpose() - s0.m).norm() > 1e-8 * (1.0 + s0.m.norm()) ||
      (m1 * m1.transpose() - s1.m).norm() > 1e-8 * (1.0 + s1.m.norm()))
    throw ConstructionError("bw_segment: endpoint factorization failed");

  SegmentPath seg;
  seg.x0 = psd_flatten(s0);
  seg.x1 = psd_flatten(s1);
  seg.base_y = psd_flatten(s2);
  seg.interior = [m0, m1, n](double s) -> Vec {
    Eigen::MatrixXd ms = (1.0 - s) * m0 + s * m1;
    Eigen::MatrixXd out = ms * ms.transpose();
    (void)n;
    return psd_flatten(Psd(out));
  };
  return seg;
}

CostSpace bw_cost(int n) {
  CostSpace c;
  c.dim_x = c.dim_y = n * n;
  c.name = "bures_wasserstein_sq";
  c.eval = [](const Vec& x, const Vec& y) {
    return ExtReal(bw_distance_sq(psd_unflatten(x), psd_unflatten(y)));
  };
  return c;
}

SmoothCost bw_smooth_cost(int n, double min_eig) {
  SmoothCost sc = make_smooth(bw_cost(n));
  int k = n * (n + 1) / 2;

  // packed symmetric chart: orthonormal basis of symmetric matrices
  auto sym_basis = [n, k]() {
    std::vector<Eigen::MatrixXd> bs;
    bs.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
        if (i == j) {
          b(i, i) = 1.0;
        } else {
          b(i, j) = b(j, i) = 1.0 / std::sqrt(2.0);
        }
        bs.push_back(b);
      }
    return bs;
  }();

  auto chart = [sym_basis, n, k](const Vec& at) {
    Chart ch;
    ch.basis = Eigen::MatrixXd(n * n, k);
    for (int c = 0; c < k; ++c) {
      Eigen::MatrixXd b = sym_basis[static_cast<std::size_t>(c)];
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) ch.basis(i * n + j, c) = b(i, j);
    }
    Vec center = at;
    auto basis = ch.basis;
    ch.to_ambient = [center, basis](const Vec& u) -> Vec { return center + basis * u; };
    return ch;
  };
  sc.chart_x = chart;
  sc.chart_y = chart;
  sc.pair_in_domain = [min_eig](const Vec& x, const Vec& y) {
    auto mineig = [](const Vec& v) {
      int n = static_cast<int>(std::lround(std::sqrt(double(v.size()))));
      Eigen::MatrixXd m(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = v[i * n + j];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
      return es.eigenvalues().minCoeff();
    };
    return mineig(x) > min_eig && mineig(y) > min_eig;
  };
  // BW^2 is only C^1-ish near rank drops; keep stencils well inside
  sc.h1 = 1e-6;
  sc.h2 = 1e-4;
  return sc;
}

Psd random_psd(int n, Rng& rng, bool rank_deficient) {
  int cols = rank_deficient ? std::max(1, n - 1) : n;
  Eigen::MatrixXd a(n, cols);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < cols; ++j) a(i, j) = rng.normal();
  Eigen::MatrixXd s = a * a.transpose() / double(cols);
  return Psd(s);
}

}  // namespace crosscurve
