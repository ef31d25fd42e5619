#include "crosscurve/families.hpp"

#include <cmath>
#include <complex>

namespace crosscurve {

namespace {

double sq(double v) { return v * v; }

}  // namespace

CostFamily hilbert_family(int dim) {
  if (dim < 1) throw DomainError("hilbert_family: dim >= 1 required");
  CostFamily fam;
  fam.cost.dim_x = fam.cost.dim_y = dim;
  fam.cost.name = "hilbert";
  fam.cost.eval = [](const Vec& x, const Vec& y) { return ExtReal((x - y).squaredNorm()); };
  fam.segment = [](const Vec& x0, const Vec& x1, const Vec& y_bar) {
    return linear_segment(x0, x1, y_bar);
  };
  return fam;
}

CostFamily generalized_hilbert_family(int dim, std::function<Vec(const Vec&)> F,
                                      std::function<Vec(const Vec&)> F_inverse,
                                      std::function<Vec(const Vec&)> G) {
  CostFamily fam;
  fam.cost.dim_x = fam.cost.dim_y = dim;
  fam.cost.name = "hilbert_gen";
  fam.cost.eval = [F, G](const Vec& x, const Vec& y) {
    return ExtReal((F(x) - G(y)).squaredNorm());
  };
  fam.segment = [F, F_inverse](const Vec& x0, const Vec& x1, const Vec& y_bar) {
    Vec f0 = F(x0), f1 = F(x1);
    SegmentPath seg;
    seg.x0 = x0;
    seg.x1 = x1;
    seg.base_y = y_bar;
    seg.interior = [f0, f1, F_inverse](double s) {
      return F_inverse(Vec((1.0 - s) * f0 + s * f1));
    };
    return seg;
  };
  return fam;
}

Potential quadratic_potential(int dim) {
  Potential p;
  p.name = "quadratic";
  p.dim = dim;
  p.u = [](const Vec& x) { return x.squaredNorm(); };
  p.grad = [](const Vec& x) -> Vec { return 2.0 * x; };
  p.hess = [dim](const Vec&) -> Eigen::MatrixXd {
    return 2.0 * Eigen::MatrixXd::Identity(dim, dim);
  };
  p.grad_inverse = [](const Vec& q) -> Vec { return 0.5 * q; };
  return p;
}

Potential entropy_potential(int dim) {
  Potential p;
  p.name = "entropy";
  p.dim = dim;
  p.u = [](const Vec& x) {
    double v = 0;
    for (int i = 0; i < x.size(); ++i) v += x[i] * std::log(x[i]);
    return v;
  };
  p.grad = [](const Vec& x) -> Vec {
    Vec g(x.size());
    for (int i = 0; i < x.size(); ++i) g[i] = std::log(x[i]) + 1.0;
    return g;
  };
  p.hess = [](const Vec& x) -> Eigen::MatrixXd {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(x.size(), x.size());
    for (int i = 0; i < x.size(); ++i) h(i, i) = 1.0 / x[i];
    return h;
  };
  p.grad_inverse = [](const Vec& q) -> Vec {
    Vec x(q.size());
    for (int i = 0; i < q.size(); ++i) x[i] = std::exp(q[i] - 1.0);
    return x;
  };
  p.in_domain = [dim](const Vec& x) {
    if (x.size() != dim) return false;
    for (int i = 0; i < x.size(); ++i)
      if (!(x[i] > 0)) return false;
    return true;
  };
  return p;
}

Potential quartic_norm_potential(int dim) {
  Potential p;
  p.name = "quartic_norm";
  p.dim = dim;
  p.u = [](const Vec& x) { return sq(x.squaredNorm()); };
  p.grad = [](const Vec& x) -> Vec { return 4.0 * x.squaredNorm() * x; };
  p.hess = [dim](const Vec& x) -> Eigen::MatrixXd {
    return 4.0 * x.squaredNorm() * Eigen::MatrixXd::Identity(dim, dim) +
           8.0 * x * x.transpose();
  };
  return p;
}

namespace {

// Solve grad u(x) = q by damped Newton; closed forms bypass this.
Vec invert_gradient(const Potential& u, const Vec& q, const Vec& guess) {
  if (u.grad_inverse) return u.grad_inverse(q);
  Vec x = guess;
  const int max_iter = 50;
  double res = (u.grad(x) - q).norm();
  for (int it = 0; it < max_iter; ++it) {
    if (res <= 1e-12 * (1.0 + q.norm())) return x;
    Vec step = u.hess(x).partialPivLu().solve(Vec(q - u.grad(x)));
    double t = 1.0;
    for (int bt = 0; bt < 40; ++bt) {
      Vec cand = x + t * step;
      if (u.in_domain(cand)) {
        double cres = (u.grad(cand) - q).norm();
        if (cres < res) {
          x = cand;
          res = cres;
          break;
        }
      }
      t *= 0.5;
      if (bt == 39) throw ConstructionError("bregman reverse segment: Newton stalled");
    }
  }
  if (res <= 1e-12 * (1.0 + q.norm())) return x;
  throw ConstructionError("bregman reverse segment: Newton did not reach residual target");
}

}  // namespace

CostFamily bregman_family(const Potential& u, BregmanMode mode) {
  CostFamily fam;
  fam.cost.dim_x = fam.cost.dim_y = u.dim;
  auto div = [u](const Vec& p, const Vec& q) {
    // D_u(p | q)
    return u.u(p) - u.u(q) - u.grad(q).dot(p - q);
  };
  if (mode == BregmanMode::Forward) {
    fam.cost.name = "bregman_forward_" + u.name;
    fam.cost.eval = [div, u](const Vec& x, const Vec& y) {
      if (!u.in_domain(x) || !u.in_domain(y)) throw DomainError("bregman: point out of domain");
      return ExtReal(div(x, y));
    };
    fam.segment = [](const Vec& x0, const Vec& x1, const Vec& y_bar) {
      return linear_segment(x0, x1, y_bar);
    };
  } else {
    fam.cost.name = "bregman_reverse_" + u.name;
    fam.cost.eval = [div, u](const Vec& x, const Vec& y) {
      if (!u.in_domain(x) || !u.in_domain(y)) throw DomainError("bregman: point out of domain");
      return ExtReal(div(y, x));
    };
    fam.segment = [u](const Vec& x0, const Vec& x1, const Vec& y_bar) {
      Vec q0 = u.grad(x0), q1 = u.grad(x1);
      SegmentPath seg;
      seg.x0 = x0;
      seg.x1 = x1;
      seg.base_y = y_bar;
      seg.interior = [u, q0, q1, x0](double s) {
        return invert_gradient(u, Vec((1.0 - s) * q0 + s * q1), x0);
      };
      return seg;
    };
  }
  return fam;
}

CostFamily semi_geostrophic_family(int dim, double g) {
  if (g == 0.0) throw DomainError("semi_geostrophic_family: g must be nonzero");
  CostFamily fam;
  fam.cost.dim_x = fam.cost.dim_y = dim + 1;  // (x, a) with a > 0 in the last slot
  fam.cost.name = "semi_geostrophic";
  fam.cost.eval = [dim, g](const Vec& xa, const Vec& yb) {
    double a = xa[dim], b = yb[dim];
    if (b <= 0.0 || a <= 0.0) throw DomainError("semi_geostrophic: nonpositive height component");
    double n2 = (xa.head(dim) - yb.head(dim)).squaredNorm();
    return ExtReal(n2 / (2.0 * b) + g * a / b);
  };
  fam.segment = [dim, g](const Vec& x0, const Vec& x1, const Vec& y_bar) {
    double k = (x0.head(dim) - x1.head(dim)).squaredNorm() / (2.0 * g);
    double a0 = x0[dim], a1 = x1[dim];
    // a(s) = a0 + s(a1-a0) + k s(1-s) is a parabola; when it bends downward at
    // an interior critical point the minimum height must stay positive
    if (k < 0.0) {
      double vertex = (a1 - a0 + k) / (2.0 * k);
      if (vertex > 0.0 && vertex < 1.0) {
        double a_min = (1.0 - vertex) * a0 + vertex * a1 + vertex * (1.0 - vertex) * k;
        if (a_min <= 0.0)
          throw DomainError("semi_geostrophic segment leaves the positive-height domain");
      }
    }
    SegmentPath seg;
    seg.x0 = x0;
    seg.x1 = x1;
    seg.base_y = y_bar;
    seg.interior = [dim, k, x0, x1](double s) {
      Vec xs(dim + 1);
      xs.head(dim) = (1.0 - s) * x0.head(dim) + s * x1.head(dim);
      xs[dim] = (1.0 - s) * x0[dim] + s * x1[dim] + s * (1.0 - s) * k;
      return xs;
    };
    return seg;
  };
  return fam;
}

CostFamily monge_family(int dim) {
  CostFamily fam;
  fam.cost.dim_x = fam.cost.dim_y = dim;
  fam.cost.name = "monge";
  fam.cost.eval = [](const Vec& x, const Vec& y) { return ExtReal((x - y).norm()); };
  fam.segment = [](const Vec& x0, const Vec& x1, const Vec& y_bar) {
    return monge_segment(x0, x1, y_bar);
  };
  return fam;
}

CostFamily monge_finite_family(const Eigen::MatrixXd& dist) {
  int n = static_cast<int>(dist.rows());
  if (dist.cols() != n) throw DomainError("monge_finite_family: square matrix required");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        if (dist(i, k) > dist(i, j) + dist(j, k) + 1e-12 * (1.0 + dist(i, k)))
          throw DomainError("monge_finite_family: triangle inequality violated");
  CostFamily fam;
  fam.cost.dim_x = fam.cost.dim_y = 1;
  fam.cost.name = "monge_finite";
  fam.cost.eval = [dist, n](const Vec& x, const Vec& y) {
    int i = static_cast<int>(std::lround(x[0]));
    int j = static_cast<int>(std::lround(y[0]));
    if (i < 0 || i >= n || j < 0 || j >= n)
      throw DomainError("monge_finite: index out of range");
    return ExtReal(dist(i, j));
  };
  fam.segment = [](const Vec& x0, const Vec& x1, const Vec& y_bar) {
    return monge_segment(x0, x1, y_bar);
  };
  return fam;
}

CostFamily sphere_family(int n) {
  CostFamily fam;
  fam.cost.dim_x = fam.cost.dim_y = n + 1;
  fam.cost.name = "sphere";
  fam.cost.eval = [](const Vec& x, const Vec& y) {
    // 2 atan2(|x-y|, |x+y|) keeps full precision at both ends of [0, pi]
    Vec xu = x / x.norm(), yu = y / y.norm();
    double d = 2.0 * std::atan2((xu - yu).norm(), (xu + yu).norm());
    return ExtReal(d * d);
  };
  fam.segment = [](const Vec& x0, const Vec& x1, const Vec& y_bar) {
    Vec v0 = sphere_log(y_bar, x0);
    Vec v1 = sphere_log(y_bar, x1);
    SegmentPath seg;
    seg.x0 = x0;
    seg.x1 = x1;
    seg.base_y = y_bar;
    seg.interior = [y_bar, v0, v1](double s) {
      return sphere_exp(y_bar, Vec((1.0 - s) * v0 + s * v1));
    };
    return seg;
  };
  return fam;
}

Vec sphere_exp(const Vec& y, const Vec& v) {
  double nv = v.norm();
  if (nv < 1e-15) return y;
  return std::cos(nv) * y + std::sin(nv) * (v / nv);
}

Vec sphere_log(const Vec& y, const Vec& x) {
  double theta = 2.0 * std::atan2((x - y).norm(), (x + y).norm());
  if (theta > M_PI - 1e-6)
    throw DomainError("sphere_log: point at or near the cut locus of the base");
  if (theta < 1e-15) return Vec::Zero(y.size());
  Vec perp = x - x.dot(y) * y;
  return (theta / perp.norm()) * perp;
}

CostSpace log_distance_cost(int dim) {
  CostSpace c;
  c.dim_x = c.dim_y = dim;
  c.name = "log_distance";
  c.eval = [](const Vec& x, const Vec& y) {
    double r = (x - y).norm();
    if (r <= 0.0) throw DomainError("log_distance: cost undefined on the diagonal x = y");
    return ExtReal(-std::log(r));
  };
  return c;
}

namespace {

// Optimal split of z into z' + z'' for |z'| + |z''|^2/(2 eps): the shrinkage map.
void shrink_split(const Vec& z, double eps, Vec& z_norm_part, Vec& z_quad_part) {
  double r = z.norm();
  if (r <= eps) {
    z_norm_part = Vec::Zero(z.size());
    z_quad_part = z;
  } else {
    Vec dir = z / r;
    z_quad_part = eps * dir;
    z_norm_part = z - z_quad_part;
  }
}

}  // namespace

CostFamily soft_threshold_family(int dim, double eps) {
  if (!(eps > 0)) throw DomainError("soft_threshold_family: eps > 0 required");
  CostFamily fam;
  fam.cost.dim_x = fam.cost.dim_y = dim;
  fam.cost.name = "soft_threshold";
  fam.cost.eval = [eps](const Vec& x, const Vec& y) {
    double r = (x - y).norm();
    return ExtReal(r <= eps ? r * r / (2.0 * eps) : r - eps / 2.0);
  };
  fam.segment = [dim, eps](const Vec& x0, const Vec& x1, const Vec& y_bar) {
    // Lift through the product split and project the sum; see products.cpp
    // for the generic projection. Here the lift is explicit: the norm factor
    // carries the shrinkage remainder and follows the base-point path, the
    // quadratic factor interpolates linearly.
    Vec yb_norm = Vec::Zero(dim), yb_quad = y_bar;  // any lift of y_bar works
    Vec z0n(dim), z0q(dim), z1n(dim), z1q(dim);
    shrink_split(Vec(x0 - y_bar), eps, z0n, z0q);
    shrink_split(Vec(x1 - y_bar), eps, z1n, z1q);
    Vec x0n = yb_norm + z0n, x0q = yb_quad + z0q;
    Vec x1n = yb_norm + z1n, x1q = yb_quad + z1q;
    SegmentPath seg;
    seg.x0 = x0;
    seg.x1 = x1;
    seg.base_y = y_bar;
    seg.interior = [yb_norm, x0q, x1q](double s) {
      Vec quad = (1.0 - s) * x0q + s * x1q;  // linear factor
      return Vec(yb_norm + quad);            // norm factor sits at its base point
    };
    return seg;
  };
  return fam;
}

CostFamily poincare_disk_family() {
  CostFamily fam;
  fam.cost.dim_x = fam.cost.dim_y = 2;
  fam.cost.name = "poincare_disk";
  fam.cost.eval = [](const Vec& x, const Vec& y) {
    double nx = x.squaredNorm(), ny = y.squaredNorm();
    if (nx >= 1.0 || ny >= 1.0) throw DomainError("poincare_disk: point outside the open disk");
    double q = 1.0 + 2.0 * (x - y).squaredNorm() / ((1.0 - nx) * (1.0 - ny));
    double d = std::acosh(q);
    return ExtReal(d * d);
  };
  fam.segment = [](const Vec& x0, const Vec& x1, const Vec& y_bar) {
    // Mobius transform sending x0 to the origin; the geodesic is then radial
    // with constant hyperbolic speed.
    std::complex<double> a(x0[0], x0[1]), b(x1[0], x1[1]);
    auto mob = [a](std::complex<double> z) { return (z - a) / (1.0 - std::conj(a) * z); };
    auto mob_inv = [a](std::complex<double> w) { return (w + a) / (1.0 + std::conj(a) * w); };
    std::complex<double> w1 = mob(b);
    double rho = std::abs(w1);
    double total = 2.0 * std::atanh(rho);  // hyperbolic length
    std::complex<double> dir = rho > 1e-15 ? w1 / rho : std::complex<double>(1.0, 0.0);
    SegmentPath seg;
    seg.x0 = x0;
    seg.x1 = x1;
    seg.base_y = y_bar;
    seg.interior = [mob_inv, dir, total](double s) {
      double r = std::tanh(0.5 * total * s);
      std::complex<double> z = mob_inv(r * dir);
      Vec p(2);
      p << z.real(), z.imag();
      return p;
    };
    return seg;
  };
  return fam;
}

CostFamily quartic_control_family() {
  CostFamily fam;
  fam.cost.dim_x = fam.cost.dim_y = 2;
  fam.cost.name = "quartic_control";
  fam.cost.eval = [](const Vec& x, const Vec& y) {
    return ExtReal(sq(sq(x[0] - y[0])) + 0.5 * sq(sq(x[1] - y[1])));
  };
  fam.segment = [](const Vec& x0, const Vec& x1, const Vec& y_bar) {
    return linear_segment(x0, x1, y_bar);
  };
  return fam;
}

QuarticWitness quartic_control_witness() {
  QuarticWitness w;
  w.x0 = Vec(2);
  w.x0 << -1.0, 0.0;
  w.x1 = Vec::Zero(2);
  w.y_bar = Vec::Zero(2);
  w.y = Vec(2);
  w.y << 1.0, 0.0;
  w.s = 0.5;
  w.expected_gap = 3.0;
  return w;
}

}  // namespace crosscurve
