#include "crosscurve/smooth.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "crosscurve/json_out.hpp"
#include "crosscurve/parallel.hpp"
#include "crosscurve/verifier.hpp"

namespace crosscurve {

Chart euclidean_chart(const Vec& at) {
  Chart ch;
  ch.basis = Eigen::MatrixXd::Identity(at.size(), at.size());
  ch.to_ambient = [at](const Vec& u) -> Vec { return at + u; };
  return ch;
}

ChartFactory euclidean_charts() {
  return [](const Vec& at) { return euclidean_chart(at); };
}

ChartFactory sphere_charts() {
  return [](const Vec& at) {
    int n = static_cast<int>(at.size());
    // complete the point to an orthonormal frame; tangent basis = frame tail
    Eigen::MatrixXd m(n, n);
    m.col(0) = at.normalized();
    int filled = 1;
    for (int e = 0; e < n && filled < n; ++e) {
      Vec cand = Vec::Unit(n, e);
      for (int c = 0; c < filled; ++c) cand -= cand.dot(m.col(c)) * m.col(c);
      double nor = cand.norm();
      if (nor > 1e-8) m.col(filled++) = cand / nor;
    }
    Chart ch;
    ch.basis = m.rightCols(n - 1);
    Vec center = at.normalized();
    Eigen::MatrixXd basis = ch.basis;
    ch.to_ambient = [center, basis](const Vec& u) -> Vec {
      Vec p = center + basis * u;
      return p / p.norm();
    };
    return ch;
  };
}

SmoothCost make_smooth(const CostSpace& cost) {
  SmoothCost sc;
  sc.cost = cost;
  return sc;
}

namespace {

double eval_chart(const SmoothCost& c, const Chart& cx, const Chart& cy, const Vec& u,
                  const Vec& v) {
  Vec px = cx.to_ambient(u);
  Vec py = cy.to_ambient(v);
  if (!c.pair_in_domain(px, py))
    throw DomainError(c.cost.name + ": finite-difference stencil leaves the smooth domain");
  ExtReal val = c.cost(px, py);
  if (!val.finite())
    throw DomainError(c.cost.name + ": non-finite cost inside a finite-difference stencil");
  return val.value();
}

constexpr double kSecondDiffWeights[3] = {1.0, -2.0, 1.0};

}  // namespace

Vec grad_y_in_chart(const SmoothCost& c, const Vec& x, const Vec& y, const Chart& cy) {
  if (!c.smooth) throw UnsupportedError(c.cost.name + ": cost not declared smooth");
  Chart cx = euclidean_chart(x);  // x stays fixed; only v varies
  (void)y;
  int ky = cy.dim();
  Vec g(ky);
  Vec zero = Vec::Zero(x.size());
  double h = c.h1;
  for (int j = 0; j < ky; ++j) {
    Vec vp = Vec::Zero(ky), vm = Vec::Zero(ky);
    vp[j] = h;
    vm[j] = -h;
    g[j] = (eval_chart(c, cx, cy, zero, vp) - eval_chart(c, cx, cy, zero, vm)) / (2.0 * h);
  }
  return g;
}

Eigen::MatrixXd mixed_hessian_in_charts(const SmoothCost& c, const Vec& x, const Vec& y,
                                        const Chart& cx, const Chart& cy, double h) {
  if (!c.smooth) throw UnsupportedError(c.cost.name + ": cost not declared smooth");
  (void)x;
  (void)y;
  int kx = cx.dim(), ky = cy.dim();
  Eigen::MatrixXd m(kx, ky);
  for (int i = 0; i < kx; ++i) {
    Vec up = Vec::Zero(kx), um = Vec::Zero(kx);
    up[i] = h;
    um[i] = -h;
    for (int j = 0; j < ky; ++j) {
      Vec vp = Vec::Zero(ky), vm = Vec::Zero(ky);
      vp[j] = h;
      vm[j] = -h;
      m(i, j) = (eval_chart(c, cx, cy, up, vp) - eval_chart(c, cx, cy, up, vm) -
                 eval_chart(c, cx, cy, um, vp) + eval_chart(c, cx, cy, um, vm)) /
                (4.0 * h * h);
    }
  }
  return m;
}

namespace {

void require_well_conditioned(const Eigen::MatrixXd& m, const std::string& what) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  double smax = svd.singularValues()(0);
  double smin = svd.singularValues()(svd.singularValues().size() - 1);
  if (!(smin > 0.0) || smax / smin > 1e8)
    throw DegeneracyError(what + ": mixed Hessian singular or ill-conditioned");
}

}  // namespace

Eigen::MatrixXd mixed_hessian(const SmoothCost& c, const Vec& x, const Vec& y) {
  Chart cx = c.chart_x(x);
  Chart cy = c.chart_y(y);
  Eigen::MatrixXd m = mixed_hessian_in_charts(c, x, y, cx, cy, c.h2);
  require_well_conditioned(m, c.cost.name);
  return m;
}

MtwSample mtw_tensor(const SmoothCost& c, const Vec& x, const Vec& y, const Vec& xi,
                     const Vec& eta) {
  if (std::abs(xi.norm() - 1.0) > 1e-9 || std::abs(eta.norm() - 1.0) > 1e-9)
    throw PreconditionError("mtw_tensor: directions must be unit vectors");
  return mtw_tensor_any(c, x, y, xi, eta);
}

MtwSample mtw_tensor_any(const SmoothCost& c, const Vec& x, const Vec& y, const Vec& xi,
                         const Vec& eta) {
  Chart cx = c.chart_x(x);
  Chart cy = c.chart_y(y);
  int kx = cx.dim(), ky = cy.dim();
  Vec xiu = cx.coords_of_direction(xi);
  Vec etau = cy.coords_of_direction(eta);

  Eigen::MatrixXd m = mixed_hessian_in_charts(c, x, y, cx, cy, c.h2);
  require_well_conditioned(m, c.cost.name);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);

  // a_m = c_{ikm} xi^i xi^k: second difference along xi of each y_m partial
  double h3 = c.h3;
  Vec a = Vec::Zero(ky);
  for (int t = 0; t < 3; ++t) {
    Vec u = double(t - 1) * h3 * xiu;
    for (int mc = 0; mc < ky; ++mc) {
      Vec vp = Vec::Zero(ky), vm = Vec::Zero(ky);
      vp[mc] = h3;
      vm[mc] = -h3;
      double dv = (eval_chart(c, cx, cy, u, vp) - eval_chart(c, cx, cy, u, vm)) / (2.0 * h3);
      a[mc] += kSecondDiffWeights[t] * dv / (h3 * h3);
    }
  }

  // b_r = c_{rjl} eta^j eta^l
  Vec b = Vec::Zero(kx);
  for (int t = 0; t < 3; ++t) {
    Vec v = double(t - 1) * h3 * etau;
    for (int rc = 0; rc < kx; ++rc) {
      Vec up = Vec::Zero(kx), um = Vec::Zero(kx);
      up[rc] = h3;
      um[rc] = -h3;
      double du = (eval_chart(c, cx, cy, up, v) - eval_chart(c, cx, cy, um, v)) / (2.0 * h3);
      b[rc] += kSecondDiffWeights[t] * du / (h3 * h3);
    }
  }

  // c_{ijkl} xi eta xi eta: product of second differences along xi and eta
  double h4 = c.h4;
  double d4 = 0.0;
  for (int ti = 0; ti < 3; ++ti)
    for (int tj = 0; tj < 3; ++tj) {
      Vec u = double(ti - 1) * h4 * xiu;
      Vec v = double(tj - 1) * h4 * etau;
      d4 += kSecondDiffWeights[ti] * kSecondDiffWeights[tj] * eval_chart(c, cx, cy, u, v);
    }
  d4 /= (h4 * h4) * (h4 * h4);

  MtwSample sample;
  sample.x = x;
  sample.y = y;
  sample.xi = xi;
  sample.eta = eta;
  sample.A = xiu.dot(m * etau);
  sample.S = a.dot(lu.solve(b)) - d4;
  return sample;
}

namespace {

Vec orthogonal_eta(const Eigen::MatrixXd& m, const Vec& xiu, int ky, Rng& rng) {
  // random unit chart direction with (M^T xi) . eta = 0
  Vec w = m.transpose() * xiu;
  for (int attempt = 0; attempt < 32; ++attempt) {
    Vec cand = rng.normal_vec(ky);
    double wn2 = w.squaredNorm();
    if (wn2 > 1e-18) cand -= (cand.dot(w) / wn2) * w;
    double n = cand.norm();
    if (n > 1e-9) return cand / n;
  }
  throw DegeneracyError("nncc_scan: could not build an orthogonal direction");
}

}  // namespace

ScanSummary nncc_scan(const SmoothCost& c, const ScanRegion& region, int n_samples,
                      std::uint64_t seed) {
  struct Node {
    bool ok = false;
    bool orthogonal = false;
    MtwSample sample;
  };
  std::vector<Node> nodes(static_cast<std::size_t>(n_samples));
  parallel_for(n_samples, [&](long i) {
    Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(i));
    Node& node = nodes[static_cast<std::size_t>(i)];
    Vec x, y;
    region.sample_pair(rng, x, y);
    Chart cx = c.chart_x(x);
    Chart cy = c.chart_y(y);
    Vec xiu = rng.unit_vec(cx.dim());
    node.orthogonal = (i % 2 == 1) && cy.dim() >= 2;
    Vec etau;
    if (node.orthogonal) {
      Eigen::MatrixXd m = mixed_hessian_in_charts(c, x, y, cx, cy, c.h2);
      etau = orthogonal_eta(m, xiu, cy.dim(), rng);
    } else {
      etau = rng.unit_vec(cy.dim());
    }
    Vec xi = (cx.basis * xiu).normalized();
    Vec eta = (cy.basis * etau).normalized();
    node.sample = mtw_tensor(c, x, y, xi, eta);
    node.ok = true;
  });

  ScanSummary sum;
  sum.seed = seed;
  sum.min_S = 1e300;
  sum.min_S_orthogonal = 1e300;
  for (const auto& node : nodes) {
    if (!node.ok) continue;
    ++sum.n_samples;
    if (node.sample.S < sum.min_S) {
      sum.min_S = node.sample.S;
      sum.worst = node.sample;
    }
    if (node.orthogonal && node.sample.S < sum.min_S_orthogonal) {
      sum.min_S_orthogonal = node.sample.S;
      sum.worst_orthogonal = node.sample;
    }
  }
  if (sum.min_S >= -sum.fd_tol)
    sum.classification = "nncc-consistent";
  else if (sum.min_S_orthogonal >= -sum.fd_tol)
    sum.classification = "mtw-only-consistent";
  else
    sum.classification = "neither";
  return sum;
}

std::string ScanSummary::to_json() const {
  auto sample_json = [](const MtwSample& s) {
    JsonOut w;
    w.key("x").raw(JsonOut::array(s.x));
    w.key("y").raw(JsonOut::array(s.y));
    w.key("xi").raw(JsonOut::array(s.xi));
    w.key("eta").raw(JsonOut::array(s.eta));
    w.key("S").num(s.S);
    w.key("A").num(s.A);
    return w.object();
  };
  JsonOut w;
  w.key("schema").integer(1);
  w.key("classification").str(classification);
  w.key("min_S").num(min_S);
  w.key("min_S_orthogonal").num(min_S_orthogonal);
  w.key("fd_tol").num(fd_tol);
  w.key("witness").raw(sample_json(worst));
  w.key("witness_orthogonal").raw(sample_json(worst_orthogonal));
  w.key("n_samples").integer(n_samples);
  w.key("seed").integer(static_cast<long long>(seed));
  return w.object();
}

namespace {

struct CsegSolver {
  SmoothCost c;
  Vec x0, x1, y_bar;
  Chart cy;  // fixed chart at the base point
  Vec q0, q1;

  Vec target(double s) const { return (1.0 - s) * q0 + s * q1; }

  Vec solve_from(Vec guess, double s, int max_iter = 60) const {
    Vec q = target(s);
    double qscale = 1.0 + q.norm();
    Vec x = guess;
    double res = (grad_y_in_chart(c, x, y_bar, cy) - q).norm();
    for (int it = 0; it < max_iter; ++it) {
      if (res <= 1e-10 * qscale) return x;
      Chart cx = c.chart_x(x);
      Eigen::MatrixXd m = mixed_hessian_in_charts(c, x, y_bar, cx, cy, c.h2);
      Vec f = grad_y_in_chart(c, x, y_bar, cy) - q;
      // F_j(u) has Jacobian M^T (rows over y-coords, cols over x-coords)
      Vec du = Eigen::MatrixXd(m.transpose()).partialPivLu().solve(Vec(-f));
      double t = 1.0;
      bool moved = false;
      for (int bt = 0; bt < 30; ++bt) {
        try {
          Vec cand = cx.to_ambient(Vec(t * du));
          double cres = (grad_y_in_chart(c, cand, y_bar, cy) - q).norm();
          if (cres < res) {
            x = cand;
            res = cres;
            moved = true;
            break;
          }
        } catch (const Error&) {
          // stencil left the domain; shrink the step
        }
        t *= 0.5;
      }
      if (!moved) break;
    }
    if (res <= 1e-10 * qscale) return x;
    throw SolverError("c_segment_solve: Newton residual " + std::to_string(res));
  }
};

}  // namespace

SegmentPath c_segment_solve(const SmoothCost& c, const Vec& x0, const Vec& x1, const Vec& y_bar,
                            const std::vector<double>& s_grid_in) {
  if (!c.smooth) throw UnsupportedError(c.cost.name + ": cost not declared smooth");
  std::vector<double> grid = s_grid_in.empty() ? equispaced_grid(65) : s_grid_in;

  auto solver = std::make_shared<CsegSolver>();
  solver->c = c;
  solver->x0 = x0;
  solver->x1 = x1;
  solver->y_bar = y_bar;
  solver->cy = c.chart_y(y_bar);
  solver->q0 = grad_y_in_chart(c, x0, y_bar, solver->cy);
  solver->q1 = grad_y_in_chart(c, x1, y_bar, solver->cy);

  // continuation along the grid; bisect the step on Newton failure
  auto nodes = std::make_shared<std::vector<std::pair<double, Vec>>>();
  nodes->push_back({0.0, x0});
  Vec cur = x0;
  double last_good = 0.0;
  for (double s : grid) {
    if (s <= 0.0) continue;
    double reached = last_good;
    int depth = 0;
    double step = s - reached;
    while (reached < s) {
      double next = std::min(s, reached + step);
      try {
        cur = solver->solve_from(cur, next);
        reached = next;
      } catch (const SolverError&) {
        ++depth;
        if (depth > 6)
          throw ContinuationError("c_segment_solve: continuation stalled after s = " +
                                  std::to_string(last_good));
        step *= 0.5;
      }
    }
    last_good = s;
    nodes->push_back({s, cur});
  }

  SegmentPath seg;
  seg.x0 = x0;
  seg.x1 = x1;
  seg.base_y = y_bar;
  seg.interior = [solver, nodes](double s) -> Vec {
    const auto& ns = *nodes;
    std::size_t best = 0;
    double bestd = 1e300;
    for (std::size_t i = 0; i < ns.size(); ++i) {
      double d = std::abs(ns[i].first - s);
      if (d < bestd) {
        bestd = d;
        best = i;
      }
    }
    if (bestd <= 1e-15) return ns[best].second;
    return solver->solve_from(ns[best].second, s);
  };
  return seg;
}

CsegResidualReport auto_csegment_check(const SegmentPath& seg, const SmoothCost& c,
                                       const std::vector<double>& s_grid_in) {
  if (!c.smooth)
    throw UnsupportedError(c.cost.name + ": auto c-segment check requires a smooth cost");
  std::vector<double> grid = s_grid_in.empty() ? equispaced_grid(33) : s_grid_in;
  Chart cy = c.chart_y(seg.base_y);
  Vec q0 = grad_y_in_chart(c, seg.x0, seg.base_y, cy);
  Vec q1 = grad_y_in_chart(c, seg.x1, seg.base_y, cy);
  CsegResidualReport rep;
  for (double s : grid) {
    Vec q = (1.0 - s) * q0 + s * q1;
    Vec g = grad_y_in_chart(c, seg.at(s), seg.base_y, cy);
    double r = (g - q).norm();
    ++rep.n_nodes;
    if (r > rep.max_residual) {
      rep.max_residual = r;
      rep.argmax_s = s;
    }
  }
  return rep;
}

}  // namespace crosscurve
