#include "crosscurve/gw.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "crosscurve/json_out.hpp"
#include "crosscurve/parallel.hpp"

namespace crosscurve {

GaugedSpace::GaugedSpace(Eigen::MatrixXd g, Vec weights) : gauge(std::move(g)), w(std::move(weights)) {
  if (gauge.rows() != gauge.cols() || gauge.rows() != w.size())
    throw DomainError("GaugedSpace: gauge must be square and match the weights");
  if ((gauge - gauge.transpose()).norm() > 1e-12 * (1.0 + gauge.norm()))
    throw DomainError("GaugedSpace: gauge must be symmetric");
  for (int i = 0; i < w.size(); ++i)
    if (w[i] < -1e-12) throw DomainError("GaugedSpace: negative weight");
  if (std::abs(w.sum() - 1.0) > 1e-9) throw DomainError("GaugedSpace: weights must sum to 1");
  w = w.cwiseMax(0.0);
  w /= w.sum();
}

std::string GaugedSpace::to_json() const {
  JsonOut w_out;
  std::string rows = "[";
  for (int i = 0; i < n(); ++i) {
    if (i) rows += ",";
    rows += JsonOut::array(Vec(gauge.row(i)));
  }
  rows += "]";
  w_out.key("gauge").raw(rows);
  w_out.key("weights").raw(JsonOut::array(w));
  return w_out.object();
}

double gw_cost(const Eigen::MatrixXd& pi, const GaugedSpace& X, const GaugedSpace& Y) {
  int n = X.n(), m = Y.n();
  if (pi.rows() != n || pi.cols() != m) throw DomainError("gw_cost: plan shape mismatch");
  for (int i = 0; i < n; ++i)
    if (std::abs(pi.row(i).sum() - X.w[i]) > 1e-9)
      throw DomainError("gw_cost: row marginal violated");
  for (int j = 0; j < m; ++j)
    if (std::abs(pi.col(j).sum() - Y.w[j]) > 1e-9)
      throw DomainError("gw_cost: column marginal violated");
  double acc = 0.0;
  for (int i = 0; i < n; ++i)
    for (int ip = 0; ip < n; ++ip)
      for (int j = 0; j < m; ++j)
        for (int jp = 0; jp < m; ++jp) {
          double d = X.gauge(i, ip) - Y.gauge(j, jp);
          acc += d * d * pi(i, j) * pi(ip, jp);
        }
  return acc;
}

namespace {

// quadratic form of the objective over flattened plans: E(pi) = pi^T K pi
Eigen::MatrixXd gw_quadratic_kernel(const GaugedSpace& X, const GaugedSpace& Y) {
  int n = X.n(), m = Y.n();
  Eigen::MatrixXd k(n * m, n * m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      for (int ip = 0; ip < n; ++ip)
        for (int jp = 0; jp < m; ++jp) {
          double d = X.gauge(i, ip) - Y.gauge(j, jp);
          k(i * m + j, ip * m + jp) = d * d;
        }
  return k;
}

struct GwPolytope {
  int n, m;
  Vec mu, nu;
  std::vector<std::pair<int, int>> free_cells;  // (i, j) with i < n-1, j < m-1

  explicit GwPolytope(const GaugedSpace& X, const GaugedSpace& Y)
      : n(X.n()), m(Y.n()), mu(X.w), nu(Y.w) {
    for (int i = 0; i + 1 < n; ++i)
      for (int j = 0; j + 1 < m; ++j) free_cells.emplace_back(i, j);
  }

  // complete the dependent row/column from the free block; false if infeasible
  bool complete(const Vec& t, Eigen::MatrixXd& pi) const {
    if (!complete_affine(t, pi)) return false;
    pi = pi.cwiseMax(0.0);
    return true;
  }

  // raw affine completion without clamping; false when any cell is negative
  bool complete_affine(const Vec& t, Eigen::MatrixXd& pi) const {
    pi.setZero(n, m);
    for (std::size_t k = 0; k < free_cells.size(); ++k) {
      auto [i, j] = free_cells[k];
      pi(i, j) = t[static_cast<long>(k)];
    }
    for (int i = 0; i + 1 < n; ++i) pi(i, m - 1) = mu[i] - pi.row(i).head(m - 1).sum();
    for (int j = 0; j < m; ++j) pi(n - 1, j) = nu[j] - pi.col(j).head(n - 1).sum();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j)
        if (pi(i, j) < -1e-12) return false;
    return true;
  }
};

double eval_plan(const Eigen::MatrixXd& k, const Eigen::MatrixXd& pi) {
  Eigen::Map<const Vec> v(pi.data(), pi.size());
  // pi is stored column-major by Eigen; k is indexed row-major by (i*m+j).
  // Rebuild the flat vector in (i*m+j) order.
  Vec flat(pi.size());
  int n = static_cast<int>(pi.rows()), m = static_cast<int>(pi.cols());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) flat[i * m + j] = pi(i, j);
  return flat.dot(k * flat);
}

}  // namespace

GwResult gw_solve_tiny(const GaugedSpace& X, const GaugedSpace& Y) {
  int n = X.n(), m = Y.n();
  if ((n - 1) * (m - 1) > 4)
    throw DomainError("gw_solve_tiny: coupling polytope has more than 4 free coordinates");
  Eigen::MatrixXd kernel = gw_quadratic_kernel(X, Y);
  GwPolytope poly(X, Y);
  int d = static_cast<int>(poly.free_cells.size());

  Eigen::MatrixXd pi;
  GwResult best;
  best.value = 1e300;
  best.grid_value = 1e300;

  std::vector<Eigen::MatrixXd> descent_starts;
  if (d == 0) {
    Vec t(0);
    if (!poly.complete(t, pi)) throw SolverError("gw_solve_tiny: empty polytope");
    best.value = best.grid_value = eval_plan(kernel, pi);
    best.plan = pi;
    best.certified = true;
    return best;
  }

  // dense grid over the free coordinates (65 points per axis)
  const int res = 64;
  std::vector<double> hi(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) {
    auto [i, j] = poly.free_cells[static_cast<std::size_t>(k)];
    hi[static_cast<std::size_t>(k)] = std::min(X.w[i], Y.w[j]);
  }
  Vec t = Vec::Zero(d);
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  std::vector<std::pair<double, Eigen::MatrixXd>> top;
  for (;;) {
    for (int k = 0; k < d; ++k)
      t[k] = hi[static_cast<std::size_t>(k)] * double(idx[static_cast<std::size_t>(k)]) / res;
    if (poly.complete(t, pi)) {
      double val = eval_plan(kernel, pi);
      if (val < best.grid_value) {
        best.grid_value = val;
        best.plan = pi;
      }
      if (top.size() < 8) {
        top.emplace_back(val, pi);
        std::sort(top.begin(), top.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
      } else if (val < top.back().first) {
        top.back() = {val, pi};
        std::sort(top.begin(), top.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
      }
    }
    int k = 0;
    while (k < d && ++idx[static_cast<std::size_t>(k)] > res) {
      idx[static_cast<std::size_t>(k)] = 0;
      ++k;
    }
    if (k == d) break;
  }
  if (best.grid_value >= 1e300) throw SolverError("gw_solve_tiny: no feasible grid point");

  // exact per-coordinate quadratic descent from the leading grid points
  auto descend = [&](Eigen::MatrixXd start) {
    Eigen::MatrixXd cur = start;
    double val = eval_plan(kernel, cur);
    for (int sweep = 0; sweep < 400; ++sweep) {
      double improved = 0.0;
      for (int k = 0; k < d; ++k) {
        auto [i, j] = poly.free_cells[static_cast<std::size_t>(k)];
        // direction of the free coordinate in plan space
        // +1 at (i,j), -1 at (i,m-1), -1 at (n-1,j), +1 at (n-1,m-1)
        double dlo = -std::min({cur(i, j), cur(n - 1, m - 1)});
        double dhi = std::min({cur(i, m - 1), cur(n - 1, j)});
        if (dhi - dlo < 1e-16) continue;
        // E(cur + delta D) = E + 2 delta <K pi, D> + delta^2 D^T K D
        auto dot_with_dir = [&](const Vec& kv) {
          return kv[i * m + j] - kv[i * m + (m - 1)] - kv[(n - 1) * m + j] +
                 kv[(n - 1) * m + (m - 1)];
        };
        Vec flat(n * m);
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < m; ++b) flat[a * m + b] = cur(a, b);
        Vec kpi = kernel * flat;
        double lin = 2.0 * dot_with_dir(kpi);
        Vec dirv = Vec::Zero(n * m);
        dirv[i * m + j] += 1;
        dirv[i * m + (m - 1)] -= 1;
        dirv[(n - 1) * m + j] -= 1;
        dirv[(n - 1) * m + (m - 1)] += 1;
        double quad = dirv.dot(kernel * dirv);
        double delta;
        if (quad > 1e-14) {
          delta = std::clamp(-lin / (2.0 * quad), dlo, dhi);
        } else {
          // flat or concave along this line: best endpoint
          double at_lo = lin * dlo + quad * dlo * dlo;
          double at_hi = lin * dhi + quad * dhi * dhi;
          delta = at_lo < at_hi ? dlo : dhi;
        }
        double gain = -(lin * delta + quad * delta * delta);
        if (gain <= 1e-15 * (1.0 + std::abs(val))) continue;
        cur(i, j) += delta;
        cur(i, m - 1) -= delta;
        cur(n - 1, j) -= delta;
        cur(n - 1, m - 1) += delta;
        val -= gain;
        improved += gain;
      }
      if (improved <= 1e-14 * (1.0 + std::abs(val))) break;
    }
    return std::pair<double, Eigen::MatrixXd>(eval_plan(kernel, cur), cur);
  };

  best.value = best.grid_value;
  for (auto& [val, start] : top) {
    auto [dval, dplan] = descend(start);
    if (dval < best.value) {
      best.value = dval;
      best.plan = dplan;
    }
  }

  // Exact finisher: the objective is a quadratic in the free coordinates, so
  // the global minimum over the polytope sits at a stationary point of some
  // face. Enumerate every active set of cell constraints up to the free
  // dimension and solve its KKT system; coordinate descent alone can stall in
  // diagonal valleys of the indefinite form.
  {
    // affine model pi(t) = pi0 + sum_k t_k D_k over all nm cells
    Vec t0v = Vec::Zero(d);
    Eigen::MatrixXd pi0;
    poly.complete_affine(t0v, pi0);
    Eigen::MatrixXd cell_rows(n * m, d);       // gradient of each cell in t
    Vec cell_base(n * m);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) cell_base[i * m + j] = pi0(i, j);
    for (int k = 0; k < d; ++k) {
      auto [i, j] = poly.free_cells[static_cast<std::size_t>(k)];
      Vec col = Vec::Zero(n * m);
      col[i * m + j] += 1;
      col[i * m + (m - 1)] -= 1;
      col[(n - 1) * m + j] -= 1;
      col[(n - 1) * m + (m - 1)] += 1;
      cell_rows.col(k) = col;
    }
    // E(t) = const + g.t + 0.5 t^T H t through the flat representation
    Vec flat0 = cell_base;
    Eigen::MatrixXd dirs = cell_rows;  // nm x d, columns are the D_k flats
    Vec g = 2.0 * dirs.transpose() * (kernel * flat0);
    Eigen::MatrixXd h = 2.0 * dirs.transpose() * kernel * dirs;

    auto value_at = [&](const Vec& t) {
      Vec flat = flat0 + dirs * t;
      return flat.dot(kernel * flat);
    };
    auto feasible_at = [&](const Vec& t) {
      Vec flat = flat0 + dirs * t;
      return flat.minCoeff() >= -1e-11;
    };
    auto plan_at = [&](const Vec& t) {
      Vec flat = flat0 + dirs * t;
      Eigen::MatrixXd p(n, m);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) p(i, j) = std::max(0.0, flat[i * m + j]);
      return p;
    };

    int ncon = n * m;
    std::vector<int> subset;
    std::function<void(int, int)> enumerate = [&](int start, int remaining) {
      // stationary point of E restricted to the active-constraint face
      int a = static_cast<int>(subset.size());
      Eigen::MatrixXd kkt(d + a, d + a);
      kkt.setZero();
      kkt.topLeftCorner(d, d) = h;
      Vec rhs(d + a);
      rhs.head(d) = -g;
      for (int r = 0; r < a; ++r) {
        int cell = subset[static_cast<std::size_t>(r)];
        kkt.block(d + r, 0, 1, d) = cell_rows.row(cell);
        kkt.block(0, d + r, d, 1) = cell_rows.row(cell).transpose();
        rhs[d + r] = -cell_base[cell];
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
      if (lu.rank() == d + a) {
        Vec sol = lu.solve(rhs);
        Vec t = sol.head(d);
        if (feasible_at(t)) {
          double val = value_at(t);
          if (val < best.value - 1e-15) {
            best.value = val;
            best.plan = plan_at(t);
          }
        }
      }
      if (remaining == 0) return;
      for (int c = start; c < ncon; ++c) {
        subset.push_back(c);
        enumerate(c + 1, remaining - 1);
        subset.pop_back();
      }
    };
    enumerate(0, d);
  }

  best.certified = true;
  return best;
}

ThreePlan gw_glue(const GaugedSpace& X0, const GaugedSpace& X1, const GaugedSpace& Y,
                  const Eigen::MatrixXd& pi0, const Eigen::MatrixXd& pi1) {
  // reuse the transport glue by treating supports as index points
  auto index_measure = [](const Vec& w) {
    std::vector<Vec> pts;
    for (int i = 0; i < w.size(); ++i) pts.push_back(Vec::Constant(1, double(i)));
    return DiscreteMeasure(std::move(pts), w);
  };
  return glue(index_measure(X0.w), index_measure(X1.w), index_measure(Y.w), pi0, pi1);
}

GwSegment gw_segment(const GaugedSpace& X0, const GaugedSpace& X1, const GaugedSpace& Y,
                     const ThreePlan& gamma, double tol) {
  if (gamma.n0() != X0.n() || gamma.n1() != X1.n() || gamma.m() != Y.n())
    throw DomainError("gw_segment: 3-plan shape mismatch");
  Eigen::MatrixXd pi0 = Eigen::MatrixXd::Zero(X0.n(), Y.n());
  Eigen::MatrixXd pi1 = Eigen::MatrixXd::Zero(X1.n(), Y.n());
  for (int i = 0; i < gamma.n0(); ++i)
    for (int j = 0; j < gamma.n1(); ++j)
      for (int k = 0; k < gamma.m(); ++k) {
        pi0(i, k) += gamma.at(i, j, k);
        pi1(j, k) += gamma.at(i, j, k);
      }
  double v0 = gw_cost(pi0, X0, Y), v1 = gw_cost(pi1, X1, Y);
  double opt0 = gw_solve_tiny(X0, Y).value, opt1 = gw_solve_tiny(X1, Y).value;
  if (v0 > opt0 + tol * (1.0 + opt0) || v1 > opt1 + tol * (1.0 + opt1))
    throw OptimalityError("gw_segment: projected plans miss the certified optimum");

  GwSegment seg;
  seg.x0 = X0;
  seg.x1 = X1;
  for (int i = 0; i < gamma.n0(); ++i)
    for (int j = 0; j < gamma.n1(); ++j) {
      double mass = 0.0;
      for (int k = 0; k < gamma.m(); ++k) mass += gamma.at(i, j, k);
      if (mass > 1e-15) {
        seg.support.emplace_back(i, j);
        seg.mass.conservativeResize(seg.mass.size() + 1);
        seg.mass[seg.mass.size() - 1] = mass;
      }
    }
  int ns = static_cast<int>(seg.support.size());
  seg.f0_pull.resize(ns, ns);
  seg.f1_pull.resize(ns, ns);
  for (int a = 0; a < ns; ++a)
    for (int b = 0; b < ns; ++b) {
      seg.f0_pull(a, b) = X0.gauge(seg.support[static_cast<std::size_t>(a)].first,
                                   seg.support[static_cast<std::size_t>(b)].first);
      seg.f1_pull(a, b) = X1.gauge(seg.support[static_cast<std::size_t>(a)].second,
                                   seg.support[static_cast<std::size_t>(b)].second);
    }
  return seg;
}

GaugedSpace GwSegment::at(double s) const {
  if (s == 0.0) return x0;
  if (s == 1.0) return x1;
  return GaugedSpace((1.0 - s) * f0_pull + s * f1_pull, mass);
}

ViolationReport gw_segment_nncc_check(const GaugedSpace& X0, const GaugedSpace& X1,
                                      const GaugedSpace& Y, const GwCheckConfig& cfg) {
  auto r0 = gw_solve_tiny(X0, Y);
  auto r1 = gw_solve_tiny(X1, Y);
  ThreePlan gamma = gw_glue(X0, X1, Y, r0.plan, r1.plan);
  GwSegment seg = gw_segment(X0, X1, Y, gamma, cfg.tol);
  double t0 = r0.value, t1 = r1.value;

  // sampled two-point test spaces
  std::vector<GaugedSpace> tests;
  for (int i = 0; i < cfg.n_test_spaces; ++i) {
    Rng rng = Rng::substream(cfg.seed, static_cast<std::uint64_t>(i));
    Eigen::MatrixXd g(2, 2);
    double gap = rng.uniform(0.0, 3.0);
    g << 0.0, gap, gap, 0.0;
    double w0 = rng.uniform(0.05, 0.95);
    Vec w(2);
    w << w0, 1.0 - w0;
    tests.emplace_back(g, w);
  }
  tests.push_back(Y);

  std::vector<double> base0(tests.size()), base1(tests.size());
  parallel_for(static_cast<long>(tests.size()), [&](long i) {
    base0[static_cast<std::size_t>(i)] = gw_solve_tiny(X0, tests[static_cast<std::size_t>(i)]).value;
    base1[static_cast<std::size_t>(i)] = gw_solve_tiny(X1, tests[static_cast<std::size_t>(i)]).value;
  });

  struct Node {
    double max_gap = -1e308;
    long n = 0;
    std::optional<Witness> witness;
  };
  std::vector<Node> nodes(cfg.s_grid.size());
  parallel_for(static_cast<long>(cfg.s_grid.size()), [&](long si) {
    double s = cfg.s_grid[static_cast<std::size_t>(si)];
    Node& node = nodes[static_cast<std::size_t>(si)];
    GaugedSpace xs = seg.at(s);
    double ts_y = gw_solve_tiny(xs, Y).value;
    for (std::size_t q = 0; q < tests.size(); ++q) {
      double ts_z = gw_solve_tiny(xs, tests[q]).value;
      double lhs = ts_y - ts_z;
      double rhs = (1.0 - s) * (t0 - base0[q]) + s * (t1 - base1[q]);
      double gap = lhs - rhs;
      ++node.n;
      if (gap > node.max_gap) {
        node.max_gap = gap;
        Witness w;
        w.s = s;
        w.y = Vec::Constant(1, double(q));
        w.lhs = lhs;
        w.rhs = rhs;
        node.witness = w;
      }
    }
  });

  ViolationReport rep;
  rep.check_kind = "nncc";
  rep.tol = cfg.tol;
  rep.seed = cfg.seed;
  rep.max_gap = -1e308;
  for (const auto& node : nodes) {
    rep.n_evaluated += node.n;
    if (node.max_gap > rep.max_gap) {
      rep.max_gap = node.max_gap;
      rep.witness = node.witness;
    }
  }
  rep.passed = rep.max_gap <= rep.tol;
  return rep;
}

// ---- cone costs ---------------------------------------------------------------

namespace {

double entropy_value(EntropyKind kind, double t) {
  switch (kind) {
    case EntropyKind::KL: return t > 0 ? t * std::log(t) - t + 1.0 : (t == 0.0 ? 1.0 : 1e300);
    case EntropyKind::TotalVariation: return t >= 0 ? std::abs(t - 1.0) : 1e300;
  }
  return 1e300;
}

double recession_constant(EntropyKind kind) {
  switch (kind) {
    case EntropyKind::KL: return std::numeric_limits<double>::infinity();
    case EntropyKind::TotalVariation: return 1.0;
  }
  return 0.0;
}

}  // namespace

double cone_cost(EntropyKind f0, EntropyKind f1, double base_c, double r, double s) {
  if (r < 0 || s < 0) throw DomainError("cone_cost: radii must be nonnegative");
  auto term = [&](EntropyKind kind, double mass, double z) {
    if (mass == 0.0) return z == 0.0 ? 0.0 : recession_constant(kind) * z;
    return mass * entropy_value(kind, z / mass);
  };
  auto objective = [&](double z) { return term(f0, r, z) + term(f1, s, z) + base_c * z; };

  double at_zero = r * entropy_value(f0, 0.0) + s * entropy_value(f1, 0.0);
  if (r == 0.0 || s == 0.0) {
    // a zero radius forces z = 0 when the recession constant is infinite
    double rec = r == 0.0 ? recession_constant(f0) : recession_constant(f1);
    if (std::isinf(rec)) return at_zero;
  }

  // golden-section over z in (0, z_hi], then closed-form polish for KL pairs
  double z_hi = std::max({r, s, 1e-6}) * 4.0 + 1.0;
  double lo = 0.0, hi = z_hi;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = hi - phi * (hi - lo), b = lo + phi * (hi - lo);
  double fa = objective(a), fb = objective(b);
  for (int it = 0; it < 200; ++it) {
    if (fa < fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - phi * (hi - lo);
      fa = objective(a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + phi * (hi - lo);
      fb = objective(b);
    }
    if (hi - lo < 1e-13 * z_hi) break;
  }
  double z_best = 0.5 * (lo + hi);
  double best = std::min(objective(z_best), at_zero);

  if (f0 == EntropyKind::KL && f1 == EntropyKind::KL && r > 0 && s > 0) {
    // stationarity: log(z^2 / (r s)) + base_c = 0
    double z_star = std::sqrt(r * s) * std::exp(-0.5 * base_c);
    best = std::min(best, objective(z_star));
  }
  if (f0 == EntropyKind::TotalVariation || f1 == EntropyKind::TotalVariation) {
    // piecewise-linear in z: check the breakpoints exactly
    for (double z : {r, s}) best = std::min(best, objective(z));
  }
  return best;
}

double wfr_cone_cost(double d, double r, double s) {
  if (r < 0 || s < 0) throw DomainError("wfr_cone_cost: radii must be nonnegative");
  return r + s - 2.0 * std::sqrt(r * s) * std::cos(std::min(d, M_PI));
}

ViolationReport cone_nncc_check(ConeBase base, const ConeCheckConfig& cfg) {
  if (base == ConeBase::PsdUnitTrace)
    throw UnsupportedError("cone_nncc_check: the unit-trace PSD base is a declared placeholder");

  // cone point = (unit vector in R^3, radius); apex when radius = 0
  auto embed = [](const Vec& p) -> Vec {  // (x, r) -> sqrt(r) x
    double r = p[3];
    return std::sqrt(std::max(0.0, r)) * p.head(3);
  };
  CostSpace cone;
  cone.dim_x = cone.dim_y = 4;
  cone.name = "wfr_cone_s2";
  cone.eval = [](const Vec& a, const Vec& b) {
    double r = a[3], s = b[3];
    if (r < 0 || s < 0) throw DomainError("cone point with negative radius");
    if (r == 0.0 || s == 0.0) return ExtReal(r + s);  // apex: base coordinate immaterial
    double d = 2.0 * std::atan2((a.head(3).normalized() - b.head(3).normalized()).norm(),
                                (a.head(3).normalized() + b.head(3).normalized()).norm());
    return ExtReal(wfr_cone_cost(d, r, s));
  };

  auto unembed = [](const Vec& e) -> Vec {
    Vec p(4);
    double n = e.norm();
    if (n < 1e-300) {
      p << 1.0, 0.0, 0.0, 0.0;  // apex
    } else {
      p.head(3) = e / n;
      p[3] = n * n;
    }
    return p;
  };

  ViolationReport rep;
  rep.check_kind = "nncc";
  rep.tol = cfg.tol;
  rep.seed = cfg.seed;
  rep.max_gap = -1e308;

  for (int trial = 0; trial < cfg.n_triples; ++trial) {
    Rng rng = Rng::substream(cfg.seed, static_cast<std::uint64_t>(trial));
    auto random_cone_point = [&](bool allow_apex) {
      Vec p(4);
      p.head(3) = rng.unit_vec(3);
      double u = rng.uniform();
      p[3] = (allow_apex && u < 0.1) ? 0.0 : rng.uniform(0.0, cfg.radius_max);
      return p;
    };
    Vec x0 = random_cone_point(trial % 3 == 0);
    Vec x1 = random_cone_point(trial % 3 == 1);
    Vec yb = random_cone_point(false);

    // Hilbert segment through the embedding
    Vec e0 = embed(x0), e1 = embed(x1);
    SegmentPath seg;
    seg.x0 = x0;
    seg.x1 = x1;
    seg.base_y = yb;
    seg.interior = [e0, e1, unembed](double s) {
      return unembed(Vec((1.0 - s) * e0 + s * e1));
    };

    VerifierConfig vcfg;
    vcfg.seed = cfg.seed + static_cast<std::uint64_t>(trial) * 7919;
    vcfg.y_count = cfg.y_count;
    vcfg.tol = cfg.tol;
    vcfg.y_sampler = [radius_max = cfg.radius_max](Rng& r) {
      Vec p(4);
      p.head(3) = r.unit_vec(3);
      p[3] = r.uniform(0.0, radius_max);
      return p;
    };
    auto sub = nncc_check(seg, cone, vcfg);
    rep.n_evaluated += sub.n_evaluated;
    if (sub.max_gap > rep.max_gap) {
      rep.max_gap = sub.max_gap;
      rep.witness = sub.witness;
    }
  }
  rep.passed = rep.max_gap <= rep.tol;
  return rep;
}

// ---- Gromov-Hausdorff ----------------------------------------------------------

namespace {

struct GhSearch {
  const Eigen::MatrixXd& dx;
  const Eigen::MatrixXd& dy;
  int n, m;
  double best;
  std::vector<int> row_sets;  // chosen neighbor bitmask per placed row

  GhSearch(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
      : dx(a), dy(b), n(static_cast<int>(a.rows())), m(static_cast<int>(b.rows())), best(1e300) {}

  // distortion contribution of pairing rows (i, S) against (i2, S2)
  double pair_distortion(int i, int set_i, int i2, int set_i2) const {
    double worst = 0.0;
    for (int j = 0; j < m; ++j) {
      if (!(set_i >> j & 1)) continue;
      for (int j2 = 0; j2 < m; ++j2) {
        if (!(set_i2 >> j2 & 1)) continue;
        worst = std::max(worst, std::abs(dx(i, i2) - dy(j, j2)));
      }
    }
    return worst;
  }

  void dfs(int row, int covered, double dist_so_far) {
    if (dist_so_far >= best) return;
    if (row == n) {
      if (covered == (1 << m) - 1) best = dist_so_far;
      return;
    }
    // remaining rows must be able to cover the missing columns
    for (int set = 1; set < (1 << m); ++set) {
      double d = dist_so_far;
      for (int prev = 0; prev < row && d < best; ++prev)
        d = std::max(d, pair_distortion(prev, row_sets[static_cast<std::size_t>(prev)], row, set));
      d = std::max(d, pair_distortion(row, set, row, set));
      if (d >= best) continue;
      row_sets[static_cast<std::size_t>(row)] = set;
      dfs(row + 1, covered | set, d);
    }
  }
};

}  // namespace

double gh_distance(const Eigen::MatrixXd& dx, const Eigen::MatrixXd& dy) {
  int n = static_cast<int>(dx.rows()), m = static_cast<int>(dy.rows());
  if (n > 5 || m > 5) throw DomainError("gh_distance: sides limited to 5 points");
  if (dx.cols() != n || dy.cols() != m) throw DomainError("gh_distance: square matrices required");
  GhSearch search(dx, dy);
  search.row_sets.assign(static_cast<std::size_t>(n), 0);
  // seed the bound with the full correspondence
  {
    double d = 0.0;
    for (int i = 0; i < n; ++i)
      for (int i2 = 0; i2 < n; ++i2)
        for (int j = 0; j < m; ++j)
          for (int j2 = 0; j2 < m; ++j2) d = std::max(d, std::abs(dx(i, i2) - dy(j, j2)));
    search.best = d + 1e-15;
  }
  search.dfs(0, 0, 0.0);
  return search.best;
}

}  // namespace crosscurve
