#include "crosscurve/transport.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <memory>
#include <limits>
#include <map>

#include "crosscurve/json_out.hpp"
#include "crosscurve/parallel.hpp"

namespace crosscurve {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<Vec> merge_support(std::vector<Vec> pts, Vec& w) {
  std::vector<Vec> out;
  std::vector<double> ow;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool merged = false;
    for (std::size_t j = 0; j < out.size(); ++j) {
      if ((pts[i] - out[j]).lpNorm<Eigen::Infinity>() <= 1e-12) {
        ow[j] += w[static_cast<long>(i)];
        merged = true;
        break;
      }
    }
    if (!merged) {
      out.push_back(pts[i]);
      ow.push_back(w[static_cast<long>(i)]);
    }
  }
  w = Eigen::Map<Vec>(ow.data(), static_cast<long>(ow.size()));
  return out;
}

}  // namespace

DiscreteMeasure::DiscreteMeasure(std::vector<Vec> pts, Vec weights) {
  if (pts.size() != static_cast<std::size_t>(weights.size()))
    throw DomainError("DiscreteMeasure: point/weight count mismatch");
  for (int i = 0; i < weights.size(); ++i)
    if (weights[i] < -1e-12) throw DomainError("DiscreteMeasure: negative weight");
  double sum = weights.sum();
  if (std::abs(sum - 1.0) > 1e-9) throw DomainError("DiscreteMeasure: weights must sum to 1");
  Vec w2 = weights.cwiseMax(0.0);
  points = merge_support(std::move(pts), w2);
  w = w2 / w2.sum();
}

DiscreteMeasure random_measure(int n_atoms, const Vec& lo, const Vec& hi, std::uint64_t seed) {
  if (n_atoms < 1) throw DomainError("random_measure: n_atoms >= 1");
  Rng rng(seed);
  std::vector<Vec> pts;
  pts.reserve(static_cast<std::size_t>(n_atoms));
  for (int i = 0; i < n_atoms; ++i) pts.push_back(rng.box_vec(lo, hi));
  Vec w = rng.dirichlet(n_atoms);
  return DiscreteMeasure(std::move(pts), w);
}

// ---- transportation simplex --------------------------------------------------

namespace {

struct Simplex {
  int n, m;
  const Eigen::MatrixXd& c;
  Eigen::MatrixXd flow;
  std::vector<std::vector<char>> basic;
  long iterations = 0;

  Simplex(const Eigen::MatrixXd& cost, const Vec& mu, const Vec& nu)
      : n(static_cast<int>(mu.size())),
        m(static_cast<int>(nu.size())),
        c(cost),
        flow(Eigen::MatrixXd::Zero(n, m)),
        basic(static_cast<std::size_t>(n), std::vector<char>(static_cast<std::size_t>(m), 0)) {
    // northwest-corner start: always a spanning-tree basis (with degenerate zeros)
    Vec row = mu, col = nu;
    int i = 0, j = 0;
    for (;;) {
      double q = std::min(row[i], col[j]);
      flow(i, j) = q;
      basic[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = 1;
      row[i] -= q;
      col[j] -= q;
      bool can_down = i < n - 1, can_right = j < m - 1;
      if (!can_down && !can_right) break;
      if (can_down && (row[i] <= col[j] || !can_right)) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  // duals from the basis tree (u[0] = 0)
  void compute_duals(Vec& u, Vec& v) const {
    u = Vec::Constant(n, std::numeric_limits<double>::quiet_NaN());
    v = Vec::Constant(m, std::numeric_limits<double>::quiet_NaN());
    std::deque<int> queue;  // rows are 0..n-1, columns n..n+m-1
    u[0] = 0.0;
    queue.push_back(0);
    while (!queue.empty()) {
      int node = queue.front();
      queue.pop_front();
      if (node < n) {
        for (int j = 0; j < m; ++j)
          if (basic[static_cast<std::size_t>(node)][static_cast<std::size_t>(j)] &&
              std::isnan(v[j])) {
            v[j] = c(node, j) - u[node];
            queue.push_back(n + j);
          }
      } else {
        int j = node - n;
        for (int i = 0; i < n; ++i)
          if (basic[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] && std::isnan(u[i])) {
            u[i] = c(i, j) - v[j];
            queue.push_back(i);
          }
      }
    }
    for (int i = 0; i < n; ++i)
      if (std::isnan(u[i])) throw SolverError("ot_solve: disconnected basis tree");
    for (int j = 0; j < m; ++j)
      if (std::isnan(v[j])) throw SolverError("ot_solve: disconnected basis tree");
  }

  // cycle of the entering cell through the basis tree
  std::vector<std::pair<int, int>> find_cycle(int ei, int ej) const {
    // path from row ei to column ej inside the tree
    std::vector<int> parent(static_cast<std::size_t>(n + m), -1);
    std::vector<char> seen(static_cast<std::size_t>(n + m), 0);
    std::deque<int> queue;
    seen[static_cast<std::size_t>(ei)] = 1;
    queue.push_back(ei);
    while (!queue.empty()) {
      int node = queue.front();
      queue.pop_front();
      if (node == n + ej) break;
      if (node < n) {
        for (int j = 0; j < m; ++j)
          if (basic[static_cast<std::size_t>(node)][static_cast<std::size_t>(j)] &&
              !seen[static_cast<std::size_t>(n + j)]) {
            seen[static_cast<std::size_t>(n + j)] = 1;
            parent[static_cast<std::size_t>(n + j)] = node;
            queue.push_back(n + j);
          }
      } else {
        int j = node - n;
        for (int i = 0; i < n; ++i)
          if (basic[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] &&
              !seen[static_cast<std::size_t>(i)]) {
            seen[static_cast<std::size_t>(i)] = 1;
            parent[static_cast<std::size_t>(i)] = node;
            queue.push_back(i);
          }
      }
    }
    if (!seen[static_cast<std::size_t>(n + ej)])
      throw SolverError("ot_solve: entering cell closes no cycle");
    std::vector<int> path;  // nodes from ej-column back to ei-row
    for (int node = n + ej; node != -1; node = parent[static_cast<std::size_t>(node)])
      path.push_back(node);
    std::reverse(path.begin(), path.end());  // starts at ei, ends at n+ej
    std::vector<std::pair<int, int>> cells;
    cells.emplace_back(ei, ej);  // entering cell gains flow
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      int a = path[k], b = path[k + 1];
      int i = a < n ? a : b;
      int j = a < n ? b - n : a - n;
      cells.emplace_back(i, j);
    }
    return cells;  // alternate +,-,+,- starting from the entering cell
  }

  void pivot(int ei, int ej) {
    auto cells = find_cycle(ei, ej);
    double theta = kInf;
    int leave = -1;
    for (std::size_t k = 1; k < cells.size(); k += 2) {
      double f = flow(cells[k].first, cells[k].second);
      if (f < theta - 1e-15) {
        theta = f;
        leave = static_cast<int>(k);
      } else if (f <= theta + 1e-15 && leave >= 0) {
        // Bland tie-break: smallest flat index leaves
        auto& cand = cells[k];
        auto& cur = cells[static_cast<std::size_t>(leave)];
        if (cand.first * m + cand.second < cur.first * m + cur.second) leave = static_cast<int>(k);
      }
    }
    if (leave < 0) throw SolverError("ot_solve: unbounded pivot");
    for (std::size_t k = 0; k < cells.size(); ++k) {
      double sign = (k % 2 == 0) ? 1.0 : -1.0;
      flow(cells[k].first, cells[k].second) += sign * theta;
    }
    auto [li, lj] = cells[static_cast<std::size_t>(leave)];
    flow(li, lj) = 0.0;
    basic[static_cast<std::size_t>(li)][static_cast<std::size_t>(lj)] = 0;
    basic[static_cast<std::size_t>(ei)][static_cast<std::size_t>(ej)] = 1;
  }

  void run(double scale) {
    const long cap = 50000 + 200L * n * m;
    Vec u, v;
    for (;;) {
      if (++iterations > cap) throw SolverError("ot_solve: iteration cap hit (cycling guard)");
      compute_duals(u, v);
      int ei = -1, ej = -1;
      for (int i = 0; i < n && ei < 0; ++i)
        for (int j = 0; j < m; ++j) {
          if (basic[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) continue;
          if (c(i, j) - u[i] - v[j] < -1e-12 * scale) {  // Bland: first improving cell
            ei = i;
            ej = j;
            break;
          }
        }
      if (ei < 0) return;
      pivot(ei, ej);
    }
  }
};

// real-capacity max-flow feasibility pass over the finite-cost cells
bool finite_plan_exists(const Eigen::MatrixXd& cost, const Vec& mu, const Vec& nu) {
  int n = static_cast<int>(mu.size()), m = static_cast<int>(nu.size());
  // nodes: 0 = source, 1..n rows, n+1..n+m cols, n+m+1 = sink
  int nodes = n + m + 2, src = 0, snk = n + m + 1;
  Eigen::MatrixXd cap = Eigen::MatrixXd::Zero(nodes, nodes);
  for (int i = 0; i < n; ++i) cap(src, 1 + i) = mu[i];
  for (int j = 0; j < m; ++j) cap(n + 1 + j, snk) = nu[j];
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      if (std::isfinite(cost(i, j))) cap(1 + i, n + 1 + j) = 2.0;
  double flow_total = 0.0;
  for (;;) {
    std::vector<int> parent(static_cast<std::size_t>(nodes), -1);
    parent[static_cast<std::size_t>(src)] = src;
    std::deque<int> queue{src};
    while (!queue.empty() && parent[static_cast<std::size_t>(snk)] < 0) {
      int a = queue.front();
      queue.pop_front();
      for (int b = 0; b < nodes; ++b)
        if (parent[static_cast<std::size_t>(b)] < 0 && cap(a, b) > 1e-12) {
          parent[static_cast<std::size_t>(b)] = a;
          queue.push_back(b);
        }
    }
    if (parent[static_cast<std::size_t>(snk)] < 0) break;
    double aug = kInf;
    for (int b = snk; b != src; b = parent[static_cast<std::size_t>(b)])
      aug = std::min(aug, cap(parent[static_cast<std::size_t>(b)], b));
    for (int b = snk; b != src; b = parent[static_cast<std::size_t>(b)]) {
      cap(parent[static_cast<std::size_t>(b)], b) -= aug;
      cap(b, parent[static_cast<std::size_t>(b)]) += aug;
    }
    flow_total += aug;
  }
  return flow_total >= 1.0 - 1e-9;
}

}  // namespace

OtResult ot_solve(const Eigen::MatrixXd& cost, const Vec& mu, const Vec& nu) {
  int n = static_cast<int>(mu.size()), m = static_cast<int>(nu.size());
  if (cost.rows() != n || cost.cols() != m) throw DomainError("ot_solve: shape mismatch");
  if (std::abs(mu.sum() - nu.sum()) > 1e-10)
    throw DomainError("ot_solve: marginals carry different total mass");

  double cmax = 0.0;
  bool has_inf = false;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      if (std::isinf(cost(i, j))) {
        has_inf = true;
      } else {
        cmax = std::max(cmax, std::abs(cost(i, j)));
      }
    }
  Eigen::MatrixXd work = cost;
  double big = 0.0;
  if (has_inf) {
    if (!finite_plan_exists(cost, mu, nu))
      throw InfeasibleError("ot_solve: +inf entries block every plan");
    big = (1.0 + cmax) * 1e8;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j)
        if (std::isinf(work(i, j))) work(i, j) = big;
  }

  Simplex sx(work, mu, nu);
  sx.run(1.0 + cmax);
  Vec u, v;
  sx.compute_duals(u, v);

  double min_rc = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      if (std::isfinite(cost(i, j))) min_rc = std::min(min_rc, cost(i, j) - u[i] - v[j]);

  OtResult res;
  res.plan = sx.flow;
  res.dual_u = u;
  res.dual_v = v;
  res.min_reduced_cost = min_rc;
  res.iterations = sx.iterations;
  res.value = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      if (sx.flow(i, j) <= 0.0) continue;
      if (std::isinf(cost(i, j))) {
        if (sx.flow(i, j) > 1e-9)
          throw InfeasibleError("ot_solve: optimal plan forced onto an infinite cell");
        continue;  // degenerate zero-mass remnant on a big-M cell
      }
      res.value += sx.flow(i, j) * cost(i, j);
    }
  return res;
}

Eigen::MatrixXd cost_matrix(const CostSpace& c, const DiscreteMeasure& mu,
                            const DiscreteMeasure& nu) {
  Eigen::MatrixXd m(mu.size(), nu.size());
  for (int i = 0; i < mu.size(); ++i)
    for (int j = 0; j < nu.size(); ++j) {
      ExtReal v = c(mu.points[static_cast<std::size_t>(i)], nu.points[static_cast<std::size_t>(j)]);
      if (v.is_neg_inf()) throw DomainError("cost_matrix: -inf ground cost unsupported");
      m(i, j) = v.finite() ? v.value() : kInf;
    }
  return m;
}

double ot_value(const CostSpace& c, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  return ot_solve(cost_matrix(c, mu, nu), mu.w, nu.w).value;
}

// ---- gluing and lifts --------------------------------------------------------

double& ThreePlan::at(int i, int j, int k) {
  return gamma[static_cast<std::size_t>((i * n1() + j) * m() + k)];
}
double ThreePlan::at(int i, int j, int k) const {
  return gamma[static_cast<std::size_t>((i * n1() + j) * m() + k)];
}

ThreePlan glue(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1, const DiscreteMeasure& nu,
               const Eigen::MatrixXd& pi0, const Eigen::MatrixXd& pi1) {
  int n0 = mu0.size(), n1 = mu1.size(), m = nu.size();
  if (pi0.rows() != n0 || pi0.cols() != m || pi1.rows() != n1 || pi1.cols() != m)
    throw DomainError("glue: plan shapes do not match the measures");
  for (int k = 0; k < m; ++k) {
    double col0 = pi0.col(k).sum(), col1 = pi1.col(k).sum();
    if (std::abs(col0 - nu.w[k]) > 1e-10 || std::abs(col1 - nu.w[k]) > 1e-10)
      throw DomainError("glue: plans do not share the second marginal");
  }
  ThreePlan g;
  g.x0_pts = mu0.points;
  g.x1_pts = mu1.points;
  g.y_pts = nu.points;
  g.gamma.assign(static_cast<std::size_t>(n0) * n1 * m, 0.0);
  for (int k = 0; k < m; ++k) {
    if (nu.w[k] <= 0.0) continue;
    for (int i = 0; i < n0; ++i)
      for (int j = 0; j < n1; ++j) g.at(i, j, k) = pi0(i, k) * pi1(j, k) / nu.w[k];
  }
  return g;
}

LiftedSegment lifted_segment(const CostSpace& c, const DiscreteMeasure& mu0,
                             const DiscreteMeasure& mu1, const DiscreteMeasure& nu,
                             const ThreePlan& gamma, const TripleSegmentBuilder& builder,
                             double tol) {
  // endpoint plans projected out of the 3-plan must be ot-optimal
  Eigen::MatrixXd pi0 = Eigen::MatrixXd::Zero(gamma.n0(), gamma.m());
  Eigen::MatrixXd pi1 = Eigen::MatrixXd::Zero(gamma.n1(), gamma.m());
  for (int i = 0; i < gamma.n0(); ++i)
    for (int j = 0; j < gamma.n1(); ++j)
      for (int k = 0; k < gamma.m(); ++k) {
        pi0(i, k) += gamma.at(i, j, k);
        pi1(j, k) += gamma.at(i, j, k);
      }
  Eigen::MatrixXd c0 = cost_matrix(c, mu0, nu);
  Eigen::MatrixXd c1 = cost_matrix(c, mu1, nu);
  double plan0_cost = (pi0.array() * c0.array()).sum();
  double plan1_cost = (pi1.array() * c1.array()).sum();
  double opt0 = ot_solve(c0, mu0.w, nu.w).value;
  double opt1 = ot_solve(c1, mu1.w, nu.w).value;
  if (plan0_cost > opt0 + tol * (1.0 + std::abs(opt0)) ||
      plan1_cost > opt1 + tol * (1.0 + std::abs(opt1)))
    throw OptimalityError("lifted_segment: endpoint plans are not optimal, duality gap " +
                          std::to_string(std::max(plan0_cost - opt0, plan1_cost - opt1)));

  // per-triple variational segments on the charged triples
  struct Strand {
    SegmentPath path;
    Vec y;
    double mass;
  };
  auto strands = std::make_shared<std::vector<Strand>>();
  for (int i = 0; i < gamma.n0(); ++i)
    for (int j = 0; j < gamma.n1(); ++j)
      for (int k = 0; k < gamma.m(); ++k) {
        double g = gamma.at(i, j, k);
        if (g <= 1e-15) continue;
        Strand s;
        s.path = builder(gamma.x0_pts[static_cast<std::size_t>(i)],
                         gamma.x1_pts[static_cast<std::size_t>(j)],
                         gamma.y_pts[static_cast<std::size_t>(k)]);
        s.y = gamma.y_pts[static_cast<std::size_t>(k)];
        s.mass = g;
        strands->push_back(std::move(s));
      }

  LiftedSegment out;
  out.mu0 = mu0;
  out.mu1 = mu1;
  out.nu = nu;
  out.measure_at = [strands](double s) {
    std::vector<Vec> pts;
    Vec w(static_cast<long>(strands->size()));
    long idx = 0;
    for (const auto& st : *strands) {
      pts.push_back(st.path.at(s));
      w[idx++] = st.mass;
    }
    return DiscreteMeasure(std::move(pts), w);  // merges coincident images
  };
  CostSpace cost = c;
  out.plan_cost_at = [strands, cost](double s) {
    double acc = 0.0;
    for (const auto& st : *strands) {
      ExtReal v = cost(st.path.at(s), st.y);
      if (!v.finite()) throw SegmentInvalidError("lifted plan cost non-finite");
      acc += st.mass * v.value();
    }
    return acc;
  };
  return out;
}

WassersteinReport wasserstein_nncc_check(const CostSpace& c, const DiscreteMeasure& mu0,
                                         const DiscreteMeasure& mu1, const DiscreteMeasure& nu,
                                         const TripleSegmentBuilder& builder,
                                         const WassersteinCheckConfig& cfg) {
  Eigen::MatrixXd c0m = cost_matrix(c, mu0, nu);
  Eigen::MatrixXd c1m = cost_matrix(c, mu1, nu);
  auto r0 = ot_solve(c0m, mu0.w, nu.w);
  auto r1 = ot_solve(c1m, mu1.w, nu.w);

  WassersteinReport rep = wasserstein_sweep(c, mu0, mu1, nu,
                                            glue(mu0, mu1, nu, r0.plan, r1.plan), builder, cfg,
                                            r0.value, r1.value);
  if (rep.chord.passed || !cfg.search_glues) return rep;

  // alternative glues: tie-break the endpoint solves with tiny deterministic
  // perturbations so degenerate optima land on different vertices
  for (int attempt = 0; attempt < cfg.glue_retries; ++attempt) {
    Rng prng = Rng::substream(cfg.seed ^ 0xabcdefULL, static_cast<std::uint64_t>(attempt));
    double eps = 1e-11 * (1.0 + std::abs(r0.value) + std::abs(r1.value));
    Eigen::MatrixXd p0 = c0m, p1 = c1m;
    for (int i = 0; i < p0.rows(); ++i)
      for (int j = 0; j < p0.cols(); ++j) p0(i, j) += eps * prng.uniform();
    for (int i = 0; i < p1.rows(); ++i)
      for (int j = 0; j < p1.cols(); ++j) p1(i, j) += eps * prng.uniform();
    auto a0 = ot_solve(p0, mu0.w, nu.w);
    auto a1 = ot_solve(p1, mu1.w, nu.w);
    WassersteinReport alt = wasserstein_sweep(c, mu0, mu1, nu,
                                              glue(mu0, mu1, nu, a0.plan, a1.plan), builder, cfg,
                                              r0.value, r1.value);
    alt.glues_tried = rep.glues_tried + 1;
    if (alt.chord.max_gap < rep.chord.max_gap) {
      rep = alt;
    } else {
      rep.glues_tried += 1;
    }
    if (rep.chord.passed) return rep;
  }
  return rep;
}

WassersteinReport wasserstein_sweep(const CostSpace& c, const DiscreteMeasure& mu0,
                                    const DiscreteMeasure& mu1, const DiscreteMeasure& nu,
                                    const ThreePlan& gamma, const TripleSegmentBuilder& builder,
                                    const WassersteinCheckConfig& cfg, double t0, double t1) {
  LiftedSegment lift = lifted_segment(c, mu0, mu1, nu, gamma, builder, cfg.tol);

  // sigma samples: random measures plus the structured choices
  std::vector<DiscreteMeasure> sigmas;
  for (int t = 0; t < cfg.n_sigma; ++t) {
    Rng rng = Rng::substream(cfg.seed, static_cast<std::uint64_t>(t));
    int atoms = cfg.sigma_atoms_min +
                static_cast<int>(rng.below(
                    static_cast<std::uint64_t>(cfg.sigma_atoms_max - cfg.sigma_atoms_min + 1)));
    std::vector<Vec> pts;
    for (int a = 0; a < atoms; ++a)
      pts.push_back(cfg.atom_sampler ? cfg.atom_sampler(rng) : rng.box_vec(cfg.box_lo, cfg.box_hi));
    sigmas.emplace_back(std::move(pts), rng.dirichlet(atoms));
  }
  for (const auto& extra : cfg.extra_sigmas) sigmas.push_back(extra);
  sigmas.push_back(nu);
  sigmas.push_back(mu0);
  sigmas.push_back(mu1);

  std::vector<double> base0(sigmas.size()), base1(sigmas.size());
  parallel_for(static_cast<long>(sigmas.size()), [&](long i) {
    base0[static_cast<std::size_t>(i)] = ot_value(c, mu0, sigmas[static_cast<std::size_t>(i)]);
    base1[static_cast<std::size_t>(i)] = ot_value(c, mu1, sigmas[static_cast<std::size_t>(i)]);
  });

  struct NodeOut {
    double max_gap = -1e308;
    double identity_residual = 0.0;
    long n = 0;
    std::optional<Witness> witness;
  };
  std::vector<NodeOut> nodes(cfg.s_grid.size());
  parallel_for(static_cast<long>(cfg.s_grid.size()), [&](long si) {
    double s = cfg.s_grid[static_cast<std::size_t>(si)];
    NodeOut& node = nodes[static_cast<std::size_t>(si)];
    DiscreteMeasure mus = lift.measure_at(s);
    double ts_nu = ot_value(c, mus, nu);
    node.identity_residual = std::abs(lift.plan_cost_at(s) - ts_nu);

    auto eval_sigma = [&](const DiscreteMeasure& sigma, double b0, double b1) {
      double ts_sigma = ot_value(c, mus, sigma);
      double lhs = ts_nu - ts_sigma;
      double rhs = (1.0 - s) * (t0 - b0) + s * (t1 - b1);
      double gap = lhs - rhs;
      ++node.n;
      if (gap > node.max_gap) {
        node.max_gap = gap;
        Witness w;
        w.s = s;
        w.y = sigma.size() == 1 ? sigma.points[0] : Vec::Constant(1, double(sigma.size()));
        w.lhs = lhs;
        w.rhs = rhs;
        node.witness = w;
      }
    };
    for (std::size_t q = 0; q < sigmas.size(); ++q)
      eval_sigma(sigmas[q], base0[q], base1[q]);
    // the path measure itself as a structured sigma
    eval_sigma(mus, ot_value(c, mu0, mus), ot_value(c, mu1, mus));
  });

  WassersteinReport rep;
  rep.chord.check_kind = "nncc";
  rep.chord.tol = cfg.tol;
  rep.chord.seed = cfg.seed;
  rep.chord.max_gap = -1e308;
  for (const auto& node : nodes) {
    rep.chord.n_evaluated += node.n;
    rep.plan_identity_residual = std::max(rep.plan_identity_residual, node.identity_residual);
    if (node.max_gap > rep.chord.max_gap) {
      rep.chord.max_gap = node.max_gap;
      rep.chord.witness = node.witness;
    }
  }
  rep.chord.passed = rep.chord.max_gap <= rep.chord.tol;
  return rep;
}

// ---- the explicit no-lift counterexample -------------------------------------

Vec counterexample_curve(int which, double s) {
  double d1 = 8 * s * s - 12 * s + 5;
  double d2 = 8 * s * s - 4 * s + 5;
  Vec p(2);
  switch (which) {
    case 1: p << -(4 * s * s - 9 * s + 5) / d1, s / d1; break;
    case 2: p << -(4 * s * s + s - 5) / d2, 9 * s / d2; break;
    case 3: p << -(4 * s * s + s - 5) / d2, -9 * s / d2; break;
    case 4: p << -(4 * s * s - 9 * s + 5) / d1, -s / d1; break;
    default: throw DomainError("counterexample_curve: index in {1,2,3,4}");
  }
  return p;
}

CounterexampleResult counterexample_lmp(int n_s, int n_t) {
  Vec y_bar(2), y(2);
  y_bar << -0.5, 0.0;
  y << 0.5, 0.0;
  auto logc = [](const Vec& a, const Vec& b) { return -std::log((a - b).norm()); };

  // f(s) for a two-atom lift: both targets are Dirac, so transport is explicit
  auto f_two_atoms = [&](int curve_a, int curve_b, double s) {
    Vec pa = counterexample_curve(curve_a, s);
    Vec pb = counterexample_curve(curve_b, s);
    return 0.5 * (logc(pa, y_bar) - logc(pa, y)) + 0.5 * (logc(pb, y_bar) - logc(pb, y));
  };

  CounterexampleResult res;
  for (int i = 1; i + 1 < n_s; ++i) res.s.push_back(double(i) / (n_s - 1));
  for (double s : res.s) {
    res.f_mu1.push_back(f_two_atoms(1, 3, s));
    res.f_mu2.push_back(f_two_atoms(2, 4, s));
  }
  res.f_at_0 = f_two_atoms(1, 3, 0.0);
  res.f_at_1 = f_two_atoms(1, 3, 1.0);

  res.min_over_t = 1e300;
  for (int ti = 0; ti < n_t; ++ti) {
    double t = n_t == 1 ? 0.0 : double(ti) / (n_t - 1);
    res.t_grid.push_back(t);
    double maxf = -1e300;
    for (std::size_t i = 0; i < res.s.size(); ++i)
      maxf = std::max(maxf, (1.0 - t) * res.f_mu1[i] + t * res.f_mu2[i]);
    res.max_f_per_t.push_back(maxf);
    res.min_over_t = std::min(res.min_over_t, maxf);
  }
  // max principle demands f_t(s) <= max(f_t(0), f_t(1)) = 0; positive max violates
  res.lmp_violated_for_all_t = res.min_over_t > 0.0;
  return res;
}

std::string CounterexampleResult::to_json() const {
  JsonOut w;
  w.key("schema").integer(1);
  w.key("f_at_0").num(f_at_0);
  w.key("f_at_1").num(f_at_1);
  w.key("min_over_t_of_max_f").num(min_over_t);
  w.key("lmp_violated_for_all_t").boolean(lmp_violated_for_all_t);
  w.key("t_grid").raw(JsonOut::array(t_grid));
  w.key("max_f_per_t").raw(JsonOut::array(max_f_per_t));
  w.key("n_s").integer(static_cast<long long>(s.size()) + 2);
  return w.object();
}

namespace {

std::string curve_csv(const std::vector<double>& s, const std::vector<double>& f, double f0,
                      double f1) {
  std::string out = "s,f\n";
  out += "0," + JsonOut::number(f0) + "\n";
  for (std::size_t i = 0; i < s.size(); ++i)
    out += JsonOut::number(s[i]) + "," + JsonOut::number(f[i]) + "\n";
  out += "1," + JsonOut::number(f1) + "\n";
  return out;
}

}  // namespace

std::string CounterexampleResult::csv_mu1() const { return curve_csv(s, f_mu1, f_at_0, f_at_1); }
std::string CounterexampleResult::csv_mu2() const { return curve_csv(s, f_mu2, f_at_0, f_at_1); }

}  // namespace crosscurve
