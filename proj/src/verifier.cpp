#include "crosscurve/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crosscurve/json_out.hpp"
#include "crosscurve/parallel.hpp"

namespace crosscurve {

namespace {

constexpr double kGapFloor = -1e308;

// Violation amount of lhs <= rhs in extended arithmetic. Only finite-vs-finite
// produces a meaningful number; an infinite rhs can never be violated.
double gap_value(const ExtReal& lhs, const ExtReal& rhs) {
  if (lhs.is_neg_inf() || rhs.is_pos_inf()) return kGapFloor;
  if (lhs.is_pos_inf()) return std::numeric_limits<double>::infinity();
  if (rhs.is_neg_inf()) return std::numeric_limits<double>::infinity();
  return lhs.value() - rhs.value();
}

double finite_or(const ExtReal& v, double fallback) {
  return v.finite() ? v.value() : fallback;
}

struct SampleSet {
  std::vector<Vec> ys;  // fixed samples: adversarial, structured, random
  bool add_path_point = false;
};

SampleSet build_samples(const SegmentPath& seg, const CostSpace& c, const VerifierConfig& cfg) {
  SampleSet set;
  for (const auto& y : cfg.extra_y) set.ys.push_back(y);
  if (cfg.include_structured) {
    set.ys.push_back(seg.base_y);
    if (seg.x0.size() == c.dim_y) {
      set.ys.push_back(seg.x0);
      set.ys.push_back(seg.x1);
      set.add_path_point = true;  // x(s) joins the sample set per grid node
    }
  }
  if (cfg.y_count > 0) {
    if (cfg.y_sampler) {
      Rng rng(cfg.seed);
      for (int i = 0; i < cfg.y_count; ++i) set.ys.push_back(cfg.y_sampler(rng));
    } else if (cfg.y_lo.size() == c.dim_y && cfg.y_hi.size() == c.dim_y) {
      Rng rng(cfg.seed);
      for (int i = 0; i < cfg.y_count; ++i) set.ys.push_back(rng.box_vec(cfg.y_lo, cfg.y_hi));
    }
  }
  return set;
}

void require_finite_endpoints(const SegmentPath& seg, const CostSpace& c) {
  if (!c(seg.x0, seg.base_y).finite() || !c(seg.x1, seg.base_y).finite())
    throw PreconditionError(c.name + ": endpoint cost to the base point is not finite");
}

ExtReal path_cost(const CostSpace& c, const Vec& xs, const Vec& base_y, double s) {
  ExtReal v = c(xs, base_y);
  if (!v.finite())
    throw SegmentInvalidError(c.name + ": c(x(s), y_bar) non-finite at s=" + std::to_string(s));
  return v;
}

struct NodeResult {
  double max_gap = kGapFloor;
  long n = 0;
  std::optional<Witness> witness;
};

// rhs_rule: build the right-hand side from the endpoint differences A, B at s.
template <class RhsRule>
ViolationReport chord_type_check(const char* kind, const SegmentPath& seg, const CostSpace& c,
                                 const VerifierConfig& cfg, RhsRule rhs_rule) {
  require_finite_endpoints(seg, c);
  SampleSet samples = build_samples(seg, c, cfg);

  double c0 = c(seg.x0, seg.base_y).value();
  double c1 = c(seg.x1, seg.base_y).value();

  std::vector<NodeResult> results(cfg.s_grid.size());
  parallel_for(static_cast<long>(cfg.s_grid.size()), [&](long si) {
    double s = cfg.s_grid[static_cast<std::size_t>(si)];
    Vec xs = seg.at(s);
    ExtReal cs = path_cost(c, xs, seg.base_y, s);
    NodeResult& node = results[static_cast<std::size_t>(si)];

    auto eval_y = [&](const Vec& y) {
      ExtReal lhs, a, b;
      try {
        lhs = cs - c(xs, y);
        a = ExtReal(c0) - c(seg.x0, y);
        b = ExtReal(c1) - c(seg.x1, y);
      } catch (const Error&) {
        if (cfg.skip_unevaluable_y) return;  // y outside the cost's domain
        throw;
      }
      ExtReal rhs = rhs_rule(a, b, s);
      double gap = gap_value(lhs, rhs);
      ++node.n;
      if (gap > node.max_gap) {
        node.max_gap = gap;
        node.witness = Witness{s, y, finite_or(lhs, gap > 0 ? 1e308 : -1e308),
                               finite_or(rhs, 1e308)};
      }
    };

    for (const auto& y : samples.ys) eval_y(y);
    if (samples.add_path_point) eval_y(xs);
  });

  ViolationReport rep;
  rep.check_kind = kind;
  rep.tol = cfg.tol;
  rep.seed = cfg.seed;
  rep.max_gap = kGapFloor;
  for (const auto& node : results) {
    rep.n_evaluated += node.n;
    if (node.max_gap > rep.max_gap) {
      rep.max_gap = node.max_gap;
      rep.witness = node.witness;
    }
  }
  rep.passed = rep.max_gap <= rep.tol;
  return rep;
}

}  // namespace

std::vector<double> equispaced_grid(int n) {
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = double(i) / double(n - 1);
  g.front() = 0.0;
  g.back() = 1.0;
  return g;
}

ViolationReport nncc_check(const SegmentPath& seg, const CostSpace& c, const VerifierConfig& cfg) {
  return chord_type_check("nncc", seg, c, cfg, [](const ExtReal& a, const ExtReal& b, double s) {
    return chord_combination(a, b, s, XKind::PosInf);
  });
}

ViolationReport lmp_check(const SegmentPath& seg, const CostSpace& c, const VerifierConfig& cfg) {
  return chord_type_check("lmp", seg, c, cfg, [](const ExtReal& a, const ExtReal& b, double) {
    return a <= b ? b : a;
  });
}

ViolationReport conv_check(const SegmentPath& seg, const CostSpace& c, const VerifierConfig& cfg) {
  require_finite_endpoints(seg, c);
  const auto& grid = cfg.s_grid;
  if (grid.size() < 3) throw PreconditionError("conv_check needs at least 3 grid nodes");
  double h = grid[1] - grid[0];
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (std::abs(grid[i] - grid[i - 1] - h) > 1e-12)
      throw PreconditionError("conv_check requires an equispaced s-grid");

  SampleSet samples = build_samples(seg, c, cfg);
  std::vector<Vec> path(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    path[i] = seg.at(grid[i]);
    path_cost(c, path[i], seg.base_y, grid[i]);
  }

  struct ConvNode {
    double max_gap = kGapFloor;
    double scale = 0.0;
    long n = 0;
    std::optional<Witness> witness;
  };
  std::vector<Vec> ys = samples.ys;
  if (samples.add_path_point)
    for (const auto& p : path) ys.push_back(p);

  std::vector<ConvNode> results(ys.size());
  parallel_for(static_cast<long>(ys.size()), [&](long yi) {
    const Vec& y = ys[static_cast<std::size_t>(yi)];
    ConvNode& node = results[static_cast<std::size_t>(yi)];
    std::vector<double> g(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      ExtReal cs = c(path[i], seg.base_y);
      ExtReal cy;
      try {
        cy = c(path[i], y);
      } catch (const Error&) {
        if (cfg.skip_unevaluable_y) return;
        throw;
      }
      if (!cy.finite()) return;  // epigraph convexity with infinities: skip this y
      g[i] = cs.value() - cy.value();
      node.scale = std::max(node.scale, std::abs(g[i]));
    }
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
      double second = g[i - 1] - 2.0 * g[i] + g[i + 1];
      double gap = -second;
      ++node.n;
      if (gap > node.max_gap) {
        node.max_gap = gap;
        node.witness = Witness{grid[i], y, g[i], 0.5 * (g[i - 1] + g[i + 1])};
      }
    }
  });

  ViolationReport rep;
  rep.check_kind = "conv";
  rep.seed = cfg.seed;
  rep.max_gap = kGapFloor;
  double scale = 0.0;
  for (const auto& node : results) {
    rep.n_evaluated += node.n;
    scale = std::max(scale, node.scale);
    if (node.max_gap > rep.max_gap) {
      rep.max_gap = node.max_gap;
      rep.witness = node.witness;
    }
  }
  rep.tol = cfg.tol * (1.0 + scale);  // threshold scales with the sweep magnitude
  rep.passed = rep.max_gap <= rep.tol;
  return rep;
}

ViolationReport one_convexity_check(const SegmentPath& seg, const CostSpace& d2,
                                    const VerifierConfig& cfg) {
  require_finite_endpoints(seg, d2);
  double d0 = d2(seg.x0, seg.base_y).value();
  double d1 = d2(seg.x1, seg.base_y).value();
  double dx = d2(seg.x0, seg.x1).value();

  ViolationReport rep;
  rep.check_kind = "one_convex";
  rep.tol = cfg.tol;
  rep.seed = cfg.seed;
  rep.max_gap = kGapFloor;
  for (double s : cfg.s_grid) {
    Vec xs = seg.at(s);
    double lhs = d2(xs, seg.base_y).value();
    double rhs = (1.0 - s) * d0 + s * d1 - s * (1.0 - s) * dx;
    double gap = lhs - rhs;
    ++rep.n_evaluated;
    if (gap > rep.max_gap) {
      rep.max_gap = gap;
      rep.witness = Witness{s, seg.base_y, lhs, rhs};
    }
  }
  rep.passed = rep.max_gap <= rep.tol;
  return rep;
}

namespace {

void require_constant_speed(const SegmentPath& geo, const CostSpace& d2, const VerifierConfig& cfg) {
  double dx = std::sqrt(std::max(0.0, d2(geo.x0, geo.x1).value()));
  double tol = std::max(cfg.tol, 1e-7) * (1.0 + dx);
  for (std::size_t i = 0; i < cfg.s_grid.size(); i += 4) {
    for (std::size_t j = i + 4; j < cfg.s_grid.size(); j += 8) {
      double s = cfg.s_grid[i], r = cfg.s_grid[j];
      double d = std::sqrt(std::max(0.0, d2(geo.at(s), geo.at(r)).value()));
      if (std::abs(d - std::abs(s - r) * dx) > tol)
        throw ParametrizationError("pc_check: path is not a constant-speed geodesic");
    }
  }
}

}  // namespace

ViolationReport pc_check(const SegmentPath& geo, const CostSpace& d2, const VerifierConfig& cfg) {
  require_constant_speed(geo, d2, cfg);
  SampleSet samples = build_samples(geo, d2, cfg);

  double dx = d2(geo.x0, geo.x1).value();

  ViolationReport rep;
  rep.check_kind = "pc";
  rep.tol = cfg.tol;
  rep.seed = cfg.seed;
  rep.max_gap = kGapFloor;
  auto eval = [&](double s, const Vec& xs, const Vec& y) {
    double d0y = d2(geo.x0, y).value();
    double d1y = d2(geo.x1, y).value();
    double lhs = d2(xs, y).value();
    double rhs = (1.0 - s) * d0y + s * d1y - s * (1.0 - s) * dx;
    double gap = rhs - lhs;  // PC wants lhs >= rhs
    ++rep.n_evaluated;
    if (gap > rep.max_gap) {
      rep.max_gap = gap;
      rep.witness = Witness{s, y, lhs, rhs};
    }
  };
  for (double s : cfg.s_grid) {
    Vec xs = geo.at(s);
    for (const auto& y : samples.ys) eval(s, xs, y);
    if (samples.add_path_point) eval(s, xs, xs);
  }
  rep.passed = rep.max_gap <= rep.tol;
  return rep;
}

ViolationReport geodesic_is_vcs(const SegmentPath& geo, const CostSpace& d2, double t,
                                const VerifierConfig& cfg) {
  SegmentPath based = geo;
  based.base_y = geo.at(t);
  return nncc_check(based, d2, cfg);
}

std::string ViolationReport::to_json() const {
  JsonOut w;
  w.key("schema").integer(1);
  w.key("check_kind").str(check_kind);
  w.key("passed").boolean(passed);
  w.key("max_gap").num(max_gap);
  w.key("tol").num(tol);
  if (witness) {
    JsonOut wit;
    wit.key("s").num(witness->s);
    wit.key("y").raw(JsonOut::array(witness->y));
    wit.key("lhs").num(witness->lhs);
    wit.key("rhs").num(witness->rhs);
    w.key("witness").raw(wit.object());
  } else {
    w.key("witness").null();
  }
  w.key("n_evaluated").integer(n_evaluated);
  w.key("seed").integer(static_cast<long long>(seed));
  return w.object();
}

}  // namespace crosscurve
