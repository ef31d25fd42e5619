#pragma once

#include <functional>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "crosscurve/errors.hpp"
#include "crosscurve/ext_real.hpp"

namespace crosscurve {

using Vec = Eigen::VectorXd;

/// An evaluable cost over a declared pair of ambient coordinate spaces.
/// eval must be deterministic and never return the undefined marker.
struct CostSpace {
  int dim_x = 0;
  int dim_y = 0;
  std::string name;
  std::function<ExtReal(const Vec&, const Vec&)> eval;

  ExtReal operator()(const Vec& x, const Vec& y) const {
    ExtReal c = eval(x, y);
    if (c.is_undefined()) throw NumericError(name + ": cost evaluated to the undefined marker");
    return c;
  }
};

/// Negated cost, used for two-sided (equality) sweeps.
CostSpace negated(const CostSpace& c);

/// Sampled variational c-segment: a base point and an evaluator on [0,1].
/// at(0) and at(1) return the stored endpoints bitwise.
struct SegmentPath {
  Vec x0, x1, base_y;
  std::function<Vec(double)> interior;

  Vec at(double s) const {
    if (s == 0.0) return x0;
    if (s == 1.0) return x1;
    return interior(s);
  }
};

/// Straight-line path; the variational c-segment of every Hilbert-type cost.
SegmentPath linear_segment(const Vec& x0, const Vec& x1, const Vec& base_y);

/// The Monge path: x0 at s=0, the base point on (0,1), x1 at s=1.
SegmentPath monge_segment(const Vec& x0, const Vec& x1, const Vec& base_y);

}  // namespace crosscurve
