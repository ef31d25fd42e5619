#include "crosscurve/cost_space.hpp"

namespace crosscurve {

CostSpace negated(const CostSpace& c) {
  CostSpace out;
  out.dim_x = c.dim_x;
  out.dim_y = c.dim_y;
  out.name = "neg(" + c.name + ")";
  out.eval = [base = c](const Vec& x, const Vec& y) { return -base(x, y); };
  return out;
}

SegmentPath linear_segment(const Vec& x0, const Vec& x1, const Vec& base_y) {
  SegmentPath seg;
  seg.x0 = x0;
  seg.x1 = x1;
  seg.base_y = base_y;
  seg.interior = [x0, x1](double s) -> Vec { return (1.0 - s) * x0 + s * x1; };
  return seg;
}

SegmentPath monge_segment(const Vec& x0, const Vec& x1, const Vec& base_y) {
  SegmentPath seg;
  seg.x0 = x0;
  seg.x1 = x1;
  seg.base_y = base_y;
  seg.interior = [base_y](double) -> Vec { return base_y; };
  return seg;
}

}  // namespace crosscurve
