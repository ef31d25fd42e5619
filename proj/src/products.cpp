#include "crosscurve/products.hpp"

#include <cmath>

namespace crosscurve {

CostSpace product_cost(const CostSpace& c1, const CostSpace& c2) {
  CostSpace out;
  out.dim_x = c1.dim_x + c2.dim_x;
  out.dim_y = c1.dim_y + c2.dim_y;
  out.name = c1.name + "+" + c2.name;
  out.eval = [c1, c2](const Vec& x, const Vec& y) {
    if (x.size() != c1.dim_x + c2.dim_x || y.size() != c1.dim_y + c2.dim_y)
      throw DomainError("product_cost: dimension mismatch");
    ExtReal v1 = c1(x.head(c1.dim_x), y.head(c1.dim_y));
    ExtReal v2 = c2(x.tail(c2.dim_x), y.tail(c2.dim_y));
    ExtReal sum = v1 + v2;
    if (sum.is_undefined()) throw NumericError("product_cost: opposite infinities in the factors");
    return sum;
  };
  return out;
}

SegmentPath product_segment(const SegmentPath& a, const SegmentPath& b) {
  auto stack = [](const Vec& u, const Vec& v) {
    Vec w(u.size() + v.size());
    w << u, v;
    return w;
  };
  SegmentPath seg;
  seg.x0 = stack(a.x0, b.x0);
  seg.x1 = stack(a.x1, b.x1);
  seg.base_y = stack(a.base_y, b.base_y);
  seg.interior = [a, b, stack](double s) { return stack(a.at(s), b.at(s)); };
  return seg;
}

SegmentPath submersion_project(const SegmentPath& total_seg,
                               const std::function<Vec(const Vec&)>& P1,
                               const std::function<Vec(const Vec&)>& P2,
                               const CostSpace& c_total, const CostSpace& c_base,
                               const VerifierConfig& cfg) {
  Vec base = P2(total_seg.base_y);
  for (const Vec* xi : {&total_seg.x0, &total_seg.x1}) {
    ExtReal up = c_total(*xi, total_seg.base_y);
    ExtReal down = c_base(P1(*xi), base);
    if (!up.finite() || !down.finite())
      throw OptimalityError("submersion_project: endpoint cost not finite");
    double residual = std::abs(up.value() - down.value());
    if (residual > cfg.tol * (1.0 + std::abs(down.value())))
      throw OptimalityError("submersion_project: endpoint not optimal in its fiber, residual " +
                            std::to_string(residual));
  }
  SegmentPath seg;
  seg.x0 = P1(total_seg.x0);
  seg.x1 = P1(total_seg.x1);
  seg.base_y = base;
  seg.interior = [total_seg, P1](double s) { return P1(total_seg.at(s)); };
  return seg;
}

}  // namespace crosscurve
