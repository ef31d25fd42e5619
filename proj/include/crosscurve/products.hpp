#pragma once

#include "crosscurve/cost_space.hpp"
#include "crosscurve/verifier.hpp"

namespace crosscurve {

/// Sum cost on the direct sum of the two coordinate spaces.
CostSpace product_cost(const CostSpace& c1, const CostSpace& c2);

/// Pairwise path on the direct sum; factors must share the s-parametrization.
SegmentPath product_segment(const SegmentPath& a, const SegmentPath& b);

/// Projection of a variational c-segment through a cost submersion. The
/// endpoints of total_seg must be optimal in their fibers:
/// c_total(x_i, y0) = c_base(P1 x_i, P2 y0) within tol.
SegmentPath submersion_project(const SegmentPath& total_seg,
                               const std::function<Vec(const Vec&)>& P1,
                               const std::function<Vec(const Vec&)>& P2,
                               const CostSpace& c_total, const CostSpace& c_base,
                               const VerifierConfig& cfg);

}  // namespace crosscurve
