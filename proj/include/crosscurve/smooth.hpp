#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "crosscurve/cost_space.hpp"
#include "crosscurve/rng.hpp"

namespace crosscurve {

/// Local parametrization around a point: u in R^k maps to the ambient space
/// through an orthonormal basis and a retraction. Derivatives taken in chart
/// coordinates are intrinsic ones for the declared manifold.
struct Chart {
  Eigen::MatrixXd basis;                      // ambient_dim x k, orthonormal columns
  std::function<Vec(const Vec&)> to_ambient;  // u -> point, u = 0 at the center

  int dim() const { return static_cast<int>(basis.cols()); }
  Vec coords_of_direction(const Vec& ambient_dir) const { return basis.transpose() * ambient_dir; }
};

using ChartFactory = std::function<Chart(const Vec&)>;

Chart euclidean_chart(const Vec& at);
ChartFactory euclidean_charts();
ChartFactory sphere_charts();  // tangent-basis chart with radial renormalization

/// Cost with the structure needed for finite differencing: charts, a smooth
/// domain predicate, and per-order step sizes tuned for O(1)-scaled costs.
struct SmoothCost {
  CostSpace cost;
  ChartFactory chart_x = euclidean_charts();
  ChartFactory chart_y = euclidean_charts();
  std::function<bool(const Vec&, const Vec&)> pair_in_domain = [](const Vec&, const Vec&) {
    return true;
  };
  double h1 = 1e-5;  // first derivatives
  double h2 = 1e-4;  // second
  double h3 = 1e-3;  // third
  double h4 = 1e-2;  // fourth
  bool smooth = true;
};

SmoothCost make_smooth(const CostSpace& cost);

/// Gradient in the y-slot, expressed in the given chart at y (u = 0 center).
Vec grad_y_in_chart(const SmoothCost& c, const Vec& x, const Vec& y, const Chart& cy);

/// Mixed second derivative matrix M_ij = d^2 c / dx_i dy_j in chart
/// coordinates, with a condition-number diagnostic. Ill-conditioned matrices
/// (cond > 1e8) raise DegeneracyError.
Eigen::MatrixXd mixed_hessian(const SmoothCost& c, const Vec& x, const Vec& y);
Eigen::MatrixXd mixed_hessian_in_charts(const SmoothCost& c, const Vec& x, const Vec& y,
                                        const Chart& cx, const Chart& cy, double h);

/// One evaluation of the cross-curvature expression
/// S = (c_ikm c^mr c_rjl - c_ijkl) xi^i eta^j xi^k eta^l
/// together with the Kim-McCann pairing A = (d^2_xy c)(xi, eta).
struct MtwSample {
  Vec x, y, xi, eta;  // ambient; xi, eta unit
  double S = 0.0;
  double A = 0.0;
};

MtwSample mtw_tensor(const SmoothCost& c, const Vec& x, const Vec& y, const Vec& xi,
                     const Vec& eta);

/// Same contraction without the unit-direction precondition; the value scales
/// as a^2 b^2 under (xi, eta) -> (a xi, b eta).
MtwSample mtw_tensor_any(const SmoothCost& c, const Vec& x, const Vec& y, const Vec& xi,
                         const Vec& eta);

/// Sampler producing in-domain pairs for the scan.
struct ScanRegion {
  std::function<void(Rng&, Vec&, Vec&)> sample_pair;
};

struct ScanSummary {
  double min_S = 0.0;            // over all sampled directions
  double min_S_orthogonal = 0.0; // over constructed A = 0 directions
  MtwSample worst;               // attains min_S
  MtwSample worst_orthogonal;
  long n_samples = 0;
  std::string classification;    // nncc-consistent | mtw-only-consistent | neither
  double fd_tol = 1e-3;
  std::uint64_t seed = 0;

  std::string to_json() const;
};

/// Pointwise sweep of the tensor over random pairs and directions; half the
/// samples use directions constructed to annihilate the mixed pairing.
ScanSummary nncc_scan(const SmoothCost& c, const ScanRegion& region, int n_samples,
                      std::uint64_t seed);

/// Newton-continuation solve of the c-segment equation
/// grad_y c(x(s), y_bar) = (1-s) q0 + s q1 along the given s-grid.
SegmentPath c_segment_solve(const SmoothCost& c, const Vec& x0, const Vec& x1, const Vec& y_bar,
                            const std::vector<double>& s_grid = {});

struct CsegResidualReport {
  double max_residual = 0.0;
  double argmax_s = 0.0;
  long n_nodes = 0;
};

/// Residual of the c-segment equation along an existing segment; smooth
/// costs that pass the chord check must satisfy it to FD tolerance.
CsegResidualReport auto_csegment_check(const SegmentPath& seg, const SmoothCost& c,
                                       const std::vector<double>& s_grid = {});

}  // namespace crosscurve
