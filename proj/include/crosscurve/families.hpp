#pragma once

#include <functional>
#include <memory>
#include <string>

#include "crosscurve/cost_space.hpp"

namespace crosscurve {

/// A cost together with its closed-form variational c-segment builder.
struct CostFamily {
  CostSpace cost;
  std::function<SegmentPath(const Vec& x0, const Vec& x1, const Vec& y_bar)> segment;
};

/// c(x,y) = |x-y|^2 on R^dim; segments are straight lines.
CostFamily hilbert_family(int dim);

/// c(x,y) = |F(x)-G(y)|^2 with F(X) convex; segments interpolate in F-image.
CostFamily generalized_hilbert_family(int dim, std::function<Vec(const Vec&)> F,
                                      std::function<Vec(const Vec&)> F_inverse,
                                      std::function<Vec(const Vec&)> G);

/// Differentiable potential for the Bregman families.
struct Potential {
  std::string name;
  int dim = 0;
  std::function<double(const Vec&)> u;
  std::function<Vec(const Vec&)> grad;
  std::function<Eigen::MatrixXd(const Vec&)> hess;              // for the Newton inverse
  std::function<Vec(const Vec&)> grad_inverse;                  // closed form when known
  std::function<bool(const Vec&)> in_domain = [](const Vec&) { return true; };
};

Potential quadratic_potential(int dim);
Potential entropy_potential(int dim);  // u(x) = sum x_i log x_i on the positive orthant
Potential quartic_norm_potential(int dim);  // u(x) = |x|^4

enum class BregmanMode { Forward, Reverse };

/// Forward: c(x,y) = u(x)-u(y)-<grad u(y), x-y>, linear segments.
/// Reverse: roles of x,y swapped; segments solve grad u(x(s)) interpolation.
CostFamily bregman_family(const Potential& u, BregmanMode mode);

/// c((x,a),(y,b)) = |x-y|^2/(2b) + g a/b on R^dim x (0,inf).
CostFamily semi_geostrophic_family(int dim, double g);

/// c(x,y) = |x-y| on R^dim; segments are the discontinuous base-point paths.
CostFamily monge_family(int dim);

/// Monge cost on a finite metric space (points are 1-d index vectors).
/// The triangle inequality of `dist` is validated up to roundoff.
CostFamily monge_finite_family(const Eigen::MatrixXd& dist);

/// Infimal convolution of |.| and |.|^2/(2 eps): quadratic inside the knee
/// |x-y| <= eps, shifted norm outside. Segments are built by lifting to the
/// product space with the shrinkage split and projecting the sum.
CostFamily soft_threshold_family(int dim, double eps);

/// Squared geodesic cost on the unit sphere S^n in R^{n+1}; exp/log segments.
CostFamily sphere_family(int n);

Vec sphere_exp(const Vec& y, const Vec& v);
Vec sphere_log(const Vec& y, const Vec& x);  // cut-locus error near the antipode

/// c(x,y) = -log|x-y| on R^dim; cost only (x=y is outside the domain, so
/// evaluation there raises DomainError). Segments come from the c-segment solver.
CostSpace log_distance_cost(int dim);

/// Squared Poincare-disk distance with constant-speed geodesics; the
/// negatively curved control case for the PC checks.
CostFamily poincare_disk_family();

/// Anisotropic quartic cost with straight-line candidate segments; the
/// chord-violating control fixture for the verifiers.
CostFamily quartic_control_family();

/// A pinned chord violation of the quartic control (gap = 3 at s = 1/2).
struct QuarticWitness {
  Vec x0, x1, y_bar, y;
  double s;
  double expected_gap;
};
QuarticWitness quartic_control_witness();

}  // namespace crosscurve
