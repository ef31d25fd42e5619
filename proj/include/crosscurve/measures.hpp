#pragma once

#include <functional>
#include <vector>

#include "crosscurve/cost_space.hpp"
#include "crosscurve/rng.hpp"
#include "crosscurve/smooth.hpp"

namespace crosscurve {

/// Nonnegative weights summing to one over a shared index set.
struct ProbVector {
  Vec w;

  explicit ProbVector(Vec weights);
  int size() const { return static_cast<int>(w.size()); }
};

ProbVector random_prob_vector(int n, Rng& rng);

/// Relative entropy sum F(mu_i/nu_i) nu_i with F(t) = t log t - t + 1;
/// +infinity when mu charges a zero of nu.
ExtReal kl(const ProbVector& mu, const ProbVector& nu);

/// Linear interpolation of weights; the variational segment of the KL cost.
ProbVector kl_segment_at(const ProbVector& mu0, const ProbVector& mu1, double s);

/// Residual of the identity
/// (1-s)KL(mu0,nu) + s KL(mu1,nu) - KL(mu(s),nu)
///   = (1-s)KL(mu0,mu(s)) + s KL(mu1,mu(s)).
double kl_identity_residual(const ProbVector& mu0, const ProbVector& mu1, const ProbVector& nu,
                            double s);

double hellinger_sq(const ProbVector& mu, const ProbVector& nu);
double bhattacharyya(const ProbVector& mu, const ProbVector& nu);
double fisher_rao(const ProbVector& mu, const ProbVector& nu);

/// Sphere-ambient segment in square-root coordinates; stays on the
/// nonnegative part of the unit sphere.
SegmentPath hellinger_segment(const ProbVector& mu0, const ProbVector& mu1,
                              const ProbVector& nu_bar);

/// Segment for the squared Fisher-Rao distance, built through the exp/log
/// construction on the sphere spanned by {sqrt(nu_bar), e, f}.
SegmentPath fr_segment(const ProbVector& mu0, const ProbVector& mu1, const ProbVector& nu_bar);

/// Cost spaces over weight vectors, for the chord verifiers.
CostSpace kl_cost(int n);
CostSpace hellinger_cost(int n);
CostSpace fisher_rao_sq_cost(int n);

// ---- Bures-Wasserstein on PSD matrices --------------------------------------

/// Symmetric n x n matrix with spectrum clamped at zero; stored flattened
/// row-major so PSD points ride through the generic verifiers.
struct Psd {
  Eigen::MatrixXd m;

  explicit Psd(const Eigen::MatrixXd& sym);  // validates symmetry, clamps spectrum
  int n() const { return static_cast<int>(m.rows()); }
};

Vec psd_flatten(const Psd& s);
Psd psd_unflatten(const Vec& v);

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& s);
Eigen::MatrixXd psd_pinv_sqrt(const Eigen::MatrixXd& s);  // pseudo-inverse square root

double bw_distance_sq(const Psd& s1, const Psd& s2);

/// Variational segment S(s) = M(s) M(s)^T with
/// M(s) = (1-s) S0^{1/2} U0^T + s S1^{1/2} U1^T, U_i the polar factors of
/// S2^{1/2} S_i^{1/2}. Endpoints are checked to reproduce S0, S1.
SegmentPath bw_segment(const Psd& s0, const Psd& s1, const Psd& s2);

/// BW^2 on flattened PSD matrices, for the generic verifiers.
CostSpace bw_cost(int n);

/// Smooth view of BW^2 on the positive-definite interior, in packed
/// symmetric coordinates (for the c-segment residual check).
SmoothCost bw_smooth_cost(int n, double min_eig = 1e-3);

Psd random_psd(int n, Rng& rng, bool rank_deficient = false);

}  // namespace crosscurve
