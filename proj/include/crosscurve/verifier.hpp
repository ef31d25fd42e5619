#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "crosscurve/cost_space.hpp"
#include "crosscurve/rng.hpp"

namespace crosscurve {

std::vector<double> equispaced_grid(int n);

/// Sweep configuration shared by all chord-type verifiers. The right-hand
/// side's undefined combinations always resolve to +inf.
struct VerifierConfig {
  std::vector<double> s_grid = equispaced_grid(33);
  int y_count = 64;
  std::uint64_t seed = 0;
  Vec y_lo, y_hi;                        // box sampler bounds
  std::function<Vec(Rng&)> y_sampler;    // overrides the box when set
  std::vector<Vec> extra_y;              // user-supplied adversarial points
  bool include_structured = true;        // add {y_bar, x0, x1, x(s)} when shapes match
  // Costs restricted to the off-diagonal (so c(x, y) may be undefined for
  // particular y) skip those samples instead of propagating the error.
  bool skip_unevaluable_y = false;
  double tol = 1e-9;
};

struct Witness {
  double s = 0.0;
  Vec y;
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Result of one verification sweep. `passed` means no violation above tol
/// was found on the sampled set, not a proof over the continuum.
struct ViolationReport {
  std::string check_kind;
  double max_gap = 0.0;
  double tol = 0.0;
  std::optional<Witness> witness;
  long n_evaluated = 0;
  bool passed = false;
  std::uint64_t seed = 0;

  std::string to_json() const;
};

/// Chord inequality of Def. of variational c-segments: cost difference to the
/// base point stays below the linear interpolation of its endpoint values.
ViolationReport nncc_check(const SegmentPath& seg, const CostSpace& c, const VerifierConfig& cfg);

/// Maximum-principle variant: below the max of the endpoint values.
ViolationReport lmp_check(const SegmentPath& seg, const CostSpace& c, const VerifierConfig& cfg);

/// Discrete-convexity variant on an equispaced s-grid. The report's tol field
/// holds the magnitude-scaled threshold actually applied.
ViolationReport conv_check(const SegmentPath& seg, const CostSpace& c, const VerifierConfig& cfg);

/// d^2(x(s), y_bar) <= chord - s(1-s) d^2(x0,x1) along the path.
ViolationReport one_convexity_check(const SegmentPath& seg, const CostSpace& d2, const VerifierConfig& cfg);

/// Quadratic comparison inequality of positively curved spaces, for a
/// constant-speed geodesic. Non-constant-speed input raises ParametrizationError.
ViolationReport pc_check(const SegmentPath& geodesic, const CostSpace& d2, const VerifierConfig& cfg);

/// Runs nncc_check on (geodesic, geodesic(t)); pass/fail agrees with pc_check
/// on the same samples.
ViolationReport geodesic_is_vcs(const SegmentPath& geodesic, const CostSpace& d2, double t,
                                const VerifierConfig& cfg);

}  // namespace crosscurve
