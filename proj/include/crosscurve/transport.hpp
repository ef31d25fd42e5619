#pragma once

#include <functional>
#include <string>
#include <vector>

#include "crosscurve/cost_space.hpp"
#include "crosscurve/rng.hpp"
#include "crosscurve/verifier.hpp"

namespace crosscurve {

/// Finitely supported probability measure; coincident support points are
/// merged by weight summation.
struct DiscreteMeasure {
  std::vector<Vec> points;
  Vec w;

  DiscreteMeasure() = default;
  DiscreteMeasure(std::vector<Vec> pts, Vec weights);  // validates and merges
  int size() const { return static_cast<int>(points.size()); }
};

DiscreteMeasure random_measure(int n_atoms, const Vec& lo, const Vec& hi, std::uint64_t seed);

struct OtResult {
  Eigen::MatrixXd plan;   // n x m, row sums mu, column sums nu
  double value = 0.0;
  Vec dual_u, dual_v;     // potentials certifying optimality
  double min_reduced_cost = 0.0;
  long iterations = 0;
};

/// Exact optimal transport by the transportation simplex with Bland's rule.
/// +infinity entries are allowed only when a finite-cost plan exists.
OtResult ot_solve(const Eigen::MatrixXd& cost, const Vec& mu, const Vec& nu);

/// Cost matrix of a ground cost over two supports (+inf entries preserved).
Eigen::MatrixXd cost_matrix(const CostSpace& c, const DiscreteMeasure& mu,
                            const DiscreteMeasure& nu);

double ot_value(const CostSpace& c, const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// 3-plan on support triples with prescribed (p1,p3) and (p2,p3) projections.
struct ThreePlan {
  std::vector<Vec> x0_pts, x1_pts, y_pts;
  std::vector<double> gamma;  // n0 * n1 * m, row-major (i, j, k)

  double& at(int i, int j, int k);
  double at(int i, int j, int k) const;
  int n0() const { return static_cast<int>(x0_pts.size()); }
  int n1() const { return static_cast<int>(x1_pts.size()); }
  int m() const { return static_cast<int>(y_pts.size()); }
};

/// Conditional-independence gluing along the shared second marginal:
/// gamma_ijk = pi0_ik pi1_jk / nu_k.
ThreePlan glue(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1, const DiscreteMeasure& nu,
               const Eigen::MatrixXd& pi0, const Eigen::MatrixXd& pi1);

using TripleSegmentBuilder =
    std::function<SegmentPath(const Vec& x0, const Vec& x1, const Vec& y)>;

/// Lifted segment: pushforward of the glued plan under the per-triple paths.
/// Also evaluates the transported-plan cost sum c(path(s), y) gamma.
struct LiftedSegment {
  std::function<DiscreteMeasure(double)> measure_at;
  std::function<double(double)> plan_cost_at;
  DiscreteMeasure mu0, mu1, nu;
};

/// Requires the endpoint plans to be optimal within tol (duality-gap check).
LiftedSegment lifted_segment(const CostSpace& c, const DiscreteMeasure& mu0,
                             const DiscreteMeasure& mu1, const DiscreteMeasure& nu,
                             const ThreePlan& gamma, const TripleSegmentBuilder& builder,
                             double tol = 1e-9);

struct WassersteinCheckConfig {
  std::vector<double> s_grid = equispaced_grid(33);
  int n_sigma = 50;
  int sigma_atoms_min = 3, sigma_atoms_max = 6;
  Vec box_lo, box_hi;                       // sigma atom box (euclidean bases)
  std::function<Vec(Rng&)> atom_sampler;    // overrides the box when set
  std::vector<DiscreteMeasure> extra_sigmas;  // adversarial targets
  std::uint64_t seed = 0;
  double tol = 1e-8;
  double plan_identity_tol = 1e-8;
  // When the conditional-independence glue fails, retry with alternative
  // glues built from tie-broken optimal endpoint plans. Off by default: the
  // lifting theorem guarantees the default suffices for optimal plans.
  bool search_glues = false;
  int glue_retries = 4;
};

struct WassersteinReport {
  ViolationReport chord;           // check_kind = "nncc" at the measure level
  double plan_identity_residual = 0.0;  // max |sum c(path,y) gamma - T_c(mu(s),nu)|
  int glues_tried = 1;
};

/// Chord verification of the transport cost along a lifted segment, with
/// sampled sigma plus the structured choices {nu, mu0, mu1, mu(s)}.
WassersteinReport wasserstein_nncc_check(const CostSpace& c, const DiscreteMeasure& mu0,
                                         const DiscreteMeasure& mu1, const DiscreteMeasure& nu,
                                         const TripleSegmentBuilder& builder,
                                         const WassersteinCheckConfig& cfg);

/// One sweep over a fixed 3-plan; t0, t1 are the certified endpoint optima.
WassersteinReport wasserstein_sweep(const CostSpace& c, const DiscreteMeasure& mu0,
                                    const DiscreteMeasure& mu1, const DiscreteMeasure& nu,
                                    const ThreePlan& gamma, const TripleSegmentBuilder& builder,
                                    const WassersteinCheckConfig& cfg, double t0, double t1);

/// Curves, transport-cost differences f(s), and the maximum-principle report
/// for the two-atom example whose every lift violates the max principle.
struct CounterexampleResult {
  std::vector<double> s;            // interior grid
  std::vector<double> f_mu1, f_mu2; // per-curve differences of transport costs
  std::vector<double> t_grid;
  std::vector<double> max_f_per_t;  // max over interior s of f_t(s)
  double f_at_0 = 0.0, f_at_1 = 0.0;
  double min_over_t = 0.0;          // min over t of max over s
  bool lmp_violated_for_all_t = false;

  std::string to_json() const;
  std::string csv_mu1() const;  // header "s,f"
  std::string csv_mu2() const;
};

CounterexampleResult counterexample_lmp(int n_s = 101, int n_t = 11);

/// Explicit c-segment curves of the counterexample (closed forms).
Vec counterexample_curve(int which, double s);  // which in {1,2,3,4}

}  // namespace crosscurve
