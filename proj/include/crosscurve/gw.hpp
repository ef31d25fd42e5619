#pragma once

#include <string>
#include <vector>

#include "crosscurve/rng.hpp"
#include "crosscurve/transport.hpp"
#include "crosscurve/verifier.hpp"

namespace crosscurve {

/// Finite set with a symmetric gauge matrix and probability weights. The
/// gauge need not satisfy the triangle inequality.
struct GaugedSpace {
  Eigen::MatrixXd gauge;
  Vec w;

  GaugedSpace() = default;
  GaugedSpace(Eigen::MatrixXd g, Vec weights);  // validates symmetry and weights
  int n() const { return static_cast<int>(w.size()); }

  std::string to_json() const;
};

/// Quadratic transport functional sum (f_ii' - g_jj')^2 pi_ij pi_i'j'.
double gw_cost(const Eigen::MatrixXd& pi, const GaugedSpace& X, const GaugedSpace& Y);

struct GwResult {
  Eigen::MatrixXd plan;
  double value = 0.0;
  double grid_value = 0.0;  // best over the dense feasibility grid
  bool certified = false;   // grid ran in full and descent reached stationarity
};

/// Global minimization over the coupling polytope by dense grid (65 points
/// per free coordinate) plus exact coordinate descent; only for
/// (n_X - 1)(n_Y - 1) <= 4.
GwResult gw_solve_tiny(const GaugedSpace& X, const GaugedSpace& Y);

/// Gauged-space segment on the gamma-charged pairs with gauge
/// (1-s) f0 + s f1; endpoints are the inputs themselves.
struct GwSegment {
  GaugedSpace x0, x1;
  std::vector<std::pair<int, int>> support;  // charged (i, j) pairs
  Vec mass;                                  // (p1,p2) pushforward of gamma
  Eigen::MatrixXd f0_pull, f1_pull;          // gauges pulled back to the support

  GaugedSpace at(double s) const;
};

/// Requires the projections of gamma to be gw-optimal within tol.
GwSegment gw_segment(const GaugedSpace& X0, const GaugedSpace& X1, const GaugedSpace& Y,
                     const ThreePlan& gamma, double tol = 1e-8);

/// Default 3-plan: conditional-independence glue of the two optimal plans.
ThreePlan gw_glue(const GaugedSpace& X0, const GaugedSpace& X1, const GaugedSpace& Y,
                  const Eigen::MatrixXd& pi0, const Eigen::MatrixXd& pi1);

struct GwCheckConfig {
  std::vector<double> s_grid = equispaced_grid(33);
  int n_test_spaces = 50;
  std::uint64_t seed = 0;
  double tol = 1e-6;
};

/// Chord verification of GW^2 along a gw_segment against sampled two-point
/// test spaces.
ViolationReport gw_segment_nncc_check(const GaugedSpace& X0, const GaugedSpace& X1,
                                      const GaugedSpace& Y, const GwCheckConfig& cfg);

// ---- cone costs of unbalanced transport --------------------------------------

enum class EntropyKind { KL, TotalVariation };

/// Perspective cone cost inf_{z>0} r F0(z/r) + s F1(z/s) + base_c z with the
/// boundary conventions at r = 0 or s = 0.
double cone_cost(EntropyKind f0, EntropyKind f1, double base_c, double r, double s);

/// Closed form r + s - 2 sqrt(rs) cos(min(d, pi)).
double wfr_cone_cost(double d, double r, double s);

enum class ConeBase { Sphere, PsdUnitTrace };

struct ConeCheckConfig {
  int n_triples = 40;
  int y_count = 32;
  std::uint64_t seed = 0;
  double tol = 1e-10;
  double radius_max = 3.0;
};

/// Cone points over S^2 mapped through the sqrt-radius embedding into R^3;
/// Hilbert segments upstairs, cone cost downstairs. PsdUnitTrace is a
/// declared placeholder and raises UnsupportedError.
ViolationReport cone_nncc_check(ConeBase base, const ConeCheckConfig& cfg);

// ---- brute-force Gromov-Hausdorff --------------------------------------------

/// Exact distortion minimum over all correspondences with full projections
/// (no 1/2 factor); |X|, |Y| <= 5.
double gh_distance(const Eigen::MatrixXd& dx, const Eigen::MatrixXd& dy);

}  // namespace crosscurve
