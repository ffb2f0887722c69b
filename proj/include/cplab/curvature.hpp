#pragma once

#include <string>
#include <vector>

#include "cplab/centralpath.hpp"
#include "cplab/rng.hpp"
#include "cplab/types.hpp"

namespace cplab {

/// Unit tangents of the three path flavors at one parameter value, plus the
/// speeds d/dmu they were normalized from.
struct GaussSample {
  double mu = 0.0;
  Vector gamma_pd;  // R^(n+2m)
  Vector gamma_p;   // R^(n+m)
  Vector gamma_d;   // R^m
  double speed_pd = 0.0;
  double speed_p = 0.0;
  double speed_d = 0.0;
};

/// Dimension of one flavor's ambient space.
inline int flavor_dim(Flavor f, int m, int n) {
  switch (f) {
    case Flavor::PD: return n + 2 * m;
    case Flavor::P: return n + m;
    case Flavor::D: return m;
  }
  return 0;
}

std::vector<GaussSample> gauss_curve(const PathTrace& trace);

/// One flavor's samples as columns of a dim x P matrix.
Matrix gauss_matrix(const std::vector<GaussSample>& samples, Flavor f);

struct FlavorKappa {
  Vector pd, p, d;
};

/// Curvature vectors (kappa) per flavor from velocity and acceleration,
/// using kappa = (a |v|^2 - v <v, a>) / |v|^4 with v, a the mu-derivatives.
FlavorKappa curvature_vector(const PathPoint& p);

struct CurvatureResult {
  SignVector eps;
  double K_pd = 0.0;
  double K_p = 0.0;
  double K_d = 0.0;
  double quad_error_estimate = 0.0;
  long long n_samples = 0;
  bool excluded = false;
  std::string excluded_reason;
};

/// Adaptive Simpson quadrature of ||d gamma/dt|| in t = ln mu over the trace
/// range, refining panels until the Richardson estimate meets quad_tol. All
/// three flavors share evaluation points.
CurvatureResult total_curvature(const PathSolver& solver, const PathTrace& trace,
                                double quad_tol);

struct CroftonEstimate {
  Flavor flavor = Flavor::PD;
  long long n_hyperplanes = 0;
  double mean_crossings = 0.0;
  double length_estimate = 0.0;  // pi * mean_crossings
  double std_error = 0.0;
};

/// Random hyperplane through the origin; the blocks outside the flavor are
/// zero and the concatenated normal has unit norm.
struct HyperplaneSample {
  Flavor flavor = Flavor::PD;
  Vector u;  // R^n
  Vector v;  // R^m
  Vector w;  // R^m

  /// The normal restricted to the flavor's ambient space.
  Vector normal(int m, int n) const;
};

HyperplaneSample draw_hyperplane(Flavor f, int m, int n, Xoshiro256pp& rng);

/// Inner products below this magnitude count as tangencies and trigger a redraw.
inline constexpr double kCrossingZeroTol = 1e-14;

/// Sign changes of <h, gamma_k> along the sampled polyline (columns of gammas).
/// Sets *hit_zero when some product falls below kCrossingZeroTol.
int count_sign_changes(const Eigen::RowVectorXd& vals, bool* hit_zero);

/// Crossing counts for a batch of hyperplanes against several cells' curves.
/// Hyperplanes that come within kCrossingZeroTol of any sampled point (in any
/// cell) are redrawn so every count is unambiguous.
struct CrossingCountResult {
  Eigen::MatrixXi counts;  // n_hyperplanes x n_cells
  Matrix normals;          // n_hyperplanes x dim, after redraws
  int redraws = 0;
};
CrossingCountResult count_crossings_batch(const std::vector<Matrix>& cell_gammas,
                                          int n_hyperplanes, Xoshiro256pp& rng);

/// Monte-Carlo length of the sampled spherical curve: pi times the mean number
/// of crossings with uniformly random central hyperplanes.
CroftonEstimate crofton_length(const Matrix& gammas, Flavor flavor, int n_hyperplanes,
                               Xoshiro256pp& rng);

CroftonEstimate crofton_length(const std::vector<GaussSample>& samples, Flavor flavor,
                               int n_hyperplanes, Xoshiro256pp& rng);

/// Summed sign-change count across all cells' curves for one fixed hyperplane.
int max_crossings(const std::vector<Matrix>& cell_gammas, const Vector& normal);

/// A crossing bracketed on segment [mu_k, mu_{k+1}] refined by bisection, with
/// the residual of the full intersection system and the smallest singular
/// value of its Jacobian at the refined point.
struct RefinedCrossing {
  double mu = 0.0;
  double phi_residual = 0.0;
  double min_singular_value = 0.0;
  PathPoint point;
};

RefinedCrossing refine_crossing(const PathSolver& solver, const PathTrace& trace,
                                std::size_t segment, const HyperplaneSample& h);

/// Residual of the intersection system and smallest singular value of its
/// Jacobian at an arbitrary path point (diagnostic).
std::pair<double, double> transversality_residual(const PathSolver& solver,
                                                  const PathPoint& p,
                                                  const HyperplaneSample& h);

}  // namespace cplab
