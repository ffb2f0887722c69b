#pragma once

#include <cmath>
#include <vector>

#include "cplab/types.hpp"

namespace cplab {

/// One central-path point of the sign-normalized cell, with the first and
/// second mu-derivatives of (x, s, y) once fill_derivatives has run.
struct PathPoint {
  double mu = 0.0;
  Vector x, s, y;
  Vector xdot, sdot, ydot;
  Vector xddot, sddot, yddot;
  double residual = 0.0;       // scaled residual of the defining equations
  double cond_estimate = 0.0;  // condition proxy of the reduced Newton system

  bool has_derivatives() const { return xdot.size() > 0; }
};

enum TailFlag : unsigned {
  kLoTailConverged = 1u << 0,
  kHiTailConverged = 1u << 1,
  kLoTailCapped = 1u << 2,
  kHiTailCapped = 1u << 3,
};

struct PathTrace {
  SignVector eps;
  std::vector<PathPoint> points;  // strictly increasing mu
  double mu_lo = 0.0;
  double mu_hi = 0.0;
  unsigned truncation_flags = 0;

  bool capped() const { return truncation_flags & (kLoTailCapped | kHiTailCapped); }
};

struct TraceOptions {
  double turn_max = 0.05;        // max Gauss-direction turn per accepted step (radians)
  double dt_init = 0.02;         // initial step in t = ln mu
  double dt_max = 0.5;
  double dt_min = 1e-12;
  // Wide enough that slow-but-convergent tails stall before hitting it; the
  // scaled low-mu solver stays accurate throughout this range.
  double t_cap = std::log(1e13);
  double mu_seed_fallback = 1e6;  // anchor when Newton at mu = 1 fails
  int max_points = 400000;
};

/// Newton machinery for one strictly feasible cell. The instance handed to the
/// constructor is sign-normalized internally, so s > 0 and y > 0 throughout.
class PathSolver {
 public:
  PathSolver(const LpInstance& inst, const SignVector& eps, const Tolerances& tol);

  const LpInstance& cell() const { return inst_; }
  const SignVector& eps() const { return eps_; }
  const Tolerances& tolerances() const { return tol_; }

  struct CenterResult {
    Vector x;
    Vector s;
    int iterations = 0;
    double grad_norm = 0.0;
  };

  /// Maximizes sum log s_i over the cell by damped Newton from x0.
  CenterResult analytic_center(const Vector& x0) const;

  /// Damped Newton on the path equations at fixed mu, with fraction-to-boundary
  /// clipping 0.95 to keep s, y positive. Throws NotConverged.
  PathPoint newton_correct(double mu, const PathPoint& start) const;

  /// Fills velocity and acceleration by solving the two linear systems that
  /// share the path Jacobian; records a condition estimate.
  void fill_derivatives(PathPoint& p) const;

  /// Newton-corrects at mu starting from warm, then fills derivatives.
  PathPoint point_at(double mu, const PathPoint& warm) const;

  /// Predictor-corrector continuation in t = ln mu, seeded near mu = 1 from the
  /// analytic center, marching both directions until the Gauss curve stalls for
  /// a full decade (tail_tol) or |t| reaches t_cap.
  PathTrace trace(const Vector& witness_x, const TraceOptions& opt = {}) const;

  double e1_residual(const PathPoint& p) const;
  double e2_residual(const PathPoint& p) const;
  double accel_residual(const PathPoint& p) const;

 private:
  Vector newton_step(const PathPoint& p, double mu, double* cond_out) const;
  Eigen::PartialPivLU<Matrix> scaled_full_lu(const Vector& s, const Vector& y, Vector& row_scale,
                                             double* cond_out) const;

  LpInstance inst_;  // sign-normalized
  SignVector eps_;
  Tolerances tol_;
  double scale_b_ = 1.0;
  double scale_c_ = 1.0;
  double a_max_ = 1.0;  // max-abs entry of A
};

/// Convenience wrapper: classify nothing, just trace the given cell of inst.
PathTrace trace_path(const LpInstance& inst, const SignVector& eps, const Tolerances& tol,
                     const TraceOptions& opt = {});

}  // namespace cplab
