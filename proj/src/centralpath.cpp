#include "cplab/centralpath.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "cplab/arrangement.hpp"

namespace cplab {

namespace {

constexpr int kMaxNewton = 60;
constexpr double kFracToBoundary = 0.95;
constexpr double kLn10 = 2.302585092994046;

double inf_norm(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

/// Angle between unit vectors, stable near zero.
double unit_angle(const Vector& a, const Vector& b) {
  const double chord = (a - b).norm();
  return 2.0 * std::asin(std::min(1.0, 0.5 * chord));
}

Vector normalized_block(const Vector& v) {
  const double n = v.norm();
  require(n > 0.0, Errc::ZeroVelocityBlock, "velocity block vanished");
  return v / n;
}

struct FlavorGammas {
  Vector pd, p, d;
};

FlavorGammas flavor_gammas(const PathPoint& q) {
  const int n = static_cast<int>(q.x.size());
  const int m = static_cast<int>(q.s.size());
  Vector vpd(n + 2 * m);
  vpd << q.xdot, q.sdot, q.ydot;
  Vector vp(n + m);
  vp << q.xdot, q.sdot;
  FlavorGammas g;
  g.pd = normalized_block(vpd);
  g.p = normalized_block(vp);
  g.d = normalized_block(q.ydot);
  return g;
}

}  // namespace

PathSolver::PathSolver(const LpInstance& inst, const SignVector& eps, const Tolerances& tol)
    : inst_(apply_sign(inst, eps)), eps_(eps), tol_(tol) {
  inst_.validate(tol_);
  scale_b_ = 1.0 + inf_norm(inst_.b);
  scale_c_ = 1.0 + inf_norm(inst_.c);
  a_max_ = inst_.A.cwiseAbs().maxCoeff();
}

double PathSolver::e1_residual(const PathPoint& p) const {
  const Vector r1 = inst_.A * p.x - p.s - inst_.b;
  const Vector r2 = inst_.A.transpose() * p.y - inst_.c;
  const Vector r3 = p.s.cwiseProduct(p.y) - Vector::Constant(inst_.m, p.mu);
  const double sp = scale_b_ + a_max_ * inf_norm(p.x) + inf_norm(p.s);
  const double sd = scale_c_ + a_max_ * inf_norm(p.y);
  const double sm = 1.0 + p.mu;
  return std::max({inf_norm(r1) / sp, inf_norm(r2) / sd, inf_norm(r3) / sm});
}

double PathSolver::e2_residual(const PathPoint& p) const {
  const Vector q1 = inst_.A * p.xdot - p.sdot;
  const Vector q2 = inst_.A.transpose() * p.ydot;
  const Vector sy = p.sdot.cwiseProduct(p.y);
  const Vector ys = p.s.cwiseProduct(p.ydot);
  const Vector q3 = sy + ys - Vector::Ones(inst_.m);
  const double s1 = 1.0 + a_max_ * inf_norm(p.xdot) + inf_norm(p.sdot);
  const double s2 = 1.0 + a_max_ * inf_norm(p.ydot);
  const double s3 = 1.0 + inf_norm(sy) + inf_norm(ys);
  return std::max({inf_norm(q1) / s1, inf_norm(q2) / s2, inf_norm(q3) / s3});
}

double PathSolver::accel_residual(const PathPoint& p) const {
  const Vector q1 = inst_.A * p.xddot - p.sddot;
  const Vector q2 = inst_.A.transpose() * p.yddot;
  const Vector t1 = p.sddot.cwiseProduct(p.y);
  const Vector t2 = 2.0 * p.sdot.cwiseProduct(p.ydot);
  const Vector t3 = p.s.cwiseProduct(p.yddot);
  const Vector q3 = t1 + t2 + t3;
  const double s1 = 1.0 + a_max_ * inf_norm(p.xddot) + inf_norm(p.sddot);
  const double s2 = 1.0 + a_max_ * inf_norm(p.yddot);
  const double s3 = 1.0 + inf_norm(t1) + inf_norm(t2) + inf_norm(t3);
  return std::max({inf_norm(q1) / s1, inf_norm(q2) / s2, inf_norm(q3) / s3});
}

PathSolver::CenterResult PathSolver::analytic_center(const Vector& x0) const {
  require(x0.size() == inst_.n, Errc::DimensionMismatch, "x0 size mismatch");
  Vector x = x0;
  Vector s = inst_.A * x - inst_.b;
  require(s.minCoeff() > 0.0, Errc::InvalidArgument, "start is not interior");

  CenterResult out;
  const int max_iter = 200;
  for (int it = 0; it < max_iter; ++it) {
    const Vector inv_s = s.cwiseInverse();
    const Vector g = inst_.A.transpose() * inv_s;
    const double gscale = 1.0 + a_max_ * inf_norm(inv_s);
    out.grad_norm = inf_norm(g) / gscale;
    if (out.grad_norm <= tol_.newton_tol) {
      out.x = x;
      out.s = s;
      out.iterations = it;
      return out;
    }
    // Newton ascent direction for sum log s_i: (A^T D_s^-2 A) dx = g,
    // solved as the least-squares problem min |D_s^-1 A dx - e|.
    const Matrix B = inv_s.asDiagonal() * inst_.A;
    const Vector dx = Eigen::HouseholderQR<Matrix>(B).solve(Vector::Ones(inst_.m));
    const Vector ds = inst_.A * dx;

    double step = 1.0;
    for (int i = 0; i < inst_.m; ++i)
      if (ds[i] < 0.0) step = std::min(step, -kFracToBoundary * s[i] / ds[i]);
    const double phi0 = s.array().log().sum();
    const double slope = g.dot(dx);
    bool accepted = false;
    for (int back = 0; back < 60; ++back) {
      const Vector s_try = s + step * ds;
      if (s_try.minCoeff() > 0.0) {
        const double phi = s_try.array().log().sum();
        if (phi >= phi0 + 1e-4 * step * slope) {
          x += step * dx;
          s = s_try;
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) fail(Errc::NotConverged, "analytic center line search stalled");
  }
  fail(Errc::NotConverged, "analytic center did not converge");
}

// The Newton matrix of the path equations factors two ways here.
//
// For mu > 1 the (ds, dy) blocks are eliminated against the weighted normal
// equations through the QR of B = D_w A, w = sqrt(y/s); on the high tail
// B ~ sqrt(mu) D_{1/s} A stays uniformly well-conditioned.
//
// For mu <= 1 that elimination degrades like 1/mu near a vertex, so the full
// (n + 2m) system is solved by LU instead, with each bilinear row scaled by
// 1/max(s_i, y_i). The scaled matrix has a nonsingular vertex limit, which
// keeps Gauss directions accurate down to arbitrarily small mu.
Eigen::PartialPivLU<Matrix> PathSolver::scaled_full_lu(const Vector& s, const Vector& y,
                                                       Vector& row_scale,
                                                       double* cond_out) const {
  const int m = inst_.m;
  const int n = inst_.n;
  row_scale = s.cwiseMax(y).cwiseInverse();
  Matrix M = Matrix::Zero(n + 2 * m, n + 2 * m);
  M.block(0, 0, m, n) = inst_.A;
  M.block(0, n, m, m) = -Matrix::Identity(m, m);
  M.block(m, n + m, n, m) = inst_.A.transpose();
  M.block(m + n, n, m, m) = (row_scale.cwiseProduct(y)).asDiagonal();
  M.block(m + n, n + m, m, m) = (row_scale.cwiseProduct(s)).asDiagonal();
  Eigen::PartialPivLU<Matrix> lu(M);
  const Vector udiag = lu.matrixLU().diagonal().cwiseAbs();
  const double umin = udiag.minCoeff();
  require(umin > 0.0 && udiag.maxCoeff() / umin < 1e300, Errc::SingularMatrix,
          "path system is singular");
  if (cond_out) {
    const double rc = lu.rcond();
    *cond_out = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
  }
  return lu;
}

Vector PathSolver::newton_step(const PathPoint& p, double mu, double* cond_out) const {
  const Vector r1 = inst_.A * p.x - p.s - inst_.b;
  const Vector r2 = inst_.A.transpose() * p.y - inst_.c;
  const Vector r3 = p.s.cwiseProduct(p.y) - Vector::Constant(inst_.m, mu);

  if (mu <= 1.0) {
    Vector d;
    const auto lu = scaled_full_lu(p.s, p.y, d, cond_out);
    Vector rhs(inst_.n + 2 * inst_.m);
    rhs << -r1, -r2, -(d.cwiseProduct(r3));
    Vector step = lu.solve(rhs);
    step += lu.solve(rhs - [&] {
      Vector prod(inst_.n + 2 * inst_.m);
      const auto dx = step.head(inst_.n);
      const auto ds = step.segment(inst_.n, inst_.m);
      const auto dy = step.tail(inst_.m);
      prod << inst_.A * dx - ds, inst_.A.transpose() * dy,
          d.cwiseProduct(p.y.cwiseProduct(ds) + p.s.cwiseProduct(dy));
      return prod;
    }());
    return step;
  }

  const Vector w = (p.y.cwiseQuotient(p.s)).cwiseSqrt();
  const Matrix B = w.asDiagonal() * inst_.A;
  Eigen::HouseholderQR<Matrix> qr(B);
  const Matrix R = qr.matrixQR().topRows(inst_.n);

  if (cond_out) {
    const Vector rd = R.diagonal().cwiseAbs();
    const double rmin = rd.minCoeff();
    require(rmin > 0.0, Errc::SingularMatrix, "reduced path system is singular");
    *cond_out = (rd.maxCoeff() / rmin);
    *cond_out *= *cond_out;  // condition of B^T B
  }

  const Vector rhs = r2 - inst_.A.transpose() * ((r3 + p.y.cwiseProduct(r1)).cwiseQuotient(p.s));
  Vector dx = R.triangularView<Eigen::Upper>().transpose().solve(rhs);
  dx = R.triangularView<Eigen::Upper>().solve(dx);

  Vector step(inst_.n + 2 * inst_.m);
  const Vector ds = inst_.A * dx + r1;
  const Vector dy = -(r3 + p.y.cwiseProduct(ds)).cwiseQuotient(p.s);
  step << dx, ds, dy;
  return step;
}

PathPoint PathSolver::newton_correct(double mu, const PathPoint& start) const {
  require(mu > 0.0, Errc::InvalidArgument, "mu must be positive");
  require(start.s.size() == inst_.m && start.y.size() == inst_.m && start.x.size() == inst_.n,
          Errc::DimensionMismatch, "start point dimensions");
  require(start.s.minCoeff() > 0.0 && start.y.minCoeff() > 0.0, Errc::LeftPositiveOrthant,
          "start must have s, y > 0");

  PathPoint p = start;
  p.mu = mu;
  p.xdot.resize(0);  // derivatives stale

  double res = e1_residual(p);
  for (int it = 0; it < kMaxNewton; ++it) {
    if (res <= tol_.newton_tol) {
      p.residual = res;
      return p;
    }
    double cond = 0.0;
    const Vector step = newton_step(p, mu, &cond);
    const auto dx = step.head(inst_.n);
    const auto ds = step.segment(inst_.n, inst_.m);
    const auto dy = step.tail(inst_.m);

    double alpha = 1.0;
    for (int i = 0; i < inst_.m; ++i) {
      if (ds[i] < 0.0) alpha = std::min(alpha, -kFracToBoundary * p.s[i] / ds[i]);
      if (dy[i] < 0.0) alpha = std::min(alpha, -kFracToBoundary * p.y[i] / dy[i]);
    }

    bool accepted = false;
    for (int back = 0; back < 40; ++back) {
      PathPoint trial = p;
      trial.x += alpha * dx;
      trial.s += alpha * ds;
      trial.y += alpha * dy;
      if (trial.s.minCoeff() > 0.0 && trial.y.minCoeff() > 0.0) {
        const double tres = e1_residual(trial);
        if (tres <= (1.0 - 1e-4 * alpha) * res) {
          p = std::move(trial);
          p.cond_estimate = cond;
          res = tres;
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted)
      fail(Errc::NotConverged, "path Newton line search stalled at mu=" + std::to_string(mu) +
                                   ", residual=" + std::to_string(res));
  }
  if (res <= tol_.newton_tol) {
    p.residual = res;
    return p;
  }
  fail(Errc::NotConverged, "path Newton exceeded iteration budget at mu=" + std::to_string(mu) +
                               ", residual=" + std::to_string(res));
}

void PathSolver::fill_derivatives(PathPoint& p) const {
  // Velocity: A xdot = sdot, A^T ydot = 0, sdot y + s ydot = e, and the
  // differentiated system for the acceleration, which shares the matrix.
  const int m = inst_.m;
  const int n = inst_.n;

  if (p.mu <= 1.0) {
    Vector d;
    const auto lu = scaled_full_lu(p.s, p.y, d, &p.cond_estimate);
    auto refine = [&](Vector rhs_tail) {
      Vector rhs(n + 2 * m);
      rhs << Vector::Zero(m), Vector::Zero(n), d.cwiseProduct(rhs_tail);
      Vector z = lu.solve(rhs);
      Vector prod(n + 2 * m);
      const auto zx = z.head(n);
      const auto zs = z.segment(n, m);
      const auto zy = z.tail(m);
      prod << inst_.A * zx - zs, inst_.A.transpose() * zy,
          d.cwiseProduct(p.y.cwiseProduct(zs) + p.s.cwiseProduct(zy));
      z += lu.solve(rhs - prod);
      return z;
    };
    const Vector vel = refine(Vector::Ones(m));
    p.xdot = vel.head(n);
    p.sdot = vel.segment(n, m);
    p.ydot = vel.tail(m);
    const Vector acc = refine(-2.0 * p.sdot.cwiseProduct(p.ydot));
    p.xddot = acc.head(n);
    p.sddot = acc.segment(n, m);
    p.yddot = acc.tail(m);
    return;
  }

  const Vector w = (p.y.cwiseQuotient(p.s)).cwiseSqrt();
  const Matrix B = w.asDiagonal() * inst_.A;
  Eigen::HouseholderQR<Matrix> qr(B);

  {
    const Vector rd = qr.matrixQR().topRows(n).diagonal().cwiseAbs();
    const double rmin = rd.minCoeff();
    require(rmin > 0.0, Errc::SingularMatrix, "reduced path system is singular");
    const double c = rd.maxCoeff() / rmin;
    p.cond_estimate = c * c;
  }

  const Vector sy = p.s.cwiseProduct(p.y);
  const Vector q1 = sy.cwiseSqrt().cwiseInverse();  // 1 / sqrt(s_i y_i)
  p.xdot = qr.solve(q1);
  p.sdot = inst_.A * p.xdot;
  p.ydot = (Vector::Ones(m) - p.y.cwiseProduct(p.sdot)).cwiseQuotient(p.s);

  const Vector q2 = (-2.0 * p.sdot.cwiseProduct(p.ydot)).cwiseQuotient(sy.cwiseSqrt());
  p.xddot = qr.solve(q2);
  p.sddot = inst_.A * p.xddot;
  p.yddot = -(2.0 * p.sdot.cwiseProduct(p.ydot) + p.y.cwiseProduct(p.sddot)).cwiseQuotient(p.s);
}

PathPoint PathSolver::point_at(double mu, const PathPoint& warm) const {
  PathPoint seed = warm;
  if (warm.has_derivatives()) {
    const double h = mu - warm.mu;
    seed.x = warm.x + h * warm.xdot + 0.5 * h * h * warm.xddot;
    seed.s = (warm.s + h * warm.sdot + 0.5 * h * h * warm.sddot).cwiseMax(0.05 * warm.s);
    seed.y = (warm.y + h * warm.ydot + 0.5 * h * h * warm.yddot).cwiseMax(0.05 * warm.y);
  }
  PathPoint q = newton_correct(mu, seed);
  fill_derivatives(q);
  return q;
}

namespace {

// Computing the primal velocity direction near the analytic center loses
// accuracy like eps_machine * mu (the defining gradient shrinks as 1/mu while
// its summands stay O(1)); direction changes below this floor are rounding
// noise, not curve motion.
constexpr double kDirectionNoise = 128.0 * 2.220446049250313e-16;

/// Stall bookkeeping: the march is tail-converged once every Gauss-direction
/// step inside a full decade of mu stays below tail_tol (all flavors), or
/// below the direction noise floor of that decade.
struct DecadeWatch {
  long long bucket = 0;      // floor(t / ln 10) of the current decade
  double step_max = 0.0;     // largest per-step Gauss motion seen in it
  double floor_max = 0.0;    // largest noise floor seen in it
  bool bucket_complete = false;

  // returns true when a completed decade stalled
  bool advance(double t_new, double step_move, double noise_floor, double tail_tol) {
    const long long b = static_cast<long long>(std::floor(t_new / kLn10));
    if (b != bucket) {
      const bool stalled = bucket_complete && step_max < std::max(tail_tol, floor_max);
      bucket = b;
      step_max = step_move;
      floor_max = noise_floor;
      bucket_complete = true;  // subsequent buckets are entered at their edge
      return stalled;
    }
    step_max = std::max(step_max, step_move);
    floor_max = std::max(floor_max, noise_floor);
    return false;
  }
};

}  // namespace

PathTrace PathSolver::trace(const Vector& witness_x, const TraceOptions& opt) const {
  const CenterResult center = analytic_center(witness_x);

  PathPoint anchor;
  anchor.x = center.x;
  anchor.s = center.s;
  anchor.y = center.s.cwiseInverse();
  try {
    anchor = newton_correct(1.0, anchor);
  } catch (const Error&) {
    // far from the center at mu = 1; start high where the center is exact
    anchor.x = center.x;
    anchor.s = center.s;
    anchor.y = opt.mu_seed_fallback * center.s.cwiseInverse();
    anchor = newton_correct(opt.mu_seed_fallback, anchor);
  }
  fill_derivatives(anchor);

  PathTrace out;
  out.eps = eps_;

  auto march = [&](double dir, std::vector<PathPoint>& pts) -> bool {
    // returns true when the Gauss curve stalled for a full decade
    PathPoint p = anchor;
    FlavorGammas gp = flavor_gammas(p);
    double t = std::log(p.mu);
    double dt = opt.dt_init;
    DecadeWatch watch;
    watch.bucket = static_cast<long long>(std::floor(t / kLn10));

    while (true) {
      if (static_cast<int>(pts.size()) > opt.max_points)
        fail(Errc::CapExceeded, "trace exceeded the point budget");
      const double t_edge = dir > 0 ? opt.t_cap : -opt.t_cap;
      double t_next = t + dir * dt;
      bool at_edge = false;
      if ((dir > 0 && t_next >= t_edge) || (dir < 0 && t_next <= t_edge)) {
        t_next = t_edge;
        at_edge = true;
      }
      const double mu_next = std::exp(t_next);

      PathPoint q;
      try {
        q = point_at(mu_next, p);
      } catch (const Error& e) {
        if (e.code() == Errc::SingularMatrix) throw;
        if (dt <= opt.dt_min) fail(Errc::StepUnderflow, "trace step underflow");
        dt *= 0.5;
        continue;
      }

      FlavorGammas gq = flavor_gammas(q);
      const double turn = std::max({unit_angle(gp.pd, gq.pd), unit_angle(gp.p, gq.p),
                                    unit_angle(gp.d, gq.d)});
      if (turn > opt.turn_max && dt > opt.dt_min) {
        dt *= 0.5;
        continue;
      }

      pts.push_back(q);
      const double moved = std::max(
          {(gq.pd - gp.pd).norm(), (gq.p - gp.p).norm(), (gq.d - gp.d).norm()});
      p = std::move(q);
      gp = std::move(gq);
      t = t_next;
      if (turn < 0.3 * opt.turn_max) dt = std::min(dt * 2.0, opt.dt_max);

      if (watch.advance(t, moved, kDirectionNoise * std::max(1.0, mu_next), tol_.tail_tol))
        return true;
      if (at_edge) return false;
    }
  };

  std::vector<PathPoint> down, up;
  const bool lo_conv = march(-1.0, down);
  const bool hi_conv = march(+1.0, up);

  out.truncation_flags |= lo_conv ? kLoTailConverged : kLoTailCapped;
  out.truncation_flags |= hi_conv ? kHiTailConverged : kHiTailCapped;

  out.points.reserve(down.size() + up.size() + 1);
  for (auto it = down.rbegin(); it != down.rend(); ++it) out.points.push_back(std::move(*it));
  out.points.push_back(anchor);
  for (auto& q : up) out.points.push_back(std::move(q));
  out.mu_lo = out.points.front().mu;
  out.mu_hi = out.points.back().mu;
  return out;
}

PathTrace trace_path(const LpInstance& inst, const SignVector& eps, const Tolerances& tol,
                     const TraceOptions& opt) {
  auto [kind, witness] = primal_feasibility(inst, eps, tol);
  require(kind == FeasibilityKind::StrictlyFeasible && witness.has_value(), Errc::InvalidArgument,
          "cell is not strictly feasible");
  require(is_bounded(inst, eps, tol), Errc::InvalidArgument, "cell is not bounded");
  PathSolver solver(inst, eps, tol);
  return solver.trace(*witness, opt);
}

}  // namespace cplab
