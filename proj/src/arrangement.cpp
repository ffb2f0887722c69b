#include "cplab/arrangement.hpp"

#include <cmath>

#include "cplab/bezout.hpp"
#include "cplab/linalg.hpp"
#include "cplab/parallel.hpp"
#include "cplab/simplex.hpp"

namespace cplab {

namespace {

constexpr double kBoxInitial = 1e6;
constexpr double kBoxRetry = 1e9;

Vector sign_diag(const SignVector& eps) {
  Vector d(eps.size());
  for (int i = 0; i < eps.size(); ++i) d[i] = eps.sign(i);
  return d;
}

/// Phase-1 margin program: maximize t subject to rows(u) + t <= rhs within a
/// box, shifted so the all-zero point is feasible and the slack basis starts
/// the simplex. Returns (t*, optimizer in original coordinates, box_active).
struct MarginResult {
  double t_star = 0.0;
  Vector point;
  bool box_active = false;
};

// maximize t s.t. S_i . z >= t (componentwise rows of S, offsets off), |z_j| <= box
// i.e. the margin of the system S z + off >= 0.
MarginResult margin_lp(const Matrix& S, const Vector& off, double box) {
  const int r = static_cast<int>(S.rows());
  const int d = static_cast<int>(S.cols());

  // variables: u = z + box >= 0 (d of them), tau = t - t_lo >= 0
  // constraints: -S u + tau <= off - t_lo - box * S.1   (r rows)
  //              u_j <= 2 box                           (d rows)
  Vector srow = S * Vector::Constant(d, box);
  double t_lo = std::numeric_limits<double>::infinity();
  for (int i = 0; i < r; ++i) t_lo = std::min(t_lo, off[i] - srow[i]);
  t_lo -= 1.0;

  Matrix G = Matrix::Zero(r + d, d + 1);
  Vector h(r + d);
  G.topLeftCorner(r, d) = -S;
  G.topRightCorner(r, 1).setOnes();
  h.head(r) = off - Vector::Constant(r, t_lo) - srow;
  for (int j = 0; j < d; ++j) {
    G(r + j, j) = 1.0;
    h[r + j] = 2.0 * box;
  }
  Vector obj = Vector::Zero(d + 1);
  obj[d] = 1.0;

  const auto res = simplex_maximize(G, h, obj);
  require(res.status == SimplexResult::Status::Optimal, Errc::LpCycleGuard,
          "margin program must be bounded and feasible");

  MarginResult out;
  out.t_star = res.objective + t_lo;
  out.point = res.x.head(d) - Vector::Constant(d, box);
  for (int j = 0; j < d; ++j)
    if (std::abs(out.point[j]) > 0.999 * box) out.box_active = true;
  return out;
}

}  // namespace

LpInstance apply_sign(const LpInstance& inst, const SignVector& eps) {
  require(eps.size() == inst.m, Errc::DimensionMismatch, "sign vector length != m");
  LpInstance out = inst;
  const Vector d = sign_diag(eps);
  out.A = d.asDiagonal() * inst.A;
  out.b = d.asDiagonal() * inst.b;
  return out;
}

std::pair<FeasibilityKind, std::optional<Vector>> primal_feasibility(const LpInstance& inst,
                                                                     const SignVector& eps,
                                                                     const Tolerances& tol) {
  require(eps.size() == inst.m, Errc::DimensionMismatch, "sign vector length != m");
  const Vector d = sign_diag(eps);
  const Matrix S = d.asDiagonal() * inst.A;          // rows eps_i A_i
  const Vector off = -(d.asDiagonal() * inst.b);     // margin = S x + off

  MarginResult r = margin_lp(S, off, kBoxInitial);
  if (r.t_star <= tol.feas_margin && r.box_active) {
    r = margin_lp(S, off, kBoxRetry);
    if (r.t_star <= tol.feas_margin && r.box_active)
      fail(Errc::BoxTooSmall, "phase-1 optimizer pinned to the retry box");
  }

  if (r.t_star < -tol.feas_margin) return {FeasibilityKind::Empty, std::nullopt};
  if (r.t_star <= tol.feas_margin) return {FeasibilityKind::Degenerate, std::nullopt};
  return {FeasibilityKind::StrictlyFeasible, r.point};
}

bool is_bounded(const LpInstance& inst, const SignVector& eps, const Tolerances& tol) {
  const Vector d = sign_diag(eps);
  const Matrix S = d.asDiagonal() * inst.A;
  const int n = inst.n;

  // maximize +-d_j over {S d >= 0, |d|_inf <= 1}; the cone is scale invariant,
  // so any nonzero recession direction pushes some optimum to 1. Shift
  // u = d + 1 so the simplex's u >= 0 covers the box.
  Matrix G(inst.m + n, n);
  Vector h(inst.m + n);
  G.topRows(inst.m) = -S;
  h.head(inst.m) = -(S * Vector::Ones(n));
  G.bottomRows(n) = Matrix::Identity(n, n);
  h.tail(n).setConstant(2.0);

  for (int j = 0; j < n; ++j) {
    for (double sgn : {1.0, -1.0}) {
      Vector obj = Vector::Zero(n);
      obj[j] = sgn;
      const auto res = simplex_maximize(G, h, obj);
      require(res.status == SimplexResult::Status::Optimal, Errc::LpCycleGuard,
              "recession program is feasible (d = 0) and boxed");
      if (res.objective - sgn > tol.feas_margin) return false;
    }
  }
  return true;
}

DualBasis dual_basis(const LpInstance& inst, const Tolerances& tol) {
  DualBasis basis;
  basis.f = particular_solution(inst.A, inst.c, tol);
  basis.G = null_space_basis(inst.A, tol);
  return basis;
}

std::pair<bool, std::optional<Vector>> dual_strict_feasibility(const LpInstance& inst,
                                                               const SignVector& eps,
                                                               const DualBasis& basis,
                                                               const Tolerances& tol) {
  require(eps.size() == inst.m, Errc::DimensionMismatch, "sign vector length != m");
  const Vector d = sign_diag(eps);
  const Matrix S = d.asDiagonal() * basis.G;   // rows eps_i G_i
  const Vector off = d.asDiagonal() * basis.f; // margin = S gamma + off

  MarginResult r = margin_lp(S, off, kBoxInitial);
  if (r.t_star <= tol.feas_margin && r.box_active) {
    r = margin_lp(S, off, kBoxRetry);
    if (r.t_star <= tol.feas_margin && r.box_active)
      fail(Errc::BoxTooSmall, "dual phase-1 optimizer pinned to the retry box");
  }

  if (r.t_star > tol.feas_margin) return {true, r.point};
  return {false, std::nullopt};
}

std::pair<bool, std::optional<Vector>> dual_strict_feasibility(const LpInstance& inst,
                                                               const SignVector& eps,
                                                               const Tolerances& tol) {
  return dual_strict_feasibility(inst, eps, dual_basis(inst, tol), tol);
}

ArrangementSummary enumerate_cells(const LpInstance& inst, const Tolerances& tol,
                                   int cell_cap_exponent) {
  inst.validate(tol);
  require(inst.m <= cell_cap_exponent, Errc::CapExceeded,
          "cell enumeration capped at 2^" + std::to_string(cell_cap_exponent));

  ArrangementSummary out;
  out.m = inst.m;
  out.n = inst.n;
  out.buck_expected = binomial(inst.m - 1, inst.n);
  out.joint_expected = binomial(inst.m, inst.n);

  const DualBasis basis = dual_basis(inst, tol);
  const std::uint64_t n_cells = std::uint64_t{1} << inst.m;
  out.per_cell.resize(n_cells);

  parallel_for(static_cast<int>(n_cells), [&](int k) {
    CellReport rep;
    rep.eps = SignVector::from_index(inst.m, static_cast<std::uint64_t>(k));
    try {
      auto [kind, witness] = primal_feasibility(inst, rep.eps, tol);
      switch (kind) {
        case FeasibilityKind::Empty: rep.primal_status = PrimalStatus::Empty; break;
        case FeasibilityKind::Degenerate: rep.primal_status = PrimalStatus::Degenerate; break;
        case FeasibilityKind::StrictlyFeasible:
          rep.primal_status = is_bounded(inst, rep.eps, tol) ? PrimalStatus::BoundedStrict
                                                             : PrimalStatus::UnboundedFeasible;
          break;
      }
      if (rep.primal_status == PrimalStatus::BoundedStrict ||
          rep.primal_status == PrimalStatus::UnboundedFeasible) {
        rep.witness_x = witness;
        // independent recheck of the strict witness
        if (witness) {
          const Vector margins =
              rep.eps.raw().cast<double>().asDiagonal() * (inst.A * *witness - inst.b);
          if (margins.minCoeff() < tol.feas_margin) rep.condition_flag = true;
        }
      }
      auto [dual_ok, gamma] = dual_strict_feasibility(inst, rep.eps, basis, tol);
      rep.dual_strict = dual_ok;
      if (dual_ok) rep.witness_gamma = gamma;
      rep.jointly_strict = dual_ok && (rep.primal_status == PrimalStatus::BoundedStrict ||
                                       rep.primal_status == PrimalStatus::UnboundedFeasible);
    } catch (const Error&) {
      rep.condition_flag = true;
    }
    out.per_cell[static_cast<std::size_t>(k)] = std::move(rep);
  });

  for (const auto& rep : out.per_cell) {
    switch (rep.primal_status) {
      case PrimalStatus::Empty: ++out.empty_count; break;
      case PrimalStatus::Degenerate: ++out.degenerate_count; break;
      case PrimalStatus::UnboundedFeasible: ++out.unbounded_count; break;
      case PrimalStatus::BoundedStrict: ++out.bounded_strict_count; break;
    }
    if (rep.jointly_strict) ++out.joint_count;
  }
  return out;
}

}  // namespace cplab
