#include "cplab/curvature.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace cplab {

namespace {

constexpr double kPi = std::numbers::pi_v<double>;

Vector flavor_velocity(const PathPoint& p, Flavor f) {
  const int n = static_cast<int>(p.x.size());
  const int m = static_cast<int>(p.s.size());
  switch (f) {
    case Flavor::PD: {
      Vector v(n + 2 * m);
      v << p.xdot, p.sdot, p.ydot;
      return v;
    }
    case Flavor::P: {
      Vector v(n + m);
      v << p.xdot, p.sdot;
      return v;
    }
    case Flavor::D: return p.ydot;
  }
  return {};
}

Vector flavor_acceleration(const PathPoint& p, Flavor f) {
  const int n = static_cast<int>(p.x.size());
  const int m = static_cast<int>(p.s.size());
  switch (f) {
    case Flavor::PD: {
      Vector a(n + 2 * m);
      a << p.xddot, p.sddot, p.yddot;
      return a;
    }
    case Flavor::P: {
      Vector a(n + m);
      a << p.xddot, p.sddot;
      return a;
    }
    case Flavor::D: return p.yddot;
  }
  return {};
}

Vector kappa_of(const Vector& v, const Vector& a) {
  const double v2 = v.squaredNorm();
  require(v2 > 0.0, Errc::ZeroVelocityBlock, "velocity block vanished");
  return (a - v * (v.dot(a) / v2)) / v2;
}

/// ||d gamma / dt|| at a path point, t = ln mu, for each flavor.
std::array<double, 3> gauss_speed(const PathPoint& p) {
  std::array<double, 3> g{};
  for (int fi = 0; fi < 3; ++fi) {
    const auto f = static_cast<Flavor>(fi);
    const Vector v = flavor_velocity(p, f);
    const Vector a = flavor_acceleration(p, f);
    g[static_cast<std::size_t>(fi)] = p.mu * kappa_of(v, a).norm() * v.norm();
  }
  return g;
}

}  // namespace

std::vector<GaussSample> gauss_curve(const PathTrace& trace) {
  std::vector<GaussSample> out;
  out.reserve(trace.points.size());
  for (const auto& p : trace.points) {
    require(p.has_derivatives(), Errc::InvalidArgument, "trace point lacks derivatives");
    GaussSample s;
    s.mu = p.mu;
    const Vector vpd = flavor_velocity(p, Flavor::PD);
    const Vector vp = flavor_velocity(p, Flavor::P);
    const Vector& vd = p.ydot;
    s.speed_pd = vpd.norm();
    s.speed_p = vp.norm();
    s.speed_d = vd.norm();
    require(s.speed_pd > 0.0 && s.speed_p > 0.0 && s.speed_d > 0.0, Errc::ZeroVelocityBlock,
            "velocity block vanished");
    s.gamma_pd = vpd / s.speed_pd;
    s.gamma_p = vp / s.speed_p;
    s.gamma_d = vd / s.speed_d;
    out.push_back(std::move(s));
  }
  return out;
}

Matrix gauss_matrix(const std::vector<GaussSample>& samples, Flavor f) {
  require(!samples.empty(), Errc::InvalidArgument, "empty Gauss curve");
  const auto pick = [&](const GaussSample& s) -> const Vector& {
    switch (f) {
      case Flavor::P: return s.gamma_p;
      case Flavor::D: return s.gamma_d;
      default: return s.gamma_pd;
    }
  };
  const int dim = static_cast<int>(pick(samples.front()).size());
  Matrix G(dim, static_cast<int>(samples.size()));
  for (std::size_t k = 0; k < samples.size(); ++k)
    G.col(static_cast<int>(k)) = pick(samples[k]);
  return G;
}

FlavorKappa curvature_vector(const PathPoint& p) {
  require(p.has_derivatives(), Errc::InvalidArgument, "point lacks derivatives");
  FlavorKappa k;
  k.pd = kappa_of(flavor_velocity(p, Flavor::PD), flavor_acceleration(p, Flavor::PD));
  k.p = kappa_of(flavor_velocity(p, Flavor::P), flavor_acceleration(p, Flavor::P));
  k.d = kappa_of(flavor_velocity(p, Flavor::D), flavor_acceleration(p, Flavor::D));
  return k;
}

namespace {

struct QuadPoint {
  double t = 0.0;
  PathPoint pt;
  std::array<double, 3> g{};
};

QuadPoint eval_at(const PathSolver& solver, double t, const PathPoint& warm, long long& evals) {
  QuadPoint q;
  q.t = t;
  q.pt = solver.point_at(std::exp(t), warm);
  q.g = gauss_speed(q.pt);
  ++evals;
  return q;
}

std::array<double, 3> simpson(const QuadPoint& a, const QuadPoint& mid, const QuadPoint& b) {
  const double h = (b.t - a.t) / 6.0;
  std::array<double, 3> s{};
  for (std::size_t f = 0; f < 3; ++f) s[f] = h * (a.g[f] + 4.0 * mid.g[f] + b.g[f]);
  return s;
}

}  // namespace

CurvatureResult total_curvature(const PathSolver& solver, const PathTrace& trace,
                                double quad_tol) {
  require(trace.points.size() >= 2, Errc::InvalidArgument, "trace too short");
  CurvatureResult out;
  out.eps = trace.eps;

  const double t_lo = std::log(trace.mu_lo);
  const double t_hi = std::log(trace.mu_hi);
  const double t_span = t_hi - t_lo;
  long long evals = 0;

  std::array<double, 3> K{};
  double err_total = 0.0;

  // Composite panels over every 4th trace node, adaptively split; the three
  // flavors share evaluation points and refinement.
  const auto& pts = trace.points;
  std::vector<std::size_t> nodes;
  for (std::size_t k = 0; k < pts.size(); k += 4) nodes.push_back(k);
  if (nodes.back() != pts.size() - 1) nodes.push_back(pts.size() - 1);

  struct Frame {
    QuadPoint a, m, b;
    std::array<double, 3> whole;
    int depth;
  };

  for (std::size_t seg = 0; seg + 1 < nodes.size(); ++seg) {
    QuadPoint a;
    a.t = std::log(pts[nodes[seg]].mu);
    a.pt = pts[nodes[seg]];
    a.g = gauss_speed(a.pt);
    QuadPoint b;
    b.t = std::log(pts[nodes[seg + 1]].mu);
    b.pt = pts[nodes[seg + 1]];
    b.g = gauss_speed(b.pt);
    ++evals;
    ++evals;

    std::vector<Frame> stack;
    {
      QuadPoint mid = eval_at(solver, 0.5 * (a.t + b.t), a.pt, evals);
      stack.push_back({a, std::move(mid), b, {}, 0});
      stack.back().whole = simpson(stack.back().a, stack.back().m, stack.back().b);
    }
    while (!stack.empty()) {
      Frame fr = std::move(stack.back());
      stack.pop_back();
      QuadPoint lm = eval_at(solver, 0.5 * (fr.a.t + fr.m.t), fr.a.pt, evals);
      QuadPoint rm = eval_at(solver, 0.5 * (fr.m.t + fr.b.t), fr.b.pt, evals);
      const auto sl = simpson(fr.a, lm, fr.m);
      const auto sr = simpson(fr.m, rm, fr.b);
      double err = 0.0;
      for (std::size_t f = 0; f < 3; ++f)
        err = std::max(err, std::abs(sl[f] + sr[f] - fr.whole[f]) / 15.0);
      const double budget = quad_tol * (fr.b.t - fr.a.t) / t_span;
      if (err <= budget || fr.depth >= 24) {
        for (std::size_t f = 0; f < 3; ++f) {
          const double s2 = sl[f] + sr[f];
          K[f] += s2 + (s2 - fr.whole[f]) / 15.0;
        }
        err_total += err;
      } else {
        stack.push_back({fr.a, std::move(lm), fr.m, sl, fr.depth + 1});
        stack.push_back({fr.m, std::move(rm), fr.b, sr, fr.depth + 1});
      }
    }
  }

  out.K_pd = K[0];
  out.K_p = K[1];
  out.K_d = K[2];
  out.quad_error_estimate = err_total;
  out.n_samples = evals;
  return out;
}

Vector HyperplaneSample::normal(int m, int n) const {
  switch (flavor) {
    case Flavor::PD: {
      Vector h(n + 2 * m);
      h << u, v, w;
      return h;
    }
    case Flavor::P: {
      Vector h(n + m);
      h << u, v;
      return h;
    }
    case Flavor::D: return w;
  }
  return {};
}

HyperplaneSample draw_hyperplane(Flavor f, int m, int n, Xoshiro256pp& rng) {
  HyperplaneSample h;
  h.flavor = f;
  h.u = Vector::Zero(n);
  h.v = Vector::Zero(m);
  h.w = Vector::Zero(m);
  auto fill = [&](Vector& z) {
    for (int i = 0; i < z.size(); ++i) z[i] = rng.gaussian();
  };
  if (f == Flavor::PD || f == Flavor::P) {
    fill(h.u);
    fill(h.v);
  }
  if (f == Flavor::PD || f == Flavor::D) fill(h.w);
  const double norm = std::sqrt(h.u.squaredNorm() + h.v.squaredNorm() + h.w.squaredNorm());
  require(norm > 0.0, Errc::InvalidArgument, "degenerate hyperplane draw");
  h.u /= norm;
  h.v /= norm;
  h.w /= norm;
  return h;
}

int count_sign_changes(const Eigen::RowVectorXd& vals, bool* hit_zero) {
  if (hit_zero) *hit_zero = false;
  int count = 0;
  bool prev_pos = false;
  bool have_prev = false;
  for (int k = 0; k < vals.size(); ++k) {
    const double val = vals[k];
    if (std::abs(val) <= kCrossingZeroTol) {
      if (hit_zero) *hit_zero = true;
      continue;
    }
    const bool pos = val > 0.0;
    if (have_prev && pos != prev_pos) ++count;
    prev_pos = pos;
    have_prev = true;
  }
  return count;
}

CrossingCountResult count_crossings_batch(const std::vector<Matrix>& cell_gammas,
                                          int n_hyperplanes, Xoshiro256pp& rng) {
  require(!cell_gammas.empty(), Errc::InvalidArgument, "no curves given");
  const int dim = static_cast<int>(cell_gammas.front().rows());
  for (const auto& g : cell_gammas)
    require(g.rows() == dim, Errc::DimensionMismatch, "curve dimensions differ");
  const int n_cells = static_cast<int>(cell_gammas.size());

  auto draw_row = [&](Eigen::RowVectorXd& row) {
    double nrm2 = 0.0;
    for (int j = 0; j < dim; ++j) {
      row[j] = rng.gaussian();
      nrm2 += row[j] * row[j];
    }
    row /= std::sqrt(nrm2);
  };

  Matrix H(n_hyperplanes, dim);
  {
    Eigen::RowVectorXd row(dim);
    for (int i = 0; i < n_hyperplanes; ++i) {
      draw_row(row);
      H.row(i) = row;
    }
  }

  CrossingCountResult out;
  out.counts.resize(n_hyperplanes, n_cells);
  std::vector<char> bad(static_cast<std::size_t>(n_hyperplanes), 0);

  constexpr int kBlock = 1024;
  auto count_all = [&](const std::vector<int>& rows) {
    // rows: indices into H to (re)count; empty means every row
    for (int c = 0; c < n_cells; ++c) {
      const Matrix& G = cell_gammas[static_cast<std::size_t>(c)];
      if (rows.empty()) {
        for (int base = 0; base < n_hyperplanes; base += kBlock) {
          const int cnt = std::min(kBlock, n_hyperplanes - base);
          const Matrix S = H.middleRows(base, cnt) * G;
          for (int i = 0; i < cnt; ++i) {
            bool hz = false;
            out.counts(base + i, c) = count_sign_changes(S.row(i), &hz);
            if (hz) bad[static_cast<std::size_t>(base + i)] = 1;
          }
        }
      } else {
        for (int i : rows) {
          bool hz = false;
          out.counts(i, c) = count_sign_changes(H.row(i) * G, &hz);
          if (hz) bad[static_cast<std::size_t>(i)] = 1;
        }
      }
    }
  };

  count_all({});
  for (int round = 0; round < 100; ++round) {
    std::vector<int> redo;
    for (int i = 0; i < n_hyperplanes; ++i)
      if (bad[static_cast<std::size_t>(i)]) redo.push_back(i);
    if (redo.empty()) break;
    Eigen::RowVectorXd row(dim);
    for (int i : redo) {
      draw_row(row);
      H.row(i) = row;
      bad[static_cast<std::size_t>(i)] = 0;
      ++out.redraws;
    }
    count_all(redo);
  }
  out.normals = std::move(H);
  return out;
}

namespace {

CroftonEstimate estimate_from_counts(const Eigen::VectorXi& counts, Flavor flavor) {
  CroftonEstimate est;
  est.flavor = flavor;
  est.n_hyperplanes = counts.size();
  const double n = static_cast<double>(counts.size());
  const Vector cd = counts.cast<double>();
  const double mean = cd.sum() / n;
  est.mean_crossings = mean;
  est.length_estimate = kPi * mean;
  if (counts.size() > 1) {
    const double var = (cd.array() - mean).square().sum() / (n - 1.0);
    est.std_error = kPi * std::sqrt(var / n);
  }
  return est;
}

}  // namespace

CroftonEstimate crofton_length(const Matrix& gammas, Flavor flavor, int n_hyperplanes,
                               Xoshiro256pp& rng) {
  require(n_hyperplanes > 0, Errc::InvalidArgument, "need at least one hyperplane");
  const auto res = count_crossings_batch({gammas}, n_hyperplanes, rng);
  return estimate_from_counts(res.counts.col(0), flavor);
}

CroftonEstimate crofton_length(const std::vector<GaussSample>& samples, Flavor flavor,
                               int n_hyperplanes, Xoshiro256pp& rng) {
  return crofton_length(gauss_matrix(samples, flavor), flavor, n_hyperplanes, rng);
}

int max_crossings(const std::vector<Matrix>& cell_gammas, const Vector& normal) {
  int total = 0;
  for (const auto& G : cell_gammas) {
    require(G.rows() == normal.size(), Errc::DimensionMismatch, "normal dimension mismatch");
    total += count_sign_changes(normal.transpose() * G, nullptr);
  }
  return total;
}

std::pair<double, double> transversality_residual(const PathSolver& solver, const PathPoint& p,
                                                  const HyperplaneSample& h) {
  const auto& inst = solver.cell();
  const int m = inst.m;
  const int n = inst.n;

  const Vector cdot = flavor_velocity(p, h.flavor);
  const double last = h.u.dot(p.xdot) + h.v.dot(p.sdot) + h.w.dot(p.ydot);
  const double phi_res =
      std::max({solver.e1_residual(p), solver.e2_residual(p),
                std::abs(last) / (1.0 + cdot.norm())});

  // Jacobian of the full intersection system in (x, s, y, xdot, sdot, ydot, mu).
  const int dim = 4 * m + 2 * n + 1;
  Matrix J = Matrix::Zero(dim, dim);
  const int cx = 0, cs = n, cy = n + m, cxd = n + 2 * m, csd = 2 * n + 2 * m,
            cyd = 2 * n + 3 * m, cmu = 2 * n + 4 * m;
  int r = 0;
  J.block(r, cx, m, n) = inst.A;
  J.block(r, cs, m, m) = -Matrix::Identity(m, m);
  r += m;
  J.block(r, cy, n, m) = inst.A.transpose();
  r += n;
  J.block(r, cs, m, m) = p.y.asDiagonal();
  J.block(r, cy, m, m) = p.s.asDiagonal();
  J.block(r, cmu, m, 1) = -Vector::Ones(m);
  r += m;
  J.block(r, cxd, m, n) = inst.A;
  J.block(r, csd, m, m) = -Matrix::Identity(m, m);
  r += m;
  J.block(r, cyd, n, m) = inst.A.transpose();
  r += n;
  J.block(r, cs, m, m) = p.ydot.asDiagonal();
  J.block(r, cy, m, m) = p.sdot.asDiagonal();
  J.block(r, csd, m, m) = p.y.asDiagonal();
  J.block(r, cyd, m, m) = p.s.asDiagonal();
  r += m;
  J.block(r, cxd, 1, n) = h.u.transpose();
  J.block(r, csd, 1, m) = h.v.transpose();
  J.block(r, cyd, 1, m) = h.w.transpose();

  Eigen::JacobiSVD<Matrix> svd(J);
  const double min_sv = svd.singularValues()(dim - 1);
  return {phi_res, min_sv};
}

RefinedCrossing refine_crossing(const PathSolver& solver, const PathTrace& trace,
                                std::size_t segment, const HyperplaneSample& h) {
  require(segment + 1 < trace.points.size(), Errc::InvalidArgument, "segment out of range");
  const auto& inst = solver.cell();
  const Vector hn = h.normal(inst.m, inst.n);

  auto gamma_dot = [&](const PathPoint& p) {
    const Vector v = flavor_velocity(p, h.flavor);
    return hn.dot(v) / v.norm();
  };

  PathPoint lo = trace.points[segment];
  PathPoint hi = trace.points[segment + 1];
  double flo = gamma_dot(lo);
  double fhi = gamma_dot(hi);
  require(flo * fhi < 0.0, Errc::InvalidArgument, "segment does not bracket a crossing");

  PathPoint best = std::abs(flo) < std::abs(fhi) ? lo : hi;
  for (int it = 0; it < 120; ++it) {
    const double t_lo = std::log(lo.mu);
    const double t_hi = std::log(hi.mu);
    if (t_hi - t_lo < 1e-15) break;
    const double t_mid = 0.5 * (t_lo + t_hi);
    const PathPoint& warm = (t_mid - t_lo < t_hi - t_mid) ? lo : hi;
    PathPoint mid = solver.point_at(std::exp(t_mid), warm);
    const double fmid = gamma_dot(mid);
    if (std::abs(fmid) < std::abs(gamma_dot(best))) best = mid;
    if (std::abs(fmid) <= 1e-10) break;
    if ((fmid > 0.0) == (flo > 0.0)) {
      lo = std::move(mid);
      flo = fmid;
    } else {
      hi = std::move(mid);
      fhi = fmid;
    }
  }

  RefinedCrossing out;
  out.mu = best.mu;
  auto [phi, sv] = transversality_residual(solver, best, h);
  out.phi_residual = phi;
  out.min_singular_value = sv;
  out.point = std::move(best);
  return out;
}

}  // namespace cplab
