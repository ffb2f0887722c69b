#include "cplab/survey.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "cplab/parallel.hpp"
#include "cplab/rng.hpp"
#include "cplab/sample.hpp"

namespace cplab {

namespace {

constexpr double kPi = std::numbers::pi_v<double>;

long long flavor_bound(const CrossingBounds& b, Flavor f) {
  switch (f) {
    case Flavor::PD: return b.B_pd;
    case Flavor::P: return b.B_p;
    case Flavor::D: return b.B_d;
  }
  return 0;
}

double curvature_sum_bound(int m, int n, Flavor f) {
  const double buck = static_cast<double>(binomial(m - 1, n));
  const double per_cell = f == Flavor::P ? 2.0 * kPi * (n - 1) : 2.0 * kPi * n;
  return per_cell * buck;
}

double curvature_avg_bound(int n, Flavor f) {
  return f == Flavor::P ? 2.0 * kPi * (n - 1) : 2.0 * kPi * n;
}

HyperplaneSample hyperplane_from_row(const Eigen::RowVectorXd& row, Flavor f, int m, int n) {
  HyperplaneSample h;
  h.flavor = f;
  h.u = Vector::Zero(n);
  h.v = Vector::Zero(m);
  h.w = Vector::Zero(m);
  switch (f) {
    case Flavor::PD:
      h.u = row.segment(0, n).transpose();
      h.v = row.segment(n, m).transpose();
      h.w = row.segment(n + m, m).transpose();
      break;
    case Flavor::P:
      h.u = row.segment(0, n).transpose();
      h.v = row.segment(n, m).transpose();
      break;
    case Flavor::D:
      h.w = row.transpose();
      break;
  }
  return h;
}

struct TracedCell {
  SignVector eps;
  PathTrace trace;
  std::vector<GaussSample> samples;
  CurvatureResult curvature;
  std::vector<CroftonEstimate> crofton_by_flavor;
  bool crofton_ok = true;
  bool usable = false;
};

double flavor_K(const CurvatureResult& c, Flavor f) {
  switch (f) {
    case Flavor::PD: return c.K_pd;
    case Flavor::P: return c.K_p;
    case Flavor::D: return c.K_d;
  }
  return 0.0;
}

/// Finite-difference and rescaling spot checks on one traced cell.
void kernel_checks_for_cell(const PathSolver& solver, const TracedCell& tc,
                            const LpInstance& inst, const Tolerances& tol,
                            KernelCheckStats& out) {
  const auto& pts = tc.trace.points;
  const std::size_t stride = std::max<std::size_t>(1, pts.size() / 4);
  for (std::size_t k = stride; k + stride < pts.size(); k += stride) {
    const PathPoint& p = pts[k];
    const double h = 1e-4 * p.mu;
    const PathPoint plus = solver.point_at(p.mu + h, p);
    const PathPoint minus = solver.point_at(p.mu - h, p);

    Vector v(inst.n + 2 * inst.m), vfd(inst.n + 2 * inst.m);
    v << p.xdot, p.sdot, p.ydot;
    vfd << (plus.x - minus.x) / (2 * h), (plus.s - minus.s) / (2 * h),
        (plus.y - minus.y) / (2 * h);
    out.fd_velocity_rel_max =
        std::max(out.fd_velocity_rel_max, (vfd - v).norm() / v.norm());

    // Gauss-curve speed against a finite difference of gamma itself.
    auto gamma_pd = [&](const PathPoint& q) {
      Vector g(inst.n + 2 * inst.m);
      g << q.xdot, q.sdot, q.ydot;
      return Vector(g / g.norm());
    };
    const FlavorKappa kap = curvature_vector(p);
    const double speed = v.norm();
    const double analytic = kap.pd.norm() * speed;
    const double fd = (gamma_pd(plus) - gamma_pd(minus)).norm() / (2 * h);
    if (analytic > 1e-12)
      out.gauss_fd_rel_max =
          std::max(out.gauss_fd_rel_max, std::abs(fd - analytic) / analytic);
  }

  // Rescaling c by lambda reparametrizes the path: y' = lambda y at mu' = lambda mu.
  {
    const double lambda = 3.5;
    LpInstance scaled = inst;
    scaled.c *= lambda;
    PathSolver solver2(scaled, tc.eps, tol);
    for (std::size_t k = stride; k + stride < pts.size(); k += stride) {
      const PathPoint& p = pts[k];
      PathPoint warm;
      warm.x = p.x;
      warm.s = p.s;
      warm.y = lambda * p.y;
      const PathPoint q = solver2.newton_correct(lambda * p.mu, warm);
      const double dx = (q.x - p.x).cwiseAbs().maxCoeff();
      const double ds = (q.s - p.s).cwiseAbs().maxCoeff();
      out.rescale_max_diff = std::max({out.rescale_max_diff, dx, ds});
    }
  }
}

/// Chord length of the Gauss curve on a uniform t-grid with 10x the trace's
/// point count; the adaptive quadrature should match it closely.
void refined_chord_check(const PathSolver& solver, const TracedCell& tc,
                         KernelCheckStats& out) {
  const auto& pts = tc.trace.points;
  const double t_lo = std::log(tc.trace.mu_lo);
  const double t_hi = std::log(tc.trace.mu_hi);
  const int N = static_cast<int>(pts.size()) * 10;

  std::array<double, 3> chord{};
  PathPoint prev = pts.front();
  std::array<Vector, 3> prev_gamma;
  auto gammas = [&](const PathPoint& p) {
    std::array<Vector, 3> g;
    Vector vpd(p.x.size() + 2 * p.s.size());
    vpd << p.xdot, p.sdot, p.ydot;
    Vector vp(p.x.size() + p.s.size());
    vp << p.xdot, p.sdot;
    g[0] = vpd / vpd.norm();
    g[1] = vp / vp.norm();
    g[2] = p.ydot / p.ydot.norm();
    return g;
  };
  prev_gamma = gammas(prev);
  std::size_t warm_idx = 0;
  for (int k = 1; k <= N; ++k) {
    const double t = t_lo + (t_hi - t_lo) * k / N;
    const double mu = std::exp(t);
    while (warm_idx + 1 < pts.size() && pts[warm_idx + 1].mu <= mu) ++warm_idx;
    const PathPoint q = solver.point_at(mu, prev.mu <= pts[warm_idx].mu ? pts[warm_idx] : prev);
    const auto g = gammas(q);
    for (std::size_t f = 0; f < 3; ++f) chord[f] += (g[f] - prev_gamma[f]).norm();
    prev = q;
    prev_gamma = g;
  }
  const double K[3] = {tc.curvature.K_pd, tc.curvature.K_p, tc.curvature.K_d};
  for (std::size_t f = 0; f < 3; ++f) {
    const double denom = std::max(K[f], 1e-6);
    out.quad_refined_rel_max =
        std::max(out.quad_refined_rel_max, std::abs(chord[f] - K[f]) / denom);
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  require(n >= 1 && m > n, Errc::BadDims, "need m > n >= 1");
  require(m <= 20, Errc::CapExceeded, "m capped at 20");
  require(n_instances >= 1, Errc::InvalidArgument, "need at least one instance");
  require(n_hyperplanes >= 0, Errc::InvalidArgument, "negative hyperplane count");
  require(!flavors.empty(), Errc::InvalidArgument, "need at least one flavor");
  tolerances.validate();
}

InstanceReport survey_instance(const ExperimentConfig& config, int index) {
  const Tolerances& tol = config.tolerances;
  InstanceReport rep;
  rep.index = index;
  rep.instance_seed = mix_seed(config.seed, static_cast<std::uint64_t>(index));
  rep.refine_min_sv = std::numeric_limits<double>::infinity();

  LpInstance inst = sample_instance(config.m, config.n, rep.instance_seed, tol);
  rep.arrangement = enumerate_cells(inst, tol, config.cell_cap_exponent);

  std::vector<std::string> flag_reasons;
  if (rep.arrangement.degenerate_count > 0) flag_reasons.push_back("degenerate_cells");
  for (const auto& cell : rep.arrangement.per_cell)
    if (cell.condition_flag) {
      flag_reasons.push_back("cell_condition_flag:" + cell.eps.str());
      break;
    }

  // Trace every bounded strict cell.
  std::vector<TracedCell> traced;
  std::vector<PathSolver> solvers;
  for (const auto& cell : rep.arrangement.per_cell) {
    if (cell.primal_status != PrimalStatus::BoundedStrict) continue;
    TracedCell tc;
    tc.eps = cell.eps;
    tc.curvature.eps = cell.eps;
    PathSolver solver(inst, cell.eps, tol);
    try {
      tc.trace = solver.trace(*cell.witness_x, config.trace);
      if (tc.trace.capped()) {
        tc.curvature.excluded = true;
        tc.curvature.excluded_reason = "tail_capped";
      } else {
        double cond_max = 0.0;
        for (const auto& p : tc.trace.points) cond_max = std::max(cond_max, p.cond_estimate);
        if (cond_max > tol.cond_cap) {
          tc.curvature.excluded = true;
          tc.curvature.excluded_reason = "ill_conditioned";
        } else {
          tc.samples = gauss_curve(tc.trace);
          tc.curvature = total_curvature(solver, tc.trace, tol.quad_tol);
          tc.usable = true;
        }
      }
    } catch (const Error& e) {
      tc.curvature.excluded = true;
      tc.curvature.excluded_reason = errc_name(e.code());
    }
    if (tc.curvature.excluded) {
      rep.exclusions.emplace_back(tc.eps.str(), tc.curvature.excluded_reason);
      flag_reasons.push_back("excluded:" + tc.eps.str() + ":" + tc.curvature.excluded_reason);
    }
    traced.push_back(std::move(tc));
    solvers.push_back(std::move(solver));
  }

  // Residual and duality-gap maxima over every accepted point.
  for (std::size_t ci = 0; ci < traced.size(); ++ci) {
    if (!traced[ci].usable) continue;
    const auto& solver = solvers[ci];
    for (const auto& p : traced[ci].trace.points) {
      rep.e1_residual_max = std::max(rep.e1_residual_max, solver.e1_residual(p));
      rep.e2_residual_max = std::max(rep.e2_residual_max, solver.e2_residual(p));
      rep.accel_residual_max = std::max(rep.accel_residual_max, solver.accel_residual(p));
      const double gap = std::abs(p.s.dot(p.y) - inst.m * p.mu);
      rep.gap_rel_max = std::max(rep.gap_rel_max, gap / (inst.m * (1.0 + p.mu)));
    }
  }

  // Sums and averages over the usable cells.
  rep.traced_cells = 0;
  for (const auto& tc : traced)
    if (tc.usable) ++rep.traced_cells;
  for (int fi = 0; fi < 3; ++fi) {
    const auto f = static_cast<Flavor>(fi);
    double sum = 0.0;
    for (const auto& tc : traced)
      if (tc.usable) sum += flavor_K(tc.curvature, f);
    rep.sum_K[static_cast<std::size_t>(fi)] = sum;
    rep.avg_K[static_cast<std::size_t>(fi)] =
        rep.traced_cells > 0 ? sum / static_cast<double>(rep.traced_cells) : 0.0;
    rep.margin_sum[static_cast<std::size_t>(fi)] =
        curvature_sum_bound(config.m, config.n, f) - sum;
    rep.margin_avg[static_cast<std::size_t>(fi)] =
        curvature_avg_bound(config.n, f) - rep.avg_K[static_cast<std::size_t>(fi)];
  }

  // Crofton estimates, crossing bounds, and bisection-refined transversality
  // checks share one hyperplane stream per flavor.
  const CrossingBounds bounds = crossing_bounds(config.m, config.n);
  rep.crossing_bound_ok = true;
  for (const Flavor f : config.flavors) {
    std::vector<Matrix> gammas;
    std::vector<std::size_t> cell_of_gamma;
    for (std::size_t ci = 0; ci < traced.size(); ++ci) {
      if (!traced[ci].usable) continue;
      gammas.push_back(gauss_matrix(traced[ci].samples, f));
      cell_of_gamma.push_back(ci);
    }
    if (gammas.empty() || config.n_hyperplanes <= 0) continue;

    Xoshiro256pp rng(mix_seed(rep.instance_seed, 1000 + static_cast<std::uint64_t>(f)));
    const auto cc = count_crossings_batch(gammas, config.n_hyperplanes, rng);

    for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
      auto& tc = traced[cell_of_gamma[gi]];
      CroftonEstimate est;
      est.flavor = f;
      est.n_hyperplanes = config.n_hyperplanes;
      const Eigen::VectorXi col = cc.counts.col(static_cast<int>(gi));
      const Vector cd = col.cast<double>();
      est.mean_crossings = cd.mean();
      est.length_estimate = kPi * est.mean_crossings;
      est.std_error = col.size() > 1
                          ? kPi * std::sqrt((cd.array() - est.mean_crossings).square().sum() /
                                            (cd.size() - 1.0) / cd.size())
                          : 0.0;
      tc.crofton_by_flavor.push_back(est);

      const double K = flavor_K(tc.curvature, f);
      // The plug-in standard error degenerates when few or no crossings are
      // observed (a short arc can legitimately see zero hits); floor it with
      // the Poisson error of the count expected under K, the way chi-square
      // tests use expected rather than observed bins. A tiny absolute slack
      // covers the exactly-zero-curvature case.
      const double n_h = static_cast<double>(est.n_hyperplanes);
      const double expected_total = K * n_h / kPi;
      const double se_floor = kPi * std::sqrt(std::max(1.0, expected_total)) / n_h;
      const double se = std::max(est.std_error, se_floor);
      if (std::abs(est.length_estimate - K) > 3.0 * se + 0.02 * K + 1e-9)
        tc.crofton_ok = false;
    }

    long long maxc = 0;
    for (int i = 0; i < cc.counts.rows(); ++i) {
      const long long summed = cc.counts.row(i).sum();
      maxc = std::max(maxc, summed);
      if (f == Flavor::PD) ++rep.crossing_histogram_pd[static_cast<int>(summed)];
    }
    rep.max_crossings[static_cast<int>(f)] = maxc;
    if (maxc > flavor_bound(bounds, f)) rep.crossing_bound_ok = false;

    // Refine every crossing of the first few hyperplanes in the stream.
    const int n_refine = std::min(config.n_refine_hyperplanes,
                                  static_cast<int>(cc.normals.rows()));
    for (int hi = 0; hi < n_refine; ++hi) {
      const HyperplaneSample h =
          hyperplane_from_row(cc.normals.row(hi), f, config.m, config.n);
      for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
        const auto& tc = traced[cell_of_gamma[gi]];
        const Eigen::RowVectorXd vals = cc.normals.row(hi) * gammas[gi];
        for (int k = 0; k + 1 < vals.size(); ++k) {
          if (vals[k] * vals[k + 1] < 0.0 &&
              std::max(std::abs(vals[k]), std::abs(vals[k + 1])) > 1e-6) {
            // sign flips entirely inside the direction noise band are not
            // resolvable crossings; skip refining those
            const auto ref = refine_crossing(solvers[cell_of_gamma[gi]], tc.trace,
                                             static_cast<std::size_t>(k), h);
            rep.refine_phi_max = std::max(rep.refine_phi_max, ref.phi_residual);
            rep.refine_min_sv = std::min(rep.refine_min_sv, ref.min_singular_value);
            ++rep.refined_crossings;
          }
        }
      }
    }
  }

  if (!rep.crossing_bound_ok) flag_reasons.push_back("crossing_bound_violation");

  // Kernel spot checks on the first instance only (they re-solve many points).
  if (config.kernel_checks && index == 0) {
    rep.kernel.ran = true;
    int done = 0;
    for (std::size_t ci = 0; ci < traced.size() && done < 2; ++ci) {
      if (!traced[ci].usable) continue;
      kernel_checks_for_cell(solvers[ci], traced[ci], inst, tol, rep.kernel);
      refined_chord_check(solvers[ci], traced[ci], rep.kernel);
      ++done;
    }
  }

  // Assemble per-cell reports in enumeration order.
  for (auto& tc : traced) {
    CellCurvatureReport cr;
    cr.curvature = std::move(tc.curvature);
    cr.crofton = std::move(tc.crofton_by_flavor);
    cr.tail_flags = tc.trace.truncation_flags;
    cr.crofton_consistent = tc.crofton_ok;
    if (!tc.crofton_ok) flag_reasons.push_back("crofton_inconsistent:" + tc.eps.str());
    rep.cells.push_back(std::move(cr));
  }

  if (rep.refined_crossings == 0) rep.refine_min_sv = 0.0;

  rep.flagged = !flag_reasons.empty();
  if (rep.flagged) {
    std::ostringstream os;
    for (std::size_t i = 0; i < flag_reasons.size(); ++i) {
      if (i) os << ';';
      os << flag_reasons[i];
    }
    rep.flag_reason = os.str();
  }
  return rep;
}

SurveyReport run_survey(const ExperimentConfig& config) {
  config.validate();
  SurveyReport out;
  out.config = config;
  out.per_instance.resize(static_cast<std::size_t>(config.n_instances));

  parallel_for(config.n_instances, [&](int i) {
    out.per_instance[static_cast<std::size_t>(i)] = survey_instance(config, i);
  });

  auto& ag = out.aggregate;
  ag.instances = config.n_instances;
  ag.bounds = crossing_bounds(config.m, config.n);
  ag.refine_min_sv = std::numeric_limits<double>::infinity();
  std::array<double, 3> sum_avg{};
  long long with_cells = 0;

  for (const auto& ir : out.per_instance) {
    if (ir.flagged) ++ag.flagged_instances;
    if (ir.arrangement.bounded_strict_count != ir.arrangement.buck_expected)
      ++ag.buck_mismatch_count;
    if (ir.arrangement.joint_count != ir.arrangement.joint_expected) ++ag.joint_mismatch_count;
    for (int f = 0; f < 3; ++f) {
      const auto fi = static_cast<std::size_t>(f);
      if (ir.traced_cells > 0) {
        sum_avg[fi] += ir.avg_K[fi];
        ag.max_avg_K[fi] = std::max(ag.max_avg_K[fi], ir.avg_K[fi]);
      }
      ag.max_crossings[fi] = std::max(ag.max_crossings[fi], ir.max_crossings[fi]);
    }
    if (ir.traced_cells > 0) ++with_cells;
    if (!ir.flagged) {
      // bound violations only count against clean instances
      for (int f = 0; f < 3; ++f) {
        const auto fi = static_cast<std::size_t>(f);
        if (ir.margin_avg[fi] < -1e-2 || ir.margin_sum[fi] < -1e-2) ++ag.bound_violation_count;
      }
    }
    if (!ir.crossing_bound_ok) ++ag.crossing_violation_count;
    for (const auto& cell : ir.cells)
      if (!cell.crofton_consistent) ++ag.crofton_inconsistent_count;
    for (const auto& [k, v] : ir.crossing_histogram_pd) ag.crossing_histogram_pd[k] += v;
    ag.e1_residual_max = std::max(ag.e1_residual_max, ir.e1_residual_max);
    ag.e2_residual_max = std::max(ag.e2_residual_max, ir.e2_residual_max);
    ag.accel_residual_max = std::max(ag.accel_residual_max, ir.accel_residual_max);
    ag.gap_rel_max = std::max(ag.gap_rel_max, ir.gap_rel_max);
    ag.refine_phi_max = std::max(ag.refine_phi_max, ir.refine_phi_max);
    if (ir.refined_crossings > 0) ag.refine_min_sv = std::min(ag.refine_min_sv, ir.refine_min_sv);
    if (ir.kernel.ran) ag.kernel = ir.kernel;
  }
  if (!std::isfinite(ag.refine_min_sv)) ag.refine_min_sv = 0.0;
  for (int f = 0; f < 3; ++f)
    ag.mean_avg_K[static_cast<std::size_t>(f)] =
        with_cells > 0 ? sum_avg[static_cast<std::size_t>(f)] / static_cast<double>(with_cells)
                       : 0.0;
  return out;
}

}  // namespace cplab
