#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cplab/arrangement.hpp"
#include "cplab/bezout.hpp"
#include "cplab/centralpath.hpp"
#include "cplab/curvature.hpp"
#include "cplab/types.hpp"

namespace cplab {

struct ExperimentConfig {
  int m = 5;
  int n = 2;
  int n_instances = 1;
  std::uint64_t seed = 1;
  Tolerances tolerances;
  int n_hyperplanes = 10000;
  std::vector<Flavor> flavors = {Flavor::PD, Flavor::P, Flavor::D};
  std::string output_dir = ".";
  std::set<std::string> emit = {"json", "csv"};

  // plumbing knobs
  TraceOptions trace;
  int n_refine_hyperplanes = 5;  // hyperplanes whose crossings get bisection-refined
  bool kernel_checks = true;     // finite-difference / rescaling spot checks on instance 0
  int cell_cap_exponent = 20;

  void validate() const;
};

/// Per-cell curvature record within one instance.
struct CellCurvatureReport {
  CurvatureResult curvature;
  std::vector<CroftonEstimate> crofton;  // one per requested flavor
  unsigned tail_flags = 0;
  bool crofton_consistent = true;  // |pi mean - K| <= 3 se + 0.02 K per flavor
};

/// Numerical-kernel spot checks (run on one instance per survey).
struct KernelCheckStats {
  bool ran = false;
  double fd_velocity_rel_max = 0.0;      // central differences vs solved velocity
  double gauss_fd_rel_max = 0.0;         // |kappa| * speed vs finite-differenced gamma
  double quad_refined_rel_max = 0.0;     // adaptive K vs 10x uniform chord sum
  double rescale_max_diff = 0.0;         // c -> lambda c path-set invariance
};

struct InstanceReport {
  int index = 0;
  std::uint64_t instance_seed = 0;
  ArrangementSummary arrangement;
  std::vector<CellCurvatureReport> cells;  // one per BoundedStrict cell, eps order

  long long traced_cells = 0;
  std::array<double, 3> sum_K{};   // by flavor index
  std::array<double, 3> avg_K{};
  std::array<double, 3> margin_sum{};  // bound - observed, sum form
  std::array<double, 3> margin_avg{};  // bound - observed, average form

  std::array<long long, 3> max_crossings{};  // over the hyperplane stream
  bool crossing_bound_ok = true;
  std::map<int, long long> crossing_histogram_pd;  // summed crossings -> frequency

  double refine_phi_max = 0.0;
  double refine_min_sv = 0.0;
  long long refined_crossings = 0;

  double e1_residual_max = 0.0;
  double e2_residual_max = 0.0;
  double accel_residual_max = 0.0;
  double gap_rel_max = 0.0;  // |s.y - m mu| / (m (1 + mu))

  std::vector<std::pair<std::string, std::string>> exclusions;  // (eps, reason)
  bool flagged = false;
  std::string flag_reason;
  KernelCheckStats kernel;
};

struct SurveyAggregate {
  long long instances = 0;
  long long flagged_instances = 0;
  long long buck_mismatch_count = 0;
  long long joint_mismatch_count = 0;
  long long bound_violation_count = 0;
  long long crossing_violation_count = 0;
  long long crofton_inconsistent_count = 0;
  std::array<double, 3> mean_avg_K{};
  std::array<double, 3> max_avg_K{};
  std::array<long long, 3> max_crossings{};
  CrossingBounds bounds;
  std::map<int, long long> crossing_histogram_pd;  // summed crossings -> frequency
  double e1_residual_max = 0.0;
  double e2_residual_max = 0.0;
  double accel_residual_max = 0.0;
  double gap_rel_max = 0.0;
  double refine_phi_max = 0.0;
  double refine_min_sv = 0.0;
  KernelCheckStats kernel;
};

struct SurveyReport {
  ExperimentConfig config;
  std::vector<InstanceReport> per_instance;
  SurveyAggregate aggregate;
};

/// Runs the full experiment: sample, enumerate, trace, integrate, cross-check.
/// Deterministic for a fixed config; per-cell failures land in the exclusion
/// ledger instead of aborting.
SurveyReport run_survey(const ExperimentConfig& config);

/// Computes one instance's report (index already fixed in the config stream).
InstanceReport survey_instance(const ExperimentConfig& config, int index);

}  // namespace cplab
