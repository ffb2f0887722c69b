#include "cplab/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace cplab {

namespace {

Json vector_to_json(const Vector& v) {
  Json a = Json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vector vector_from_json(const Json& j) {
  Vector v(static_cast<int>(j.size()));
  for (int i = 0; i < v.size(); ++i) v[i] = j[static_cast<std::size_t>(i)].get<double>();
  return v;
}

Json tolerances_to_json(const Tolerances& t) {
  Json j;
  j["newton_tol"] = t.newton_tol;
  j["rank_tol"] = t.rank_tol;
  j["solve_tol"] = t.solve_tol;
  j["feas_margin"] = t.feas_margin;
  j["quad_tol"] = t.quad_tol;
  j["tail_tol"] = t.tail_tol;
  j["cond_cap"] = t.cond_cap;
  return j;
}

Tolerances tolerances_from_json(const Json& j) {
  Tolerances t;
  if (j.contains("newton_tol")) t.newton_tol = j["newton_tol"].get<double>();
  if (j.contains("rank_tol")) t.rank_tol = j["rank_tol"].get<double>();
  if (j.contains("solve_tol")) t.solve_tol = j["solve_tol"].get<double>();
  if (j.contains("feas_margin")) t.feas_margin = j["feas_margin"].get<double>();
  if (j.contains("quad_tol")) t.quad_tol = j["quad_tol"].get<double>();
  if (j.contains("tail_tol")) t.tail_tol = j["tail_tol"].get<double>();
  if (j.contains("cond_cap")) t.cond_cap = j["cond_cap"].get<double>();
  return t;
}

Flavor flavor_from_string(const std::string& s) {
  if (s == "PD") return Flavor::PD;
  if (s == "P") return Flavor::P;
  if (s == "D") return Flavor::D;
  fail(Errc::InvalidArgument, "unknown flavor '" + s + "'");
}

Json crofton_to_json(const CroftonEstimate& e) {
  Json j;
  j["flavor"] = to_string(e.flavor);
  j["n_hyperplanes"] = e.n_hyperplanes;
  j["mean_crossings"] = e.mean_crossings;
  j["length_estimate"] = e.length_estimate;
  j["std_error"] = e.std_error;
  return j;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Json instance_to_json(const LpInstance& inst) {
  Json j;
  j["m"] = inst.m;
  j["n"] = inst.n;
  Json a = Json::array();
  for (int i = 0; i < inst.m; ++i)
    for (int k = 0; k < inst.n; ++k) a.push_back(inst.A(i, k));
  j["A"] = std::move(a);  // row-major
  j["b"] = vector_to_json(inst.b);
  j["c"] = vector_to_json(inst.c);
  if (inst.seed)
    j["seed"] = *inst.seed;
  else
    j["seed"] = nullptr;
  return j;
}

LpInstance instance_from_json(const Json& j, const Tolerances& tol) {
  LpInstance inst;
  inst.m = j.at("m").get<int>();
  inst.n = j.at("n").get<int>();
  const auto& a = j.at("A");
  require(static_cast<int>(a.size()) == inst.m * inst.n, Errc::DimensionMismatch,
          "A has wrong length");
  inst.A.resize(inst.m, inst.n);
  for (int i = 0; i < inst.m; ++i)
    for (int k = 0; k < inst.n; ++k)
      inst.A(i, k) = a[static_cast<std::size_t>(i * inst.n + k)].get<double>();
  inst.b = vector_from_json(j.at("b"));
  inst.c = vector_from_json(j.at("c"));
  if (j.contains("seed") && !j["seed"].is_null()) inst.seed = j["seed"].get<std::uint64_t>();
  inst.validate(tol);
  return inst;
}

Json config_to_json(const ExperimentConfig& cfg) {
  Json j;
  j["m"] = cfg.m;
  j["n"] = cfg.n;
  j["n_instances"] = cfg.n_instances;
  j["seed"] = cfg.seed;
  j["n_hyperplanes"] = cfg.n_hyperplanes;
  Json fl = Json::array();
  for (auto f : cfg.flavors) fl.push_back(to_string(f));
  j["flavors"] = std::move(fl);
  j["output_dir"] = cfg.output_dir;
  Json em = Json::array();
  for (const auto& e : cfg.emit) em.push_back(e);
  j["emit"] = std::move(em);
  j["tolerances"] = tolerances_to_json(cfg.tolerances);
  Json tr;
  tr["turn_max"] = cfg.trace.turn_max;
  tr["dt_init"] = cfg.trace.dt_init;
  tr["dt_max"] = cfg.trace.dt_max;
  tr["dt_min"] = cfg.trace.dt_min;
  tr["t_cap"] = cfg.trace.t_cap;
  tr["mu_seed_fallback"] = cfg.trace.mu_seed_fallback;
  tr["max_points"] = cfg.trace.max_points;
  j["trace"] = std::move(tr);
  j["n_refine_hyperplanes"] = cfg.n_refine_hyperplanes;
  j["kernel_checks"] = cfg.kernel_checks;
  j["cell_cap_exponent"] = cfg.cell_cap_exponent;
  return j;
}

ExperimentConfig config_from_json(const Json& j) {
  ExperimentConfig cfg;
  if (j.contains("m")) cfg.m = j["m"].get<int>();
  if (j.contains("n")) cfg.n = j["n"].get<int>();
  if (j.contains("n_instances")) cfg.n_instances = j["n_instances"].get<int>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("n_hyperplanes")) cfg.n_hyperplanes = j["n_hyperplanes"].get<int>();
  if (j.contains("flavors")) {
    cfg.flavors.clear();
    for (const auto& f : j["flavors"]) cfg.flavors.push_back(flavor_from_string(f.get<std::string>()));
  }
  if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
  if (j.contains("emit")) {
    cfg.emit.clear();
    for (const auto& e : j["emit"]) cfg.emit.insert(e.get<std::string>());
  }
  if (j.contains("tolerances")) cfg.tolerances = tolerances_from_json(j["tolerances"]);
  if (j.contains("trace")) {
    const auto& tr = j["trace"];
    if (tr.contains("turn_max")) cfg.trace.turn_max = tr["turn_max"].get<double>();
    if (tr.contains("dt_init")) cfg.trace.dt_init = tr["dt_init"].get<double>();
    if (tr.contains("dt_max")) cfg.trace.dt_max = tr["dt_max"].get<double>();
    if (tr.contains("dt_min")) cfg.trace.dt_min = tr["dt_min"].get<double>();
    if (tr.contains("t_cap")) cfg.trace.t_cap = tr["t_cap"].get<double>();
    if (tr.contains("mu_seed_fallback"))
      cfg.trace.mu_seed_fallback = tr["mu_seed_fallback"].get<double>();
    if (tr.contains("max_points")) cfg.trace.max_points = tr["max_points"].get<int>();
  }
  if (j.contains("n_refine_hyperplanes"))
    cfg.n_refine_hyperplanes = j["n_refine_hyperplanes"].get<int>();
  if (j.contains("kernel_checks")) cfg.kernel_checks = j["kernel_checks"].get<bool>();
  if (j.contains("cell_cap_exponent")) cfg.cell_cap_exponent = j["cell_cap_exponent"].get<int>();
  return cfg;
}

Json arrangement_to_json(const ArrangementSummary& s, bool include_witnesses) {
  Json j;
  j["m"] = s.m;
  j["n"] = s.n;
  j["bounded_strict_count"] = s.bounded_strict_count;
  j["buck_expected"] = s.buck_expected;
  j["joint_count"] = s.joint_count;
  j["joint_expected"] = s.joint_expected;
  j["degenerate_count"] = s.degenerate_count;
  j["empty_count"] = s.empty_count;
  j["unbounded_count"] = s.unbounded_count;
  Json cells = Json::array();
  for (const auto& c : s.per_cell) {
    Json jc;
    jc["eps"] = c.eps.str();
    jc["primal_status"] = to_string(c.primal_status);
    jc["dual_strict"] = c.dual_strict;
    jc["jointly_strict"] = c.jointly_strict;
    jc["condition_flag"] = c.condition_flag;
    if (include_witnesses) {
      if (c.witness_x) jc["witness_x"] = vector_to_json(*c.witness_x);
      if (c.witness_gamma) jc["witness_gamma"] = vector_to_json(*c.witness_gamma);
    }
    cells.push_back(std::move(jc));
  }
  j["cells"] = std::move(cells);
  return j;
}

Json survey_to_json(const SurveyReport& r) {
  Json j;
  j["config"] = config_to_json(r.config);

  Json instances = Json::array();
  for (const auto& ir : r.per_instance) {
    Json ji;
    ji["index"] = ir.index;
    ji["instance_seed"] = ir.instance_seed;
    ji["arrangement"] = arrangement_to_json(ir.arrangement, false);
    Json cells = Json::array();
    for (const auto& cc : ir.cells) {
      Json jc;
      jc["eps"] = cc.curvature.eps.str();
      jc["K_pd"] = cc.curvature.K_pd;
      jc["K_p"] = cc.curvature.K_p;
      jc["K_d"] = cc.curvature.K_d;
      jc["quad_error_estimate"] = cc.curvature.quad_error_estimate;
      jc["n_samples"] = cc.curvature.n_samples;
      jc["excluded"] = cc.curvature.excluded;
      jc["excluded_reason"] = cc.curvature.excluded_reason;
      jc["tail_flags"] = cc.tail_flags;
      jc["crofton_consistent"] = cc.crofton_consistent;
      Json cro = Json::array();
      for (const auto& e : cc.crofton) cro.push_back(crofton_to_json(e));
      jc["crofton"] = std::move(cro);
      cells.push_back(std::move(jc));
    }
    ji["cells"] = std::move(cells);
    ji["traced_cells"] = ir.traced_cells;
    Json sums, avgs, msum, mavg, mc;
    for (int f = 0; f < 3; ++f) {
      const char* name = to_string(static_cast<Flavor>(f));
      sums[name] = ir.sum_K[static_cast<std::size_t>(f)];
      avgs[name] = ir.avg_K[static_cast<std::size_t>(f)];
      msum[name] = ir.margin_sum[static_cast<std::size_t>(f)];
      mavg[name] = ir.margin_avg[static_cast<std::size_t>(f)];
      mc[name] = ir.max_crossings[static_cast<std::size_t>(f)];
    }
    ji["sum_K"] = std::move(sums);
    ji["avg_K"] = std::move(avgs);
    ji["margin_sum"] = std::move(msum);
    ji["margin_avg"] = std::move(mavg);
    ji["max_crossings"] = std::move(mc);
    ji["crossing_bound_ok"] = ir.crossing_bound_ok;
    ji["refined_crossings"] = ir.refined_crossings;
    ji["refine_phi_max"] = ir.refine_phi_max;
    ji["refine_min_sv"] = ir.refine_min_sv;
    ji["e1_residual_max"] = ir.e1_residual_max;
    ji["e2_residual_max"] = ir.e2_residual_max;
    ji["accel_residual_max"] = ir.accel_residual_max;
    ji["gap_rel_max"] = ir.gap_rel_max;
    Json excl = Json::array();
    for (const auto& [eps, reason] : ir.exclusions) {
      Json je;
      je["eps"] = eps;
      je["reason"] = reason;
      excl.push_back(std::move(je));
    }
    ji["exclusions"] = std::move(excl);
    ji["flagged"] = ir.flagged;
    ji["flag_reason"] = ir.flag_reason;
    instances.push_back(std::move(ji));
  }
  j["per_instance"] = std::move(instances);

  const auto& ag = r.aggregate;
  Json ja;
  ja["instances"] = ag.instances;
  ja["flagged_instances"] = ag.flagged_instances;
  ja["buck_mismatch_count"] = ag.buck_mismatch_count;
  ja["joint_mismatch_count"] = ag.joint_mismatch_count;
  ja["bound_violation_count"] = ag.bound_violation_count;
  ja["crossing_violation_count"] = ag.crossing_violation_count;
  ja["crofton_inconsistent_count"] = ag.crofton_inconsistent_count;
  Json mean_avg, max_avg, max_cross;
  for (int f = 0; f < 3; ++f) {
    const char* name = to_string(static_cast<Flavor>(f));
    mean_avg[name] = ag.mean_avg_K[static_cast<std::size_t>(f)];
    max_avg[name] = ag.max_avg_K[static_cast<std::size_t>(f)];
    max_cross[name] = ag.max_crossings[static_cast<std::size_t>(f)];
  }
  ja["mean_avg_K"] = std::move(mean_avg);
  ja["max_avg_K"] = std::move(max_avg);
  ja["max_crossings"] = std::move(max_cross);
  Json bounds;
  bounds["B_PD"] = ag.bounds.B_pd;
  bounds["B_P"] = ag.bounds.B_p;
  bounds["B_D"] = ag.bounds.B_d;
  bounds["spurious"] = ag.bounds.spurious;
  ja["crossing_bounds"] = std::move(bounds);
  Json hist = Json::array();
  for (const auto& [k, v] : ag.crossing_histogram_pd) {
    Json he;
    he["crossings"] = k;
    he["count"] = v;
    hist.push_back(std::move(he));
  }
  ja["crossing_histogram_pd"] = std::move(hist);
  ja["e1_residual_max"] = ag.e1_residual_max;
  ja["e2_residual_max"] = ag.e2_residual_max;
  ja["accel_residual_max"] = ag.accel_residual_max;
  ja["gap_rel_max"] = ag.gap_rel_max;
  ja["refine_phi_max"] = ag.refine_phi_max;
  ja["refine_min_sv"] = ag.refine_min_sv;
  Json kc;
  kc["ran"] = ag.kernel.ran;
  kc["fd_velocity_rel_max"] = ag.kernel.fd_velocity_rel_max;
  kc["gauss_fd_rel_max"] = ag.kernel.gauss_fd_rel_max;
  kc["quad_refined_rel_max"] = ag.kernel.quad_refined_rel_max;
  kc["rescale_max_diff"] = ag.kernel.rescale_max_diff;
  ja["kernel_checks"] = std::move(kc);
  j["aggregate"] = std::move(ja);
  return j;
}

std::string survey_to_csv(const SurveyReport& r) {
  std::ostringstream os;
  os << "instance,eps,flavor,K,quad_error_estimate,n_samples,crofton_mean_crossings,"
        "crofton_length,crofton_std_error,excluded,reason,tail_flags\n";
  for (const auto& ir : r.per_instance) {
    for (const auto& cc : ir.cells) {
      const double K[3] = {cc.curvature.K_pd, cc.curvature.K_p, cc.curvature.K_d};
      for (std::size_t f = 0; f < r.config.flavors.size(); ++f) {
        const Flavor flavor = r.config.flavors[f];
        os << ir.index << ',' << cc.curvature.eps.str() << ',' << to_string(flavor) << ','
           << format_double(K[static_cast<int>(flavor)]) << ','
           << format_double(cc.curvature.quad_error_estimate) << ',' << cc.curvature.n_samples
           << ',';
        if (f < cc.crofton.size()) {
          os << format_double(cc.crofton[f].mean_crossings) << ','
             << format_double(cc.crofton[f].length_estimate) << ','
             << format_double(cc.crofton[f].std_error) << ',';
        } else {
          os << ",,,";
        }
        os << (cc.curvature.excluded ? 1 : 0) << ',' << cc.curvature.excluded_reason << ','
           << cc.tail_flags << '\n';
      }
    }
  }
  return os.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), Errc::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  require(out.good(), Errc::Io, "cannot write " + path);
  out << contents;
  require(out.good(), Errc::Io, "write failed for " + path);
}

std::string instance_file_name(std::uint64_t seed, int k) {
  return "instance-" + std::to_string(seed) + "-" + std::to_string(k) + ".json";
}

std::string survey_file_name(std::uint64_t seed, const std::string& ext) {
  return "survey-" + std::to_string(seed) + "." + ext;
}

void write_survey_outputs(const SurveyReport& r, const std::vector<LpInstance>& instances) {
  const auto dir = std::filesystem::path(r.config.output_dir);
  std::filesystem::create_directories(dir);
  for (std::size_t k = 0; k < instances.size(); ++k) {
    const auto path = dir / instance_file_name(r.config.seed, static_cast<int>(k));
    write_file(path.string(), instance_to_json(instances[k]).dump(2) + "\n");
  }
  if (r.config.emit.count("json")) {
    const auto path = dir / survey_file_name(r.config.seed, "json");
    write_file(path.string(), survey_to_json(r).dump(2) + "\n");
  }
  if (r.config.emit.count("csv")) {
    const auto path = dir / survey_file_name(r.config.seed, "csv");
    write_file(path.string(), survey_to_csv(r));
  }
  if (r.config.emit.count("plotdata")) {
    std::ostringstream kc;
    kc << "instance,cell,eps,flavor,K\n";
    for (const auto& ir : r.per_instance) {
      int cell_idx = 0;
      for (const auto& cc : ir.cells) {
        const double K[3] = {cc.curvature.K_pd, cc.curvature.K_p, cc.curvature.K_d};
        for (const Flavor flavor : r.config.flavors)
          kc << ir.index << ',' << cell_idx << ',' << cc.curvature.eps.str() << ','
             << to_string(flavor) << ',' << format_double(K[static_cast<int>(flavor)]) << '\n';
        ++cell_idx;
      }
    }
    write_file((dir / ("k_by_cell-" + std::to_string(r.config.seed) + ".csv")).string(),
               kc.str());

    std::ostringstream hist;
    hist << "crossings,count\n";
    for (const auto& [k, v] : r.aggregate.crossing_histogram_pd) hist << k << ',' << v << '\n';
    write_file((dir / ("crossing_hist-" + std::to_string(r.config.seed) + ".csv")).string(),
               hist.str());
  }
}

}  // namespace cplab
