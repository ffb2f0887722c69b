#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "cplab/arrangement.hpp"
#include "cplab/bezout.hpp"
#include "cplab/centralpath.hpp"
#include "cplab/curvature.hpp"
#include "cplab/io.hpp"
#include "cplab/sample.hpp"
#include "cplab/survey.hpp"

namespace {

using namespace cplab;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitBoundViolation = 3;

struct TolFlags {
  void attach(CLI::App* cmd) {
    opts.push_back(cmd->add_option("--tol-newton", tol.newton_tol, "path point residual tolerance"));
    opts.push_back(cmd->add_option("--tol-rank", tol.rank_tol, "relative rank tolerance"));
    opts.push_back(cmd->add_option("--tol-solve", tol.solve_tol, "linear solve residual tolerance"));
    opts.push_back(cmd->add_option("--tol-feas-margin", tol.feas_margin, "strict feasibility margin"));
    opts.push_back(cmd->add_option("--tol-quad", tol.quad_tol, "curvature quadrature tolerance"));
    opts.push_back(cmd->add_option("--tol-tail", tol.tail_tol, "Gauss-curve stall tolerance per decade"));
    opts.push_back(cmd->add_option("--tol-cond-cap", tol.cond_cap, "condition-number flag threshold"));
  }
  bool any() const {
    for (const auto* o : opts)
      if (o->count()) return true;
    return false;
  }
  Tolerances tol;
  std::vector<CLI::Option*> opts;
};

LpInstance load_instance(const std::string& path, const Tolerances& tol) {
  return instance_from_json(Json::parse(read_file(path)), tol);
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty())
    std::cout << text;
  else
    write_file(out, text);
}

int cmd_generate(int m, int n, std::uint64_t seed, int count, const std::string& out_dir,
                 const Tolerances& tol) {
  for (int k = 0; k < count; ++k) {
    const LpInstance inst = sample_instance(m, n, mix_seed(seed, static_cast<std::uint64_t>(k)), tol);
    const auto path = std::filesystem::path(out_dir) / instance_file_name(seed, k);
    write_file(path.string(), instance_to_json(inst).dump(2) + "\n");
    std::cout << path.string() << "\n";
  }
  return kExitOk;
}

int cmd_enumerate(const LpInstance& inst, const Tolerances& tol, const std::string& format,
                  const std::string& out) {
  const ArrangementSummary s = enumerate_cells(inst, tol);
  if (format == "json") {
    emit(out, arrangement_to_json(s).dump(2) + "\n");
  } else {
    std::ostringstream os;
    os << "bounded strict: " << s.bounded_strict_count << " of " << s.per_cell.size()
       << " cells (expected " << s.buck_expected << ")\n"
       << "jointly strict: " << s.joint_count << " (expected " << s.joint_expected << ")\n"
       << "unbounded feasible: " << s.unbounded_count << ", degenerate: " << s.degenerate_count
       << ", empty: " << s.empty_count << "\n";
    emit(out, os.str());
  }
  return kExitOk;
}

int cmd_trace(const LpInstance& inst, const SignVector& eps, const Tolerances& tol,
              const std::string& format, const std::string& out) {
  const PathTrace trace = trace_path(inst, eps, tol);
  const auto samples = gauss_curve(trace);
  if (format == "json") {
    Json j;
    j["eps"] = eps.str();
    j["mu_lo"] = trace.mu_lo;
    j["mu_hi"] = trace.mu_hi;
    j["truncation_flags"] = trace.truncation_flags;
    Json pts = Json::array();
    for (std::size_t k = 0; k < trace.points.size(); ++k) {
      const auto& p = trace.points[k];
      Json jp;
      jp["mu"] = p.mu;
      jp["residual"] = p.residual;
      Json x = Json::array(), s = Json::array(), y = Json::array();
      for (int i = 0; i < p.x.size(); ++i) x.push_back(p.x[i]);
      for (int i = 0; i < p.s.size(); ++i) s.push_back(p.s[i]);
      for (int i = 0; i < p.y.size(); ++i) y.push_back(p.y[i]);
      jp["x"] = std::move(x);
      jp["s"] = std::move(s);
      jp["y"] = std::move(y);
      jp["speed_pd"] = samples[k].speed_pd;
      jp["speed_p"] = samples[k].speed_p;
      jp["speed_d"] = samples[k].speed_d;
      pts.push_back(std::move(jp));
    }
    j["points"] = std::move(pts);
    emit(out, j.dump(2) + "\n");
  } else {
    // tidy rows: one gamma component per line
    std::ostringstream os;
    os << "mu,ln_mu,flavor,component,gamma,speed\n";
    for (const auto& s : samples) {
      const double t = std::log(s.mu);
      for (int i = 0; i < s.gamma_pd.size(); ++i)
        os << format_double(s.mu) << ',' << format_double(t) << ",PD," << i << ','
           << format_double(s.gamma_pd[i]) << ',' << format_double(s.speed_pd) << '\n';
      for (int i = 0; i < s.gamma_p.size(); ++i)
        os << format_double(s.mu) << ',' << format_double(t) << ",P," << i << ','
           << format_double(s.gamma_p[i]) << ',' << format_double(s.speed_p) << '\n';
      for (int i = 0; i < s.gamma_d.size(); ++i)
        os << format_double(s.mu) << ',' << format_double(t) << ",D," << i << ','
           << format_double(s.gamma_d[i]) << ',' << format_double(s.speed_d) << '\n';
    }
    emit(out, os.str());
  }
  return kExitOk;
}

int cmd_curvature(const LpInstance& inst, const Tolerances& tol, int hyperplanes,
                  const std::string& format, const std::string& out) {
  const ArrangementSummary s = enumerate_cells(inst, tol);
  Json cells = Json::array();
  std::ostringstream csv;
  csv << "eps,flavor,K,crofton_length,crofton_std_error\n";
  for (const auto& cell : s.per_cell) {
    if (cell.primal_status != PrimalStatus::BoundedStrict) continue;
    PathSolver solver(inst, cell.eps, tol);
    const PathTrace trace = solver.trace(*cell.witness_x);
    const CurvatureResult K = total_curvature(solver, trace, tol.quad_tol);
    const auto samples = gauss_curve(trace);
    Json jc;
    jc["eps"] = cell.eps.str();
    jc["K_pd"] = K.K_pd;
    jc["K_p"] = K.K_p;
    jc["K_d"] = K.K_d;
    jc["quad_error_estimate"] = K.quad_error_estimate;
    jc["tail_flags"] = trace.truncation_flags;
    const double Ks[3] = {K.K_pd, K.K_p, K.K_d};
    for (int f = 0; f < 3; ++f) {
      const auto flavor = static_cast<Flavor>(f);
      std::string cro_len, cro_se;
      if (hyperplanes > 0) {
        Xoshiro256pp rng(mix_seed(inst.seed.value_or(0), 1000 + static_cast<std::uint64_t>(f)));
        const auto est = crofton_length(samples, flavor, hyperplanes, rng);
        jc[std::string("crofton_") + to_string(flavor)] = est.length_estimate;
        jc[std::string("crofton_se_") + to_string(flavor)] = est.std_error;
        cro_len = format_double(est.length_estimate);
        cro_se = format_double(est.std_error);
      }
      csv << cell.eps.str() << ',' << to_string(flavor) << ',' << format_double(Ks[f]) << ','
          << cro_len << ',' << cro_se << '\n';
    }
    cells.push_back(std::move(jc));
  }
  if (format == "json") {
    Json j;
    j["cells"] = std::move(cells);
    emit(out, j.dump(2) + "\n");
  } else {
    emit(out, csv.str());
  }
  return kExitOk;
}

int cmd_bezout(int m_lo, int m_hi, int n_opt, const std::string& format, const std::string& out) {
  std::ostringstream text, csv;
  Json rows = Json::array();
  csv << "m,n,flavor,raw_coefficient,spurious,bound\n";
  for (int m = m_lo; m <= m_hi; ++m) {
    for (int n = 1; n < m; ++n) {
      if (n_opt > 0 && n != n_opt) continue;
      const CrossingBounds cb = crossing_bounds(m, n);
      for (const Flavor f : kAllFlavors) {
        const auto raw = bezout_number(crossing_system_structure(m, n, f));
        const long long spurious = f == Flavor::P ? 0 : cb.spurious;
        long long bound = 0;
        switch (f) {
          case Flavor::PD: bound = cb.B_pd; break;
          case Flavor::P: bound = cb.B_p; break;
          case Flavor::D: bound = cb.B_d; break;
        }
        text << "m=" << m << " n=" << n << " " << to_string(f) << " raw "
             << raw.bezout_number << ", spurious " << spurious << ", bound " << bound << "\n";
        csv << m << ',' << n << ',' << to_string(f) << ',' << raw.bezout_number << ','
            << spurious << ',' << bound << '\n';
        Json r;
        r["m"] = m;
        r["n"] = n;
        r["flavor"] = to_string(f);
        r["raw_coefficient"] = raw.bezout_number;
        r["spurious"] = spurious;
        r["bound"] = bound;
        rows.push_back(std::move(r));
      }
    }
  }
  if (format == "json")
    emit(out, rows.dump(2) + "\n");
  else if (format == "csv")
    emit(out, csv.str());
  else
    emit(out, text.str());
  return kExitOk;
}

int cmd_survey(ExperimentConfig cfg) {
  cfg.validate();
  const SurveyReport rep = run_survey(cfg);
  std::vector<LpInstance> instances;
  instances.reserve(static_cast<std::size_t>(cfg.n_instances));
  for (int k = 0; k < cfg.n_instances; ++k)
    instances.push_back(
        sample_instance(cfg.m, cfg.n, mix_seed(cfg.seed, static_cast<std::uint64_t>(k)),
                        cfg.tolerances));
  write_survey_outputs(rep, instances);

  const auto& ag = rep.aggregate;
  std::cout << "instances: " << ag.instances << " (flagged " << ag.flagged_instances << ")\n"
            << "count mismatches: bounded " << ag.buck_mismatch_count << ", joint "
            << ag.joint_mismatch_count << "\n"
            << "bound violations: curvature " << ag.bound_violation_count << ", crossings "
            << ag.crossing_violation_count << "\n";
  for (int f = 0; f < 3; ++f)
    std::cout << "mean avg K_" << to_string(static_cast<Flavor>(f)) << " = "
              << ag.mean_avg_K[static_cast<std::size_t>(f)] << "\n";
  if (ag.bound_violation_count > 0 || ag.crossing_violation_count > 0)
    return kExitBoundViolation;
  return kExitOk;
}

int cmd_report(const std::string& survey_path, const std::string& out_dir,
               const std::string& instance_path, const std::string& eps_str,
               const Tolerances& tol) {
  const Json j = Json::parse(read_file(survey_path));
  const auto dir = std::filesystem::path(out_dir);
  std::filesystem::create_directories(dir);

  std::ostringstream agg;
  agg << "metric,flavor,value\n";
  const auto& ja = j.at("aggregate");
  for (const char* f : {"PD", "P", "D"}) {
    agg << "mean_avg_K," << f << ',' << ja.at("mean_avg_K").at(f).dump() << '\n';
    agg << "max_avg_K," << f << ',' << ja.at("max_avg_K").at(f).dump() << '\n';
    agg << "max_crossings," << f << ',' << ja.at("max_crossings").at(f).dump() << '\n';
  }
  for (const char* key : {"instances", "flagged_instances", "buck_mismatch_count",
                          "joint_mismatch_count", "bound_violation_count",
                          "crossing_violation_count", "crofton_inconsistent_count"})
    agg << key << ",," << ja.at(key).dump() << '\n';
  write_file((dir / "aggregate.csv").string(), agg.str());

  std::ostringstream kc;
  kc << "instance,cell,eps,flavor,K\n";
  for (const auto& ji : j.at("per_instance")) {
    int cell_idx = 0;
    for (const auto& jc : ji.at("cells")) {
      for (const char* f : {"PD", "P", "D"})
        kc << ji.at("index").dump() << ',' << cell_idx << ','
           << jc.at("eps").get<std::string>() << ',' << f << ','
           << jc.at(std::string("K_") + (f[0] == 'P' && f[1] == 'D' ? "pd" : f[0] == 'P' ? "p" : "d")).dump()
           << '\n';
      ++cell_idx;
    }
  }
  write_file((dir / "k_by_cell.csv").string(), kc.str());

  std::ostringstream hist;
  hist << "crossings,count\n";
  for (const auto& he : ja.at("crossing_histogram_pd"))
    hist << he.at("crossings").dump() << ',' << he.at("count").dump() << '\n';
  write_file((dir / "crossing_hist.csv").string(), hist.str());

  if (!instance_path.empty() && !eps_str.empty()) {
    const LpInstance inst = load_instance(instance_path, tol);
    const SignVector eps = SignVector::parse(eps_str);
    cmd_trace(inst, eps, tol, "csv", (dir / ("gamma-" + eps_str + ".csv")).string());
  }
  std::cout << "report written to " << dir.string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"central-path curvature laboratory"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "sample Gaussian instances to JSON files");
  int g_m = 5, g_n = 2, g_count = 1;
  std::uint64_t g_seed = 1;
  std::string g_out = ".";
  TolFlags g_tol;
  gen->add_option("--m", g_m, "rows")->required();
  gen->add_option("--n", g_n, "columns")->required();
  gen->add_option("--seed", g_seed, "seed");
  gen->add_option("--instances", g_count, "number of instances");
  gen->add_option("--out", g_out, "output directory");
  g_tol.attach(gen);

  // enumerate
  auto* enu = app.add_subcommand("enumerate", "classify all sign-condition cells");
  std::string e_instance, e_format = "text", e_out;
  int e_m = 0, e_n = 0;
  std::uint64_t e_seed = 1;
  TolFlags e_tol;
  enu->add_option("--instance", e_instance, "instance JSON file");
  enu->add_option("--m", e_m, "rows (sample instead of loading)");
  enu->add_option("--n", e_n, "columns");
  enu->add_option("--seed", e_seed, "seed");
  enu->add_option("--format", e_format, "text|json");
  enu->add_option("--out", e_out, "output file (default stdout)");
  e_tol.attach(enu);

  // trace
  auto* tra = app.add_subcommand("trace", "trace one cell's central path");
  std::string t_instance, t_eps, t_format = "csv", t_out;
  TolFlags t_tol;
  tra->add_option("--instance", t_instance, "instance JSON file")->required();
  tra->add_option("--eps", t_eps, "sign vector, e.g. ++-+-")->required();
  tra->add_option("--format", t_format, "csv|json");
  tra->add_option("--out", t_out, "output file (default stdout)");
  t_tol.attach(tra);

  // curvature
  auto* cur = app.add_subcommand("curvature", "total curvature of every bounded cell");
  std::string c_instance, c_format = "csv", c_out;
  int c_hyper = 0;
  TolFlags c_tol;
  cur->add_option("--instance", c_instance, "instance JSON file")->required();
  cur->add_option("--hyperplanes", c_hyper, "Crofton hyperplanes per flavor (0 = skip)");
  cur->add_option("--format", c_format, "csv|json");
  cur->add_option("--out", c_out, "output file (default stdout)");
  c_tol.attach(cur);

  // bezout
  auto* bez = app.add_subcommand("bezout", "crossing-count tables from coefficient extraction");
  int b_m = 0, b_n = 0, b_max = 0;
  std::string b_format = "text", b_out;
  bez->add_option("--m", b_m, "row count (table for one m)");
  bez->add_option("--n", b_n, "column count (0 = all n < m)");
  bez->add_option("--max-m", b_max, "sweep 2..max-m");
  bez->add_option("--format", b_format, "text|csv|json");
  bez->add_option("--out", b_out, "output file (default stdout)");

  // survey
  auto* sur = app.add_subcommand("survey", "run a reproducible multi-instance experiment");
  std::string s_config, s_out = ".", s_format;
  ExperimentConfig s_cfg;
  TolFlags s_tol;
  sur->add_option("--config", s_config, "config JSON file");
  sur->add_option("--m", s_cfg.m, "rows");
  sur->add_option("--n", s_cfg.n, "columns");
  sur->add_option("--seed", s_cfg.seed, "master seed");
  sur->add_option("--instances", s_cfg.n_instances, "instances");
  sur->add_option("--hyperplanes", s_cfg.n_hyperplanes, "Crofton hyperplanes per flavor");
  sur->add_option("--out", s_out, "output directory");
  sur->add_option("--format", s_format, "json|csv (default both)");
  s_tol.attach(sur);

  // report
  auto* rep = app.add_subcommand("report", "render tables and plot data from a survey");
  std::string r_survey, r_out = "report", r_instance, r_eps;
  TolFlags r_tol;
  rep->add_option("--survey", r_survey, "survey JSON file")->required();
  rep->add_option("--out", r_out, "output directory");
  rep->add_option("--instance", r_instance, "instance file for gamma series");
  rep->add_option("--eps", r_eps, "cell for gamma series");
  r_tol.attach(rep);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_generate(g_m, g_n, g_seed, g_count, g_out, g_tol.tol);
    if (enu->parsed()) {
      LpInstance inst = e_instance.empty()
                            ? sample_instance(e_m, e_n, mix_seed(e_seed, 0), e_tol.tol)
                            : load_instance(e_instance, e_tol.tol);
      return cmd_enumerate(inst, e_tol.tol, e_format, e_out);
    }
    if (tra->parsed())
      return cmd_trace(load_instance(t_instance, t_tol.tol), SignVector::parse(t_eps), t_tol.tol,
                       t_format, t_out);
    if (cur->parsed())
      return cmd_curvature(load_instance(c_instance, c_tol.tol), c_tol.tol, c_hyper, c_format,
                           c_out);
    if (bez->parsed()) {
      if (b_max > 0) return cmd_bezout(2, b_max, 0, b_format, b_out);
      if (b_m > 0) return cmd_bezout(b_m, b_m, b_n, b_format, b_out);
      std::cerr << "bezout: give --m or --max-m\n";
      return kExitUsage;
    }
    if (sur->parsed()) {
      if (!s_config.empty()) {
        ExperimentConfig file_cfg = config_from_json(Json::parse(read_file(s_config)));
        // command line overrides the file only where flags were given
        if (sur->count("--m")) file_cfg.m = s_cfg.m;
        if (sur->count("--n")) file_cfg.n = s_cfg.n;
        if (sur->count("--seed")) file_cfg.seed = s_cfg.seed;
        if (sur->count("--instances")) file_cfg.n_instances = s_cfg.n_instances;
        if (sur->count("--hyperplanes")) file_cfg.n_hyperplanes = s_cfg.n_hyperplanes;
        s_cfg = file_cfg;
      }
      if (sur->count("--out")) s_cfg.output_dir = s_out;
      if (!s_format.empty()) s_cfg.emit = {s_format};
      if (s_config.empty() || s_tol.any()) s_cfg.tolerances = s_tol.tol;
      return cmd_survey(s_cfg);
    }
    if (rep->parsed()) return cmd_report(r_survey, r_out, r_instance, r_eps, r_tol.tol);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
