#include <doctest.h>

#include <filesystem>
#include <numbers>

#include "cplab/io.hpp"
#include "cplab/sample.hpp"
#include "cplab/survey.hpp"

using namespace cplab;

namespace {

constexpr double kPi = std::numbers::pi_v<double>;

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.m = 4;
  cfg.n = 2;
  cfg.n_instances = 3;
  cfg.seed = 20240101;
  cfg.n_hyperplanes = 1500;
  cfg.n_refine_hyperplanes = 2;
  cfg.kernel_checks = true;
  return cfg;
}

}  // namespace

TEST_CASE("small survey: counts, bounds, residuals, ledger") {
  const SurveyReport rep = run_survey(small_config());
  const auto& ag = rep.aggregate;
  CHECK(ag.instances == 3);
  CHECK(ag.buck_mismatch_count == 0);
  CHECK(ag.joint_mismatch_count == 0);
  CHECK(ag.bound_violation_count == 0);
  CHECK(ag.crossing_violation_count == 0);
  CHECK(ag.e1_residual_max <= 1e-8);
  CHECK(ag.e2_residual_max <= 1e-8);
  CHECK(ag.accel_residual_max <= 1e-8);
  CHECK(ag.gap_rel_max <= 1e-8);
  CHECK(ag.kernel.ran);
  CHECK(ag.kernel.fd_velocity_rel_max <= 1e-5);
  CHECK(ag.kernel.quad_refined_rel_max <= 1e-4);
  CHECK(ag.kernel.rescale_max_diff <= 1e-6);

  for (const auto& ir : rep.per_instance) {
    CHECK(ir.arrangement.bounded_strict_count == 3);  // C(3,2)
    CHECK(ir.arrangement.joint_count == 6);           // C(4,2)
    for (int f = 0; f < 3; ++f) {
      CHECK(ir.margin_avg[static_cast<std::size_t>(f)] > -1e-2);
      CHECK(ir.margin_sum[static_cast<std::size_t>(f)] > -1e-2);
    }
    CHECK(ir.crossing_bound_ok);
    if (!ir.flagged) CHECK(ir.exclusions.empty());
    // every excluded cell appears exactly once in the ledger
    long long excluded_cells = 0;
    for (const auto& cell : ir.cells)
      if (cell.curvature.excluded) ++excluded_cells;
    CHECK(excluded_cells == static_cast<long long>(ir.exclusions.size()));
    if (ir.refined_crossings > 0) {
      CHECK(ir.refine_phi_max <= 1e-8);
      CHECK(ir.refine_min_sv > 0.0);
    }
  }
}

TEST_CASE("surveys are deterministic end to end") {
  const ExperimentConfig cfg = small_config();
  const SurveyReport a = run_survey(cfg);
  const SurveyReport b = run_survey(cfg);
  CHECK(survey_to_json(a).dump() == survey_to_json(b).dump());
  CHECK(survey_to_csv(a) == survey_to_csv(b));
}

TEST_CASE("n = 1 surveys have vanishing primal curvature") {
  ExperimentConfig cfg;
  cfg.m = 5;
  cfg.n = 1;
  cfg.n_instances = 3;
  cfg.seed = 5;
  cfg.n_hyperplanes = 500;
  cfg.kernel_checks = false;
  const SurveyReport rep = run_survey(cfg);
  for (const auto& ir : rep.per_instance) {
    CHECK(!ir.flagged);
    for (const auto& cell : ir.cells) CHECK(cell.curvature.K_p <= 1e-6);
    CHECK(ir.avg_K[static_cast<std::size_t>(Flavor::P)] <= 1e-6);
  }
}

TEST_CASE("average bound has real slack at (4,2)") {
  const SurveyReport rep = run_survey(small_config());
  for (const auto& ir : rep.per_instance) {
    if (ir.flagged) continue;
    CHECK(ir.avg_K[0] <= 2.0 * kPi * 2 + 1e-2);
    CHECK(ir.avg_K[1] <= 2.0 * kPi * 1 + 1e-2);
    CHECK(ir.avg_K[2] <= 2.0 * kPi * 2 + 1e-2);
  }
}

TEST_CASE("JSON and CSV carry identical numeric values") {
  const SurveyReport rep = run_survey(small_config());
  const Json j = survey_to_json(rep);
  const std::string csv = survey_to_csv(rep);

  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);  // header
  int rows = 0;
  while (std::getline(is, line)) {
    std::vector<std::string> cols;
    std::string cur;
    for (char ch : line) {
      if (ch == ',') {
        cols.push_back(cur);
        cur.clear();
      } else
        cur.push_back(ch);
    }
    cols.push_back(cur);
    REQUIRE(cols.size() == 12);
    const int inst = std::stoi(cols[0]);
    const std::string eps = cols[1];
    const std::string flavor = cols[2];
    const double K = std::strtod(cols[3].c_str(), nullptr);

    bool found = false;
    for (const auto& jc : j["per_instance"][inst]["cells"]) {
      if (jc["eps"].get<std::string>() != eps) continue;
      const std::string key = flavor == "PD" ? "K_pd" : (flavor == "P" ? "K_p" : "K_d");
      CHECK(jc[key].get<double>() == K);
      found = true;
      break;
    }
    CHECK(found);
    ++rows;
  }
  CHECK(rows > 0);
}

TEST_CASE("survey outputs land in the output directory") {
  ExperimentConfig cfg = small_config();
  cfg.n_instances = 1;
  cfg.n_hyperplanes = 200;
  cfg.kernel_checks = false;
  const auto dir = std::filesystem::temp_directory_path() / "cplab_survey_test";
  std::filesystem::remove_all(dir);
  cfg.output_dir = dir.string();
  cfg.emit = {"json", "csv", "plotdata"};
  const SurveyReport rep = run_survey(cfg);
  std::vector<LpInstance> insts = {
      sample_instance(cfg.m, cfg.n, mix_seed(cfg.seed, 0), cfg.tolerances)};
  write_survey_outputs(rep, insts);
  CHECK(std::filesystem::exists(dir / instance_file_name(cfg.seed, 0)));
  CHECK(std::filesystem::exists(dir / survey_file_name(cfg.seed, "json")));
  CHECK(std::filesystem::exists(dir / survey_file_name(cfg.seed, "csv")));
  CHECK(std::filesystem::exists(dir / ("k_by_cell-" + std::to_string(cfg.seed) + ".csv")));
  std::filesystem::remove_all(dir);
}
