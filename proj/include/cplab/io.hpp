#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "cplab/survey.hpp"
#include "cplab/types.hpp"

namespace cplab {

using Json = nlohmann::ordered_json;

/// Decimal with enough digits to round-trip a double exactly.
std::string format_double(double v);

Json instance_to_json(const LpInstance& inst);
LpInstance instance_from_json(const Json& j, const Tolerances& tol);

Json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const Json& j);

Json arrangement_to_json(const ArrangementSummary& s, bool include_witnesses = true);
Json survey_to_json(const SurveyReport& r);

/// Tidy per-(instance, cell, flavor) rows mirroring the JSON numeric content.
std::string survey_to_csv(const SurveyReport& r);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

/// instance-<seed>-<k>.json / survey-<seed>.json / survey-<seed>.csv
std::string instance_file_name(std::uint64_t seed, int k);
std::string survey_file_name(std::uint64_t seed, const std::string& ext);

/// Writes the artifacts selected by config.emit into config.output_dir.
void write_survey_outputs(const SurveyReport& r, const std::vector<LpInstance>& instances);

}  // namespace cplab
