#pragma once

#include <string>
#include <vector>

#include "lodae/harness.hpp"
#include "json.hpp"

namespace lodae {

using Json = nlohmann::ordered_json;

/// Missing keys keep their defaults. Unknown keys are rejected.
ExperimentConfig config_from_json(const Json& doc);
ExperimentConfig config_from_json_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);
Json config_to_json(const ExperimentConfig& config);

Json noise_to_json(const NoiseModel& model);
NoiseModel noise_from_json(const Json& doc, int maxDepth);

Json calibration_to_json(const std::vector<HybridCalibration>& cal);
std::vector<HybridCalibration> calibration_from_json(const Json& doc);

std::vector<Algorithm> parse_algorithm_list(const std::string& commaList);

}  // namespace lodae
