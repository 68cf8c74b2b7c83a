#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lmpkit/metrics.hpp"
#include "lmpkit/model.hpp"
#include "lmpkit/synth.hpp"
#include "lmpkit/trainer.hpp"

namespace lmpkit::app {

/// One experiment: {dataset, train, selection, clustering, pck, output_dir}.
/// selection/clustering end up in train.keypoints.
struct ExperimentConfig {
    DatasetSpec dataset;
    TrainConfig train;
    PckConfig pck;
    std::string output_dir = "lmpkit_out";

    ModelArch arch() const;
};

/// Strict parse: unknown keys and wrong types throw ConfigError carrying the
/// JSON pointer of the offending entry. Missing keys keep their defaults.
ExperimentConfig parse_config(const nlohmann::json& doc);

/// Every field, defaults included.
nlohmann::json to_json(const ExperimentConfig& cfg);

nlohmann::json load_config_file(const std::filesystem::path& path);

/// "train.learning_rate=0.05": the value is read as JSON when it parses,
/// otherwise as a plain string. Intermediate objects are created.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// File (or {} when `path` is empty) + overrides -> parsed config.
ExperimentConfig resolve_config(const std::filesystem::path& path, const std::vector<std::string>& overrides);

}  // namespace lmpkit::app
