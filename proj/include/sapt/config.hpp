#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sapt/adapt.hpp"
#include "sapt/baselines.hpp"
#include "sapt/evolve.hpp"

namespace sapt {

/// Everything one experiment needs, validated. Built from a TOML file plus
/// "section.key=value" overrides.
struct ExperimentConfig {
    std::string env_id;
    nlohmann::json env_params = nlohmann::json::object();
    std::shared_ptr<const Environment> env;

    GridSpec grid;
    EvolveConfig evolve;
    AdaptConfig adapt;
    AdaptOptions adapt_options;  // GP hyperparameters for the repertoire methods
    CboOptions cbo;

    double process_noise = 0.0;
    std::optional<std::vector<double>> real_dynamics;  // sampled per replicate when absent

    Method method = Method::Sapt;
    int replicates = 1;
    std::uint64_t seed = 0;
    std::string output_dir;
};

/// Apply overrides of the form "section.key=<toml value>" to a parsed document.
void apply_overrides(nlohmann::json& doc, const std::vector<std::string>& overrides);

/// Validate and convert. Throws ConfigError naming the offending field.
ExperimentConfig parse_config(const nlohmann::json& doc);

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

}  // namespace sapt
