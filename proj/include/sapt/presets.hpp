#pragma once

#include <memory>
#include <string>

#include <json.hpp>

#include "sapt/adapt.hpp"
#include "sapt/baselines.hpp"
#include "sapt/envs.hpp"

namespace sapt {

/// GP hyperparameters and LCB width selected for one environment by grid
/// search over sim-to-sim transfers (see tools/sapt_tune.cpp).
struct GpPreset {
    GPHyper reward;
    GPHyper safety;
    double kappa = 2.0;
    GPHyper cbo_reward;
    GPHyper cbo_safety;
};

/// Named presets: "asteroid", "arm". Throws ConfigError for unknown names.
GpPreset gp_preset(const std::string& name);

/// Build an environment by id, with optional parameter overrides from the
/// config file's [env] table. Throws ConfigError on unknown ids or keys.
std::shared_ptr<const Environment> make_env(const std::string& id, const nlohmann::json& params = nlohmann::json::object());

}  // namespace sapt
