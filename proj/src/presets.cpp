#include "sapt/presets.hpp"

#include <cmath>

#include "sapt/arm.hpp"
#include "sapt/error.hpp"
#include "sapt/lander.hpp"

namespace sapt {

using nlohmann::json;

namespace {

GPHyper iso(std::size_t dims, double lengthscale, double signal_var, double noise_var) {
    return GPHyper{std::vector<double>(dims, lengthscale), signal_var, noise_var};
}

}  // namespace

// Selected by tools/sapt_tune on tuning seeds 1000-1009 with the shipped configs.
GpPreset gp_preset(const std::string& name) {
    if (name == "asteroid") {
        GpPreset p;
        p.reward = iso(1, 0.05, 1.49196e-3, 5.96785e-5);
        p.safety = iso(1, 0.05, 216.618, 2.16618);
        p.kappa = 3.0;
        p.cbo_reward = iso(LanderPolicy::kNumParams, 0.1 * std::sqrt(8.0), 2.91628e-2, 2.91628e-4);
        p.cbo_safety = iso(LanderPolicy::kNumParams, 0.1 * std::sqrt(8.0), 8083.65, 80.8365);
        return p;
    }
    if (name == "arm") {
        GpPreset p;
        p.reward = iso(2, 0.1, 1.16474e-3, 6.0823e-6);
        p.safety = iso(2, 0.1, 1.48854, 1.48854e-2);
        p.kappa = 2.0;
        p.cbo_reward = iso(ArmPolicy::kNumParams, 0.1 * std::sqrt(204.0), 2.32019e-3, 2.32019e-7);
        p.cbo_safety = iso(ArmPolicy::kNumParams, 0.1 * std::sqrt(204.0), 5.20306, 5.20306e-4);
        return p;
    }
    throw ConfigError("gp.preset", "unknown preset '" + name + "'");
}

namespace {

Interval interval_from(const json& j, const std::string& key) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ConfigError("env_params." + key, "expected [lo, hi]");
    Interval iv{j[0].get<double>(), j[1].get<double>()};
    if (!(iv.lo <= iv.hi)) throw ConfigError("env_params." + key, "lo must not exceed hi");
    return iv;
}

double number_from(const json& j, const std::string& key) {
    if (!j.is_number()) throw ConfigError("env_params." + key, "expected a number");
    return j.get<double>();
}

int int_from(const json& j, const std::string& key) {
    if (!j.is_number_integer()) throw ConfigError("env_params." + key, "expected an integer");
    return j.get<int>();
}

}  // namespace

std::shared_ptr<const Environment> make_env(const std::string& id, const json& params) {
    if (!params.is_null() && !params.is_object()) throw ConfigError("env", "expected a table");
    const json& p = params.is_null() ? json::object() : params;
    if (id == "asteroid") {
        LanderParams lp;
        for (const auto& [key, v] : p.items()) {
            if (key == "gravity") lp.gravity = interval_from(v, key);
            else if (key == "thrust_limit") lp.thrust_limit = number_from(v, key);
            else if (key == "initial_altitude") lp.initial_altitude = number_from(v, key);
            else if (key == "initial_velocity") lp.initial_velocity = number_from(v, key);
            else if (key == "altitude_max") lp.altitude_max = number_from(v, key);
            else if (key == "reward_scale") lp.reward_scale = number_from(v, key);
            else if (key == "grid_bins") lp.grid_bins = int_from(v, key);
            else if (key == "kp") lp.kp = interval_from(v, key);
            else if (key == "ki") lp.ki = interval_from(v, key);
            else if (key == "kd") lp.kd = interval_from(v, key);
            else if (key == "setpoint") lp.setpoint = interval_from(v, key);
            else throw ConfigError("env_params." + key, "unknown key for the asteroid environment");
        }
        if (!(lp.thrust_limit > 0.0)) throw ConfigError("env_params.thrust_limit", "must be > 0");
        if (!(lp.reward_scale > 0.0)) throw ConfigError("env_params.reward_scale", "must be > 0");
        return std::make_shared<LanderEnv>(lp);
    }
    if (id == "arm") {
        ArmParams ap;
        for (const auto& [key, v] : p.items()) {
            if (key == "link") ap.link = interval_from(v, key);
            else if (key == "weight") ap.weight = interval_from(v, key);
            else if (key == "max_joint_velocity") ap.max_joint_velocity = number_from(v, key);
            else if (key == "workspace_radius") ap.workspace_radius = number_from(v, key);
            else if (key == "grid_bins") ap.grid_bins = int_from(v, key);
            else if (key == "unsafe") {
                if (!v.is_array()) throw ConfigError("env_params.unsafe", "expected a list of [x, y, radius]");
                ap.unsafe.clear();
                for (const auto& d : v) {
                    if (!d.is_array() || d.size() != 3) throw ConfigError("env_params.unsafe", "expected [x, y, radius]");
                    ap.unsafe.push_back({{d[0].get<double>(), d[1].get<double>()}, d[2].get<double>()});
                }
            } else {
                throw ConfigError("env_params." + key, "unknown key for the arm environment");
            }
        }
        if (!(ap.link.lo > 0.0)) throw ConfigError("env_params.link", "link lengths must be positive");
        return std::make_shared<ArmEnv>(ap);
    }
    throw ConfigError("env", "unknown environment '" + id + "' (expected asteroid or arm)");
}

}  // namespace sapt
