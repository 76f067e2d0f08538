#include "sapt/lander.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "sapt/error.hpp"

namespace sapt {

LanderPolicy LanderPolicy::from_params(std::span<const double> params) {
    if (params.size() != kNumParams) throw ConfigError("policy", "lander policy needs exactly 8 parameters");
    LanderPolicy p;
    p.kp = params[0];
    p.ki = params[1];
    p.kd = params[2];
    std::copy(params.begin() + 3, params.end(), p.setpoints.begin());
    return p;
}

std::vector<double> LanderPolicy::params() const {
    std::vector<double> out{kp, ki, kd};
    out.insert(out.end(), setpoints.begin(), setpoints.end());
    return out;
}

Trajectory lander_rollout(const LanderParams& p, const LanderPolicy& policy, double gravity, ProcessNoise noise) {
    Trajectory tr(2, 1, p.dt);
    tr.states.reserve(2 * static_cast<std::size_t>(p.steps + 1));
    tr.actions.reserve(static_cast<std::size_t>(p.steps));

    Rng rng(noise.seed);
    std::normal_distribution<double> w(0.0, 1.0);

    double h = p.initial_altitude;
    double v = p.initial_velocity;
    double integral = 0.0;
    double prev_error = 0.0;
    const int per_setpoint = std::max(1, p.steps / p.num_setpoints);

    tr.push_state(std::array{h, v});
    for (int t = 0; t < p.steps; ++t) {
        const int k = std::min(t / per_setpoint, p.num_setpoints - 1);
        const double error = policy.setpoints[static_cast<std::size_t>(k)] - v;
        integral += error * p.dt;
        const double derivative = t == 0 ? 0.0 : (error - prev_error) / p.dt;
        prev_error = error;
        const double u = policy.kp * error + policy.ki * integral + policy.kd * derivative;
        const double thrust = std::clamp(u, -p.thrust_limit, p.thrust_limit);

        // Semi-implicit Euler: the altitude moves with the updated velocity.
        v += (thrust - gravity) * p.dt;
        if (noise.scale > 0.0) v += noise.scale * w(rng);
        h += v * p.dt;

        if (!std::isfinite(h) || !std::isfinite(v)) {
            tr.diverged = true;
            tr.truncated = true;
            break;
        }
        tr.push_action(std::array{thrust});
        tr.push_state(std::array{h, v});
        if (h <= 0.0) {
            tr.truncated = true;
            break;
        }
    }
    return tr;
}

double lander_reward(const Trajectory& tr, double goal_altitude, double scale) {
    const double final_altitude = tr.final_state()[0];
    return 1.0 / (1.0 + std::abs(final_altitude - goal_altitude) / scale);
}

double lander_safety(const Trajectory& tr) {
    double lowest = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < tr.num_states(); ++t) lowest = std::min(lowest, tr.state(t)[0]);
    return lowest;
}

Descriptor lander_descriptor(const Trajectory& tr) { return Descriptor{{tr.final_state()[0]}}; }

LanderEnv::LanderEnv(LanderParams params) : params_(params) {
    policy_bounds_ = {params_.kp, params_.ki, params_.kd};
    for (int i = 0; i < 5; ++i) policy_bounds_.push_back(params_.setpoint);
    dynamics_bounds_ = {params_.gravity};
}

GridSpec LanderEnv::default_grid() const { return GridSpec{{params_.grid_bins}, {0.0}, {params_.altitude_max}}; }

Trajectory LanderEnv::rollout(std::span<const double> policy, std::span<const double> dynamics,
                              ProcessNoise noise) const {
    if (dynamics.size() != 1) throw ConfigError("dynamics", "lander dynamics is a single gravity value");
    return lander_rollout(params_, LanderPolicy::from_params(policy), dynamics[0], noise);
}

double LanderEnv::reward(const Trajectory& tr, std::span<const double> goal) const {
    return lander_reward(tr, goal[0], params_.reward_scale);
}

}  // namespace sapt
