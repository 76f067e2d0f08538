#pragma once

#include <array>
#include <span>
#include <vector>

#include "sapt/envs.hpp"

namespace sapt {

/// 1-D asteroid lander: state (altitude m, vertical velocity m/s), action is
/// the commanded thrust acceleration. Gravity is the dynamics parameter.
struct LanderParams {
    Interval gravity{3.0, 10.0};
    double dt = 0.05;
    int steps = 300;           // 15 s
    int num_setpoints = 5;     // each held for steps / num_setpoints
    double initial_altitude = 300.0;
    double initial_velocity = 0.0;
    double thrust_limit = 20.0;
    double reward_scale = 100.0;
    double altitude_max = 400.0;  // descriptor range is [0, altitude_max]
    int grid_bins = 100;

    Interval kp{0.0, 2.0};
    Interval ki{0.0, 0.05};
    Interval kd{0.0, 0.2};
    Interval setpoint{-20.0, 20.0};
};

/// PID velocity controller with five velocity setpoints: 8 parameters.
struct LanderPolicy {
    static constexpr std::size_t kNumParams = 8;

    double kp = 0.0;
    double ki = 0.0;
    double kd = 0.0;
    std::array<double, 5> setpoints{};

    static LanderPolicy from_params(std::span<const double> params);
    std::vector<double> params() const;
};

Trajectory lander_rollout(const LanderParams& p, const LanderPolicy& policy, double gravity, ProcessNoise noise = {});

/// 1 / (1 + |final altitude - goal| / scale), in (0, 1].
double lander_reward(const Trajectory& tr, double goal_altitude, double scale = 100.0);
/// Minimum altitude over the trajectory.
double lander_safety(const Trajectory& tr);
/// Final altitude.
Descriptor lander_descriptor(const Trajectory& tr);

class LanderEnv final : public Environment {
public:
    explicit LanderEnv(LanderParams params = {});

    std::string id() const override { return "asteroid"; }
    const Box& policy_bounds() const override { return policy_bounds_; }
    const Box& dynamics_bounds() const override { return dynamics_bounds_; }
    std::size_t goal_dim() const override { return 1; }
    GridSpec default_grid() const override;

    Trajectory rollout(std::span<const double> policy, std::span<const double> dynamics,
                       ProcessNoise noise = {}) const override;
    double reward(const Trajectory& tr, std::span<const double> goal) const override;
    double safety(const Trajectory& tr) const override { return lander_safety(tr); }
    Descriptor descriptor(const Trajectory& tr) const override { return lander_descriptor(tr); }

    const LanderParams& params() const { return params_; }

private:
    LanderParams params_;
    Box policy_bounds_;
    Box dynamics_bounds_;
};

}  // namespace sapt
