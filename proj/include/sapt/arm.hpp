#pragma once

#include <array>
#include <numbers>
#include <span>
#include <vector>

#include "sapt/envs.hpp"

namespace sapt {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Point2&) const = default;
};

struct Disc {
    Point2 center;
    double radius = 0.0;
};

/// 4-DoF planar kinematic arm. State is (q1..q4, effector x, effector y);
/// action is the joint-velocity command. Link lengths are the dynamics parameter.
struct ArmParams {
    Interval link{4.0, 7.0};
    double dt = 0.1;
    int steps = 50;  // 5 s
    double max_joint_velocity = std::numbers::pi / 2.0;
    Interval weight{-1.0, 1.0};
    std::array<double, 4> initial_angles{};
    /// Reach at the upper link bound; scales the reward and the descriptor.
    double workspace_radius = 28.0;
    std::vector<Disc> unsafe{
        {{12.0, 12.0}, 1.5}, {{-4.0, 14.0}, 1.5}, {{-14.0, 4.0}, 1.5}, {{6.0, -14.0}, 1.5}};
    int grid_bins = 30;  // per axis
};

/// Joint and effector positions of a planar chain rooted at the origin:
/// element 0 is the base, element 4 the effector.
std::array<Point2, 5> arm_fk(std::span<const double> angles, std::span<const double> links);

/// Feed-forward controller 4 -> 10 -> 10 -> 4 with biases and tanh units.
/// Parameter layout: W1 (10x4, row-major), b1, W2 (10x10), b2, W3 (4x10), b3.
class ArmPolicy {
public:
    static constexpr std::size_t kInputs = 4;
    static constexpr std::size_t kHidden = 10;
    static constexpr std::size_t kOutputs = 4;
    static constexpr std::size_t kNumParams =
        kHidden * kInputs + kHidden + kHidden * kHidden + kHidden + kOutputs * kHidden + kOutputs;
    static_assert(kNumParams == 204);

    explicit ArmPolicy(std::span<const double> params);

    /// Joint-velocity command in [-max_velocity, max_velocity].
    std::array<double, 4> operator()(std::span<const double> angles, double max_velocity) const;

private:
    std::span<const double> w_;
};

Trajectory arm_rollout(const ArmParams& p, std::span<const double> policy, std::span<const double> links,
                       ProcessNoise noise = {});

/// Mean over steps 1..N of 1 / (1 + d_t / d_max), d_t the effector-goal distance.
double arm_reward(const Trajectory& tr, Point2 goal, double d_max);
/// Smallest signed distance from the effector to any unsafe disc boundary.
double arm_safety(const Trajectory& tr, std::span<const Disc> unsafe);
/// Final effector position mapped from [-radius, radius]^2 to [0, 1]^2.
Descriptor arm_descriptor(const Trajectory& tr, double workspace_radius);

class ArmEnv final : public Environment {
public:
    explicit ArmEnv(ArmParams params = {});

    std::string id() const override { return "arm"; }
    const Box& policy_bounds() const override { return policy_bounds_; }
    const Box& dynamics_bounds() const override { return dynamics_bounds_; }
    std::size_t goal_dim() const override { return 2; }
    GridSpec default_grid() const override;

    Trajectory rollout(std::span<const double> policy, std::span<const double> dynamics,
                       ProcessNoise noise = {}) const override;
    double reward(const Trajectory& tr, std::span<const double> goal) const override;
    double safety(const Trajectory& tr) const override { return arm_safety(tr, params_.unsafe); }
    Descriptor descriptor(const Trajectory& tr) const override {
        return arm_descriptor(tr, params_.workspace_radius);
    }

    const ArmParams& params() const { return params_; }

private:
    ArmParams params_;
    Box policy_bounds_;
    Box dynamics_bounds_;
};

}  // namespace sapt
