#include "sapt/arm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "sapt/error.hpp"

namespace sapt {

std::array<Point2, 5> arm_fk(std::span<const double> angles, std::span<const double> links) {
    std::array<Point2, 5> joints{};
    double heading = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        heading += angles[i];
        joints[i + 1].x = joints[i].x + links[i] * std::cos(heading);
        joints[i + 1].y = joints[i].y + links[i] * std::sin(heading);
    }
    return joints;
}

ArmPolicy::ArmPolicy(std::span<const double> params) : w_(params) {
    if (params.size() != kNumParams) throw ConfigError("policy", "arm policy needs exactly 204 parameters");
}

std::array<double, 4> ArmPolicy::operator()(std::span<const double> angles, double max_velocity) const {
    const double* p = w_.data();
    std::array<double, kHidden> h1{};
    std::array<double, kHidden> h2{};
    const double* b1 = p + kHidden * kInputs;
    for (std::size_t i = 0; i < kHidden; ++i) {
        double s = b1[i];
        for (std::size_t j = 0; j < kInputs; ++j) s += p[i * kInputs + j] * angles[j];
        h1[i] = std::tanh(s);
    }
    p = b1 + kHidden;
    const double* b2 = p + kHidden * kHidden;
    for (std::size_t i = 0; i < kHidden; ++i) {
        double s = b2[i];
        for (std::size_t j = 0; j < kHidden; ++j) s += p[i * kHidden + j] * h1[j];
        h2[i] = std::tanh(s);
    }
    p = b2 + kHidden;
    const double* b3 = p + kOutputs * kHidden;
    std::array<double, 4> out{};
    for (std::size_t i = 0; i < kOutputs; ++i) {
        double s = b3[i];
        for (std::size_t j = 0; j < kHidden; ++j) s += p[i * kHidden + j] * h2[j];
        out[i] = max_velocity * std::tanh(s);
    }
    return out;
}

Trajectory arm_rollout(const ArmParams& p, std::span<const double> policy, std::span<const double> links,
                       ProcessNoise noise) {
    if (links.size() != 4) throw ConfigError("dynamics", "arm dynamics are four link lengths");
    const ArmPolicy net(policy);
    Trajectory tr(6, 4, p.dt);
    tr.states.reserve(6 * static_cast<std::size_t>(p.steps + 1));
    tr.actions.reserve(4 * static_cast<std::size_t>(p.steps));

    Rng rng(noise.seed);
    std::normal_distribution<double> w(0.0, 1.0);

    std::array<double, 4> q = p.initial_angles;
    auto push = [&] {
        const auto effector = arm_fk(q, links)[4];
        tr.push_state(std::array{q[0], q[1], q[2], q[3], effector.x, effector.y});
    };
    push();
    for (int t = 0; t < p.steps; ++t) {
        const auto qdot = net(q, p.max_joint_velocity);
        for (std::size_t i = 0; i < 4; ++i) {
            q[i] += qdot[i] * p.dt;
            if (noise.scale > 0.0) q[i] += noise.scale * w(rng);
        }
        if (!std::all_of(q.begin(), q.end(), [](double v) { return std::isfinite(v); })) {
            tr.diverged = true;
            tr.truncated = true;
            break;
        }
        tr.push_action(qdot);
        push();
    }
    return tr;
}

double arm_reward(const Trajectory& tr, Point2 goal, double d_max) {
    const std::size_t n = tr.num_states();
    if (n < 2) {
        const auto s = tr.state(0);
        return 1.0 / (1.0 + std::hypot(s[4] - goal.x, s[5] - goal.y) / d_max);
    }
    double total = 0.0;
    for (std::size_t t = 1; t < n; ++t) {
        const auto s = tr.state(t);
        total += 1.0 / (1.0 + std::hypot(s[4] - goal.x, s[5] - goal.y) / d_max);
    }
    return total / static_cast<double>(n - 1);
}

double arm_safety(const Trajectory& tr, std::span<const Disc> unsafe) {
    double closest = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < tr.num_states(); ++t) {
        const auto s = tr.state(t);
        for (const Disc& d : unsafe)
            closest = std::min(closest, std::hypot(s[4] - d.center.x, s[5] - d.center.y) - d.radius);
    }
    return closest;
}

Descriptor arm_descriptor(const Trajectory& tr, double workspace_radius) {
    const auto s = tr.final_state();
    const double span = 2.0 * workspace_radius;
    return Descriptor{{(s[4] + workspace_radius) / span, (s[5] + workspace_radius) / span}};
}

ArmEnv::ArmEnv(ArmParams params) : params_(std::move(params)) {
    policy_bounds_.assign(ArmPolicy::kNumParams, params_.weight);
    dynamics_bounds_.assign(4, params_.link);
}

GridSpec ArmEnv::default_grid() const {
    return GridSpec{{params_.grid_bins, params_.grid_bins}, {0.0, 0.0}, {1.0, 1.0}};
}

Trajectory ArmEnv::rollout(std::span<const double> policy, std::span<const double> dynamics,
                           ProcessNoise noise) const {
    return arm_rollout(params_, policy, dynamics, noise);
}

double ArmEnv::reward(const Trajectory& tr, std::span<const double> goal) const {
    return arm_reward(tr, Point2{goal[0], goal[1]}, params_.workspace_radius);
}

}  // namespace sapt
