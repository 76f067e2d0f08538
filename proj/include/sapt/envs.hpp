#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sapt/repertoire.hpp"
#include "sapt/trajectory.hpp"

namespace sapt {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double span() const { return hi - lo; }
    bool contains(double v) const { return v >= lo && v <= hi; }
    bool operator==(const Interval&) const = default;
};

using Box = std::vector<Interval>;

bool box_contains(const Box& box, std::span<const double> point);

/// Additive Gaussian process noise (w in s' = f(s, a, psi) + w). scale == 0 disables it.
struct ProcessNoise {
    double scale = 0.0;
    std::uint64_t seed = 0;
};

/// A parameterizable simulator plus the task functionals defined on its trajectories.
/// Implementations are stateless; rollouts are pure functions of their arguments.
class Environment {
public:
    virtual ~Environment() = default;

    virtual std::string id() const = 0;
    virtual const Box& policy_bounds() const = 0;
    virtual const Box& dynamics_bounds() const = 0;
    virtual std::size_t goal_dim() const = 0;
    virtual GridSpec default_grid() const = 0;

    virtual Trajectory rollout(std::span<const double> policy, std::span<const double> dynamics,
                               ProcessNoise noise = {}) const = 0;

    virtual double reward(const Trajectory& tr, std::span<const double> goal) const = 0;
    virtual double safety(const Trajectory& tr) const = 0;
    virtual Descriptor descriptor(const Trajectory& tr) const = 0;

    std::size_t policy_dim() const { return policy_bounds().size(); }
    RewardFn reward_fn() const {
        return [this](const Trajectory& tr, std::span<const double> goal) { return reward(tr, goal); };
    }
};

/// The "real" system of a sim-to-sim experiment: the simulator run under a
/// dynamics condition the adapting agent never sees.
class RealEnv {
public:
    RealEnv(std::shared_ptr<const Environment> sim, std::vector<double> dynamics, double noise_scale);

    /// Run one episode. `episode_seed` drives the process noise.
    Trajectory execute(std::span<const double> policy, std::uint64_t episode_seed) const;

    /// Task functionals (reward, safety, descriptor) are known to the agent.
    const Environment& task() const { return *sim_; }
    double noise_scale() const { return noise_scale_; }

private:
    std::shared_ptr<const Environment> sim_;
    std::vector<double> dynamics_;
    double noise_scale_;
};

/// Throws ConfigError if `dynamics` lies outside the environment's feasible set.
RealEnv make_real_env(std::shared_ptr<const Environment> sim, std::vector<double> dynamics, double noise_scale);

}  // namespace sapt
