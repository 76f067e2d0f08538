#include <cmath>

#include "sapt/envs.hpp"
#include "sapt/error.hpp"

namespace sapt {

bool box_contains(const Box& box, std::span<const double> point) {
    if (point.size() != box.size()) return false;
    for (std::size_t i = 0; i < box.size(); ++i)
        if (!box[i].contains(point[i])) return false;
    return true;
}

RealEnv::RealEnv(std::shared_ptr<const Environment> sim, std::vector<double> dynamics, double noise_scale)
    : sim_(std::move(sim)), dynamics_(std::move(dynamics)), noise_scale_(noise_scale) {}

Trajectory RealEnv::execute(std::span<const double> policy, std::uint64_t episode_seed) const {
    return sim_->rollout(policy, dynamics_, ProcessNoise{noise_scale_, episode_seed});
}

RealEnv make_real_env(std::shared_ptr<const Environment> sim, std::vector<double> dynamics, double noise_scale) {
    if (!sim) throw ConfigError("env", "no simulator given");
    if (!box_contains(sim->dynamics_bounds(), dynamics))
        throw ConfigError("real.dynamics", "held-out dynamics must lie inside the feasible set");
    if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale))
        throw ConfigError("real.process_noise", "must be finite and >= 0");
    return RealEnv(std::move(sim), std::move(dynamics), noise_scale);
}

}  // namespace sapt
