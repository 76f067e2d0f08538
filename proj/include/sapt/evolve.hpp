#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "sapt/envs.hpp"
#include "sapt/repertoire.hpp"

namespace sapt {

/// One sampled setting of the uncertain physical parameters (gravity, link lengths).
struct DynamicsCondition {
    std::vector<double> params;
    bool operator==(const DynamicsCondition&) const = default;
};

struct EvolveConfig {
    int n_dynamics = 5;
    int n_init = 500;
    int budget = 50000;
    double mutation_sigma = 0.05;
    std::uint64_t seed = 0;
    /// Candidates generated per generation. Each batch is generated from the
    /// archive as it stood at the start of the batch and committed in order,
    /// so results do not depend on the number of worker threads.
    int batch_size = 64;
    int progress_interval = 1000;
    bool parallel = true;

    void validate() const;  // throws ConfigError
};

std::vector<DynamicsCondition> sample_dynamics(const Box& bounds, int n, Rng& rng);

/// Outcome of running one policy under every dynamics condition.
struct Evaluation {
    bool ok = false;          // false if any rollout diverged
    double fitness = 0.0;     // worst-case safety
    Descriptor descriptor;    // per-dimension mean over conditions
    std::vector<Trajectory> trajectories;  // condition order
    std::size_t worst = 0;    // index of the condition achieving `fitness`
};

Evaluation evaluate_policy(const Environment& env, std::span<const double> policy,
                           std::span<const DynamicsCondition> conditions);

/// Gaussian perturbation with per-dimension std sigma * (hi - lo), clamped to bounds.
std::vector<double> mutate(std::span<const double> policy, double sigma, const Box& bounds, Rng& rng);

std::vector<double> random_policy(const Box& bounds, Rng& rng);

// Batch evaluation kernels. Results are in candidate order and identical
// between the two; the serial one is the reference.
std::vector<Evaluation> evaluate_batch(const Environment& env, const std::vector<std::vector<double>>& policies,
                                       std::span<const DynamicsCondition> conditions);
std::vector<Evaluation> evaluate_batch_serial(const Environment& env,
                                              const std::vector<std::vector<double>>& policies,
                                              std::span<const DynamicsCondition> conditions);

struct ProgressRecord {
    std::size_t evaluations = 0;
    std::size_t cells_filled = 0;
    double best_safety = 0.0;
    double mean_safety = 0.0;
};

using ProgressFn = std::function<void(const ProgressRecord&)>;

struct EvolveResult {
    Repertoire repertoire;
    std::size_t evaluations = 0;
    std::size_t failed = 0;
    std::vector<DynamicsCondition> conditions;
};

/// MAP-Elites with worst-case-over-dynamics fitness. Samples the dynamics
/// conditions from config.seed, then spends exactly config.budget evaluations.
EvolveResult map_elites(const Environment& env, const EvolveConfig& config, const GridSpec& grid,
                        const ProgressFn& progress = {});

/// Same, with an explicit dynamics set.
EvolveResult map_elites(const Environment& env, const EvolveConfig& config, const GridSpec& grid,
                        std::vector<DynamicsCondition> conditions, const ProgressFn& progress = {});

}  // namespace sapt
