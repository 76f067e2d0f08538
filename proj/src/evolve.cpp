#include "sapt/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

#include "sapt/error.hpp"

namespace sapt {

void EvolveConfig::validate() const {
    if (n_dynamics < 1) throw ConfigError("evolve.n_dynamics", "must be >= 1");
    if (n_init < 1) throw ConfigError("evolve.n_init", "must be >= 1");
    if (budget < n_init) throw ConfigError("evolve.budget", "must satisfy budget >= n_init >= 1");
    if (!(mutation_sigma > 0.0)) throw ConfigError("evolve.mutation_sigma", "must be > 0");
    if (batch_size < 1) throw ConfigError("evolve.batch_size", "must be >= 1");
    if (progress_interval < 1) throw ConfigError("evolve.progress_interval", "must be >= 1");
}

std::vector<DynamicsCondition> sample_dynamics(const Box& bounds, int n, Rng& rng) {
    if (n < 1) throw ConfigError("evolve.n_dynamics", "must be >= 1");
    for (const auto& b : bounds)
        if (!std::isfinite(b.lo) || !std::isfinite(b.hi) || b.lo > b.hi)
            throw ConfigError("dynamics bounds", "degenerate interval (lo > hi or non-finite)");
    std::vector<DynamicsCondition> out(static_cast<std::size_t>(n));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (auto& c : out) {
        c.params.reserve(bounds.size());
        for (const auto& b : bounds) c.params.push_back(b.lo + unit(rng) * b.span());
    }
    return out;
}

Evaluation evaluate_policy(const Environment& env, std::span<const double> policy,
                           std::span<const DynamicsCondition> conditions) {
    if (conditions.empty()) throw ConfigError("dynamics", "at least one condition is required");
    Evaluation ev;
    ev.trajectories.reserve(conditions.size());
    ev.fitness = std::numeric_limits<double>::infinity();
    std::vector<double> sum;
    bool ok = true;
    for (std::size_t i = 0; i < conditions.size(); ++i) {
        Trajectory tr = env.rollout(policy, conditions[i].params);
        if (tr.diverged) {
            ok = false;
            ev.trajectories.push_back(std::move(tr));
            continue;
        }
        const double c = env.safety(tr);
        const Descriptor d = env.descriptor(tr);
        if (sum.empty()) sum.assign(d.size(), 0.0);
        for (std::size_t k = 0; k < d.size(); ++k) sum[k] += d[k];
        if (!std::isfinite(c)) ok = false;
        if (c < ev.fitness) {
            ev.fitness = c;
            ev.worst = i;
        }
        ev.trajectories.push_back(std::move(tr));
    }
    if (ok) {
        for (double& s : sum) s /= static_cast<double>(conditions.size());
        ev.descriptor.coords = std::move(sum);
        ok = std::all_of(ev.descriptor.coords.begin(), ev.descriptor.coords.end(),
                         [](double v) { return std::isfinite(v); });
    }
    ev.ok = ok;
    return ev;
}

std::vector<double> mutate(std::span<const double> policy, double sigma, const Box& bounds, Rng& rng) {
    std::normal_distribution<double> eps(0.0, 1.0);
    std::vector<double> out(policy.begin(), policy.end());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = std::clamp(out[i] + sigma * bounds[i].span() * eps(rng), bounds[i].lo, bounds[i].hi);
    return out;
}

std::vector<double> random_policy(const Box& bounds, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> out;
    out.reserve(bounds.size());
    for (const auto& b : bounds) out.push_back(b.lo + unit(rng) * b.span());
    return out;
}

std::vector<Evaluation> evaluate_batch_serial(const Environment& env,
                                              const std::vector<std::vector<double>>& policies,
                                              std::span<const DynamicsCondition> conditions) {
    std::vector<Evaluation> out;
    out.reserve(policies.size());
    for (const auto& p : policies) out.push_back(evaluate_policy(env, p, conditions));
    return out;
}

std::vector<Evaluation> evaluate_batch(const Environment& env, const std::vector<std::vector<double>>& policies,
                                       std::span<const DynamicsCondition> conditions) {
    const long n = static_cast<long>(policies.size());
    std::vector<Evaluation> out(policies.size());
    std::vector<std::exception_ptr> errors(policies.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
        try {
            out[static_cast<std::size_t>(i)] = evaluate_policy(env, policies[static_cast<std::size_t>(i)], conditions);
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

namespace {

ProgressRecord snapshot(const Repertoire& rep, std::size_t evaluations) {
    ProgressRecord r;
    r.evaluations = evaluations;
    r.cells_filled = rep.size();
    if (rep.empty()) {
        r.best_safety = std::numeric_limits<double>::quiet_NaN();
        r.mean_safety = std::numeric_limits<double>::quiet_NaN();
        return r;
    }
    double best = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (const auto& [cell, e] : rep.entries()) {
        best = std::max(best, e.safety_prior);
        sum += e.safety_prior;
    }
    r.best_safety = best;
    r.mean_safety = sum / static_cast<double>(rep.size());
    return r;
}

}  // namespace

EvolveResult map_elites(const Environment& env, const EvolveConfig& config, const GridSpec& grid,
                        const ProgressFn& progress) {
    config.validate();
    Rng rng(config.seed);
    auto conditions = sample_dynamics(env.dynamics_bounds(), config.n_dynamics, rng);
    // Policy generation draws from a separate stream so the dynamics set does
    // not depend on how many candidates are generated afterwards.
    return map_elites(env, config, grid, std::move(conditions), progress);
}

EvolveResult map_elites(const Environment& env, const EvolveConfig& config, const GridSpec& grid,
                        std::vector<DynamicsCondition> conditions, const ProgressFn& progress) {
    config.validate();
    if (conditions.empty()) throw ConfigError("dynamics", "at least one condition is required");

    std::vector<std::vector<double>> header_conditions;
    for (const auto& c : conditions) header_conditions.push_back(c.params);

    EvolveResult result{Repertoire(grid, env.id(), header_conditions), 0, 0, conditions};
    Repertoire& rep = result.repertoire;
    Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    const Box& bounds = env.policy_bounds();
    const auto budget = static_cast<std::size_t>(config.budget);
    const auto n_init = static_cast<std::size_t>(config.n_init);
    const auto batch = static_cast<std::size_t>(config.batch_size);
    const auto interval = static_cast<std::size_t>(config.progress_interval);

    auto commit = [&](std::vector<std::vector<double>>& candidates) {
        auto evals = config.parallel ? evaluate_batch(env, candidates, conditions)
                                     : evaluate_batch_serial(env, candidates, conditions);
        for (std::size_t i = 0; i < evals.size(); ++i) {
            Evaluation& ev = evals[i];
            ++result.evaluations;
            if (!ev.ok) {
                ++result.failed;
            } else {
                RepertoireEntry entry{std::move(candidates[i]), std::move(ev.trajectories[ev.worst]),
                                      std::move(ev.descriptor), ev.fitness, std::nullopt};
                rep.try_insert(std::move(entry));
            }
            if (progress && (result.evaluations % interval == 0 || result.evaluations == budget))
                progress(snapshot(rep, result.evaluations));
        }
    };

    std::vector<std::vector<double>> candidates;
    while (result.evaluations < n_init) {
        candidates.clear();
        const std::size_t n = std::min(batch, n_init - result.evaluations);
        for (std::size_t i = 0; i < n; ++i) candidates.push_back(random_policy(bounds, rng));
        commit(candidates);
    }
    if (rep.empty()) throw EvolutionFailed("no initial policy produced a valid evaluation");

    while (result.evaluations < budget) {
        candidates.clear();
        const std::size_t n = std::min(batch, budget - result.evaluations);
        for (std::size_t i = 0; i < n; ++i)
            candidates.push_back(mutate(rep.random_elite(rng).policy, config.mutation_sigma, bounds, rng));
        commit(candidates);
    }
    return result;
}

}  // namespace sapt
