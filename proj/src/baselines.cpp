#include "sapt/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sapt/error.hpp"

namespace sapt {

const char* method_id(Method m) {
    switch (m) {
        case Method::Sapt: return "sapt";
        case Method::NoGpSafety: return "no-gp-safety";
        case Method::SingleDynamics: return "single-dynamics";
        case Method::Cbo: return "cbo";
    }
    return "unknown";
}

Method parse_method(const std::string& id) {
    for (Method m : {Method::Sapt, Method::NoGpSafety, Method::SingleDynamics, Method::Cbo})
        if (id == method_id(m)) return m;
    throw ConfigError("method", "unknown method '" + id + "' (expected sapt, no-gp-safety, single-dynamics, cbo)");
}

AdaptationLog run_no_gp_safety(const Repertoire& rep, const RealEnv& real, const AdaptConfig& config,
                               AdaptOptions options) {
    options.gate = SafetyGate::StaticPrior;
    options.method = method_id(Method::NoGpSafety);
    return adapt_loop(rep, real, config, options);
}

SingleDynamicsRun run_single_dynamics(const Environment& env, EvolveConfig evolve_config, const GridSpec& grid,
                                      const RealEnv& real, const AdaptConfig& config, AdaptOptions options) {
    evolve_config.n_dynamics = 1;
    auto evolved = map_elites(env, evolve_config, grid);
    options.gate = SafetyGate::LearnedGp;
    options.method = method_id(Method::SingleDynamics);
    AdaptationLog log = adapt_loop(evolved.repertoire, real, config, options);
    return {std::move(evolved.repertoire), std::move(log)};
}

double cbo_acquisition(const Prediction& reward, const Prediction& safety_margin, double r_best, double xi) {
    return expected_improvement(reward.mean, reward.stddev(), r_best, xi) *
           probability_feasible(safety_margin.mean, safety_margin.stddev(), 0.0);
}

std::vector<double> cbo_scores_serial(const GPModel& reward, const GPModel& safety_margin,
                                      const std::vector<std::vector<double>>& candidates, double r_best, double xi) {
    std::vector<double> out;
    out.reserve(candidates.size());
    for (const auto& u : candidates)
        out.push_back(cbo_acquisition(reward.predict(u), safety_margin.predict(u), r_best, xi));
    return out;
}

std::vector<double> cbo_scores(const GPModel& reward, const GPModel& safety_margin,
                               const std::vector<std::vector<double>>& candidates, double r_best, double xi) {
    std::vector<double> out(candidates.size());
    const long n = static_cast<long>(candidates.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) {
        const auto& u = candidates[static_cast<std::size_t>(i)];
        out[static_cast<std::size_t>(i)] = cbo_acquisition(reward.predict(u), safety_margin.predict(u), r_best, xi);
    }
    return out;
}

AdaptationLog run_cbo(const RealEnv& real, const AdaptConfig& config, const CboOptions& options) {
    const Environment& task = real.task();
    config.validate(task.goal_dim());
    if (options.candidates < 1) throw ConfigError("cbo.candidates", "must be >= 1");
    const Box& bounds = task.policy_bounds();
    const std::size_t dim = bounds.size();

    GPModel gp_reward(constant_prior(0.0), options.reward_hyper);
    GPModel gp_margin(constant_prior(0.0), options.safety_hyper);

    AdaptationLog log;
    log.method = method_id(Method::Cbo);
    log.safety_limit = config.safety_limit;
    Rng rng(config.seed ^ 0xc3a5c85c97cb3127ULL);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    for (int trial = 0; trial < config.max_trials; ++trial) {
        double r_best = -1.0;
        for (const auto& e : log.episodes)
            if (!e.violated) r_best = std::max(r_best, e.observed_reward);

        std::vector<std::vector<double>> candidates(static_cast<std::size_t>(options.candidates),
                                                    std::vector<double>(dim));
        for (auto& u : candidates)
            for (double& v : u) v = unit(rng);
        const auto scores = cbo_scores(gp_reward, gp_margin, candidates, r_best, config.ei_xi);
        const auto best = static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin());
        const auto& u = candidates[best];

        std::vector<double> theta(dim);
        for (std::size_t i = 0; i < dim; ++i)
            theta[i] = std::clamp(bounds[i].lo + u[i] * bounds[i].span(), bounds[i].lo, bounds[i].hi);

        const Prediction pr = gp_reward.predict(u);
        const Prediction pm = gp_margin.predict(u);
        Episode ep;
        ep.trial_index = trial;
        ep.cell_index = -1;
        ep.mu_r = pr.mean;
        ep.sigma_r = pr.stddev();
        ep.mu_c = pm.mean + config.safety_limit;
        ep.sigma_c = pm.stddev();
        ep.esi = scores[best];
        ep.kind = SelectionKind::Esi;
        ep.trajectory = real.execute(theta, episode_seed(config.seed, trial));
        ep.descriptor = task.descriptor(ep.trajectory);
        ep.observed_reward = task.reward(ep.trajectory, config.goal);
        ep.observed_safety = task.safety(ep.trajectory);
        ep.violated = ep.observed_safety < config.safety_limit;
        ep.truncated = ep.trajectory.truncated;

        gp_reward.add_observation({u, ep.observed_reward});
        gp_margin.add_observation({u, ep.observed_safety - config.safety_limit});
        log.episodes.push_back(std::move(ep));
    }
    return log;
}

}  // namespace sapt
