#include "sapt/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sapt/error.hpp"

namespace sapt {

void AdaptConfig::validate(std::size_t goal_dim) const {
    if (goal.size() != goal_dim) throw ConfigError("adapt.goal", "wrong dimension for this environment");
    for (double g : goal)
        if (!std::isfinite(g)) throw ConfigError("adapt.goal", "must be finite");
    if (!std::isfinite(safety_limit)) throw ConfigError("adapt.safety_limit", "must be finite");
    if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw ConfigError("adapt.kappa", "must be >= 0");
    if (max_trials < 1) throw ConfigError("adapt.max_trials", "must be >= 1");
    if (!(ei_xi >= 0.0)) throw ConfigError("adapt.ei_xi", "must be >= 0");
}

const char* to_string(SelectionKind kind) {
    return kind == SelectionKind::Esi ? "esi" : "fallback";
}

int AdaptationLog::violations() const {
    return static_cast<int>(std::count_if(episodes.begin(), episodes.end(), [](const Episode& e) { return e.violated; }));
}

double AdaptationLog::best_reward(int upto) const {
    const std::size_t n = upto < 0 ? episodes.size() : std::min(episodes.size(), static_cast<std::size_t>(upto));
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) best = std::max(best, episodes[i].observed_reward);
    return best;
}

CellTable CellTable::from(const Repertoire& rep) {
    CellTable t;
    t.cells.reserve(rep.size());
    t.points.reserve(rep.size());
    for (const auto& [cell, e] : rep.entries()) {
        t.cells.push_back(cell);
        t.points.push_back(rep.grid().normalize(e.descriptor));
    }
    return t;
}

double incumbent(const AdaptationLog& log, const Repertoire& rep) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& e : log.episodes)
        if (!e.violated) best = std::max(best, e.observed_reward);
    if (std::isfinite(best)) return best;
    double lowest = std::numeric_limits<double>::infinity();
    for (const auto& [cell, e] : rep.entries())
        if (e.reward_prior) lowest = std::min(lowest, *e.reward_prior);
    return std::isfinite(lowest) ? lowest - 1.0 : -1.0;
}

Selection select_from_predictions(const CellTable& table, const std::vector<Prediction>& reward,
                                  const std::vector<Prediction>& safety, const AdaptConfig& config, double r_best) {
    if (table.cells.empty()) throw EmptyArchive("cannot select from an empty repertoire");
    const std::size_t n = table.cells.size();
    std::vector<double> scores(n);
    std::vector<double> bounds(n);
#pragma omp parallel for schedule(static)
    for (long i = 0; i < static_cast<long>(n); ++i) {
        const auto k = static_cast<std::size_t>(i);
        bounds[k] = lcb(safety[k].mean, safety[k].stddev(), config.kappa);
        scores[k] = esi({reward[k], safety[k]}, r_best, config.safety_limit, config.kappa, config.ei_xi);
    }

    long best = -1;
    for (std::size_t k = 0; k < n; ++k) {
        if (bounds[k] < config.safety_limit) continue;
        if (best < 0 || scores[k] > scores[static_cast<std::size_t>(best)]) best = static_cast<long>(k);
    }
    SelectionKind kind = SelectionKind::Esi;
    if (best < 0) {
        if (config.abort_on_no_safe_cell) throw NoSafeCell("no repertoire cell clears the safety LCB");
        kind = SelectionKind::ConservativeFallback;
        best = 0;
        for (std::size_t k = 1; k < n; ++k)
            if (bounds[k] > bounds[static_cast<std::size_t>(best)]) best = static_cast<long>(k);
    }
    const auto k = static_cast<std::size_t>(best);
    return Selection{table.cells[k], kind, {reward[k], safety[k]}, scores[k], bounds[k]};
}

Selection select_next(const Repertoire& rep, const GPModel& gp_reward, const GPModel& gp_safety,
                      const AdaptConfig& config, double r_best) {
    const CellTable table = CellTable::from(rep);
    return select_from_predictions(table, gp_reward.predict_batch(table.points), gp_safety.predict_batch(table.points),
                                   config, r_best);
}

std::uint64_t episode_seed(std::uint64_t seed, int trial) {
    // splitmix64 finalizer over (seed, trial)
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(trial) + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

AdaptationLog adapt_loop(const Repertoire& rep_in, const RealEnv& real, const AdaptConfig& config,
                         const AdaptOptions& options) {
    const Environment& task = real.task();
    config.validate(task.goal_dim());
    if (rep_in.empty()) throw EmptyArchive("adaptation needs a non-empty repertoire");

    Repertoire rep = rep_in;
    assign_rewards(rep, config.goal, task.reward_fn());

    const CellTable table = CellTable::from(rep);
    GPModel gp_reward(RepertoirePrior(rep, RepertoirePrior::Field::Reward), options.reward_hyper);
    GPModel gp_safety(RepertoirePrior(rep, RepertoirePrior::Field::Safety), options.safety_hyper);

    std::vector<Prediction> static_safety;
    if (options.gate == SafetyGate::StaticPrior) {
        for (const auto& [cell, e] : rep.entries()) static_safety.push_back({e.safety_prior, 0.0});
    }

    AdaptationLog log;
    log.method = options.method;
    log.safety_limit = config.safety_limit;
    for (int trial = 0; trial < config.max_trials; ++trial) {
        const double r_best = incumbent(log, rep);
        const auto reward_pred = gp_reward.predict_batch(table.points);
        const auto safety_pred =
            options.gate == SafetyGate::LearnedGp ? gp_safety.predict_batch(table.points) : static_safety;
        const Selection sel = select_from_predictions(table, reward_pred, safety_pred, config, r_best);

        const RepertoireEntry& entry = *rep.find(sel.cell);
        Episode ep;
        ep.trial_index = trial;
        ep.cell_index = static_cast<long>(sel.cell);
        ep.descriptor = entry.descriptor;
        ep.mu_r = sel.predicted.reward.mean;
        ep.sigma_r = sel.predicted.reward.stddev();
        ep.mu_c = sel.predicted.safety.mean;
        ep.sigma_c = sel.predicted.safety.stddev();
        ep.esi = sel.esi;
        ep.kind = sel.kind;
        ep.trajectory = real.execute(entry.policy, episode_seed(config.seed, trial));
        ep.observed_reward = task.reward(ep.trajectory, config.goal);
        ep.observed_safety = task.safety(ep.trajectory);
        ep.violated = ep.observed_safety < config.safety_limit;
        ep.truncated = ep.trajectory.truncated;

        const auto x = rep.grid().normalize(entry.descriptor);
        gp_reward.add_observation({x, ep.observed_reward});
        if (options.gate == SafetyGate::LearnedGp) gp_safety.add_observation({x, ep.observed_safety});
        log.episodes.push_back(std::move(ep));
    }
    return log;
}

}  // namespace sapt
