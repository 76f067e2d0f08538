#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sapt/acquisition.hpp"
#include "sapt/envs.hpp"
#include "sapt/gp.hpp"
#include "sapt/repertoire.hpp"

namespace sapt {

struct AdaptConfig {
    std::vector<double> goal;  // task units
    double safety_limit = 0.0;
    double kappa = 2.0;
    int max_trials = 20;
    double ei_xi = 0.01;
    std::uint64_t seed = 0;
    /// Throw NoSafeCell instead of falling back to the max-LCB cell.
    bool abort_on_no_safe_cell = false;

    void validate(std::size_t goal_dim) const;  // throws ConfigError
};

enum class SelectionKind { Esi, ConservativeFallback };

const char* to_string(SelectionKind kind);

struct Selection {
    std::size_t cell = 0;
    SelectionKind kind = SelectionKind::Esi;
    CellPrediction predicted;
    double esi = 0.0;
    double lcb = 0.0;
};

struct Episode {
    int trial_index = 0;
    long cell_index = -1;  // -1 when the method does not search the repertoire
    Descriptor descriptor;
    double mu_r = 0.0;
    double sigma_r = 0.0;
    double mu_c = 0.0;
    double sigma_c = 0.0;
    double esi = 0.0;  // acquisition value at selection time
    double observed_reward = 0.0;
    double observed_safety = 0.0;
    bool violated = false;
    SelectionKind kind = SelectionKind::Esi;
    bool truncated = false;
    Trajectory trajectory;  // kept in memory, not serialized to CSV
};

struct AdaptationLog {
    std::string method;
    double safety_limit = 0.0;
    std::vector<Episode> episodes;

    int violations() const;
    /// Best reward over the first `upto` episodes (all if upto < 0).
    double best_reward(int upto = -1) const;
};

/// Candidate cells in index order with their normalized descriptors.
struct CellTable {
    std::vector<std::size_t> cells;
    std::vector<std::vector<double>> points;

    static CellTable from(const Repertoire& rep);
};

/// Incumbent for EI: best reward among non-violating observations, or
/// (lowest prior reward - 1) when there are none yet.
double incumbent(const AdaptationLog& log, const Repertoire& rep);

/// Argmax of ESI over the cells admitted by the LCB gate (ties to the lowest
/// cell index). With no admitted cell, the max-LCB cell is returned as a
/// ConservativeFallback, or NoSafeCell is thrown if so configured.
Selection select_from_predictions(const CellTable& table, const std::vector<Prediction>& reward,
                                  const std::vector<Prediction>& safety, const AdaptConfig& config, double r_best);

Selection select_next(const Repertoire& rep, const GPModel& gp_reward, const GPModel& gp_safety,
                      const AdaptConfig& config, double r_best);

/// Where the safety belief used by the gate comes from.
enum class SafetyGate {
    LearnedGp,    // safety transformation GP updated from real episodes
    StaticPrior,  // repertoire prior c_i taken as exact (zero variance)
};

struct AdaptOptions {
    GPHyper reward_hyper;
    GPHyper safety_hyper;
    SafetyGate gate = SafetyGate::LearnedGp;
    std::string method = "sapt";
};

/// Seed of the process noise for a given trial.
std::uint64_t episode_seed(std::uint64_t seed, int trial);

/// Episodic transfer: select, execute on the real system, update both GPs.
AdaptationLog adapt_loop(const Repertoire& rep, const RealEnv& real, const AdaptConfig& config,
                         const AdaptOptions& options);

}  // namespace sapt
