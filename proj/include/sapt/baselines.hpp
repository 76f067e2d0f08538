#pragma once

#include <memory>
#include <string>
#include <vector>

#include "sapt/adapt.hpp"
#include "sapt/evolve.hpp"

namespace sapt {

enum class Method { Sapt, NoGpSafety, SingleDynamics, Cbo };

/// CLI identifiers: sapt, no-gp-safety, single-dynamics, cbo.
const char* method_id(Method m);
Method parse_method(const std::string& id);  // throws ConfigError

/// Repertoire transfer with the static repertoire safety prior as the gate.
AdaptationLog run_no_gp_safety(const Repertoire& rep, const RealEnv& real, const AdaptConfig& config,
                               AdaptOptions options);

struct SingleDynamicsRun {
    Repertoire repertoire;
    AdaptationLog log;
};

/// Evolve a repertoire on one condition drawn from U(Psi), then run the full transfer on it.
SingleDynamicsRun run_single_dynamics(const Environment& env, EvolveConfig evolve_config, const GridSpec& grid,
                                      const RealEnv& real, const AdaptConfig& config, AdaptOptions options);

struct CboOptions {
    GPHyper reward_hyper;  // over policy parameters normalized to [0,1]^d
    GPHyper safety_hyper;  // models c - limit with a zero prior mean
    int candidates = 4096;
};

/// Acquisition of constrained BO: EI(theta) * Pr(c(theta) >= limit).
double cbo_acquisition(const Prediction& reward, const Prediction& safety_margin, double r_best, double xi);

// Acquisition over a candidate set (rows are normalized policies); parallel
// kernel and its serial reference.
std::vector<double> cbo_scores(const GPModel& reward, const GPModel& safety_margin,
                               const std::vector<std::vector<double>>& candidates, double r_best, double xi);
std::vector<double> cbo_scores_serial(const GPModel& reward, const GPModel& safety_margin,
                                      const std::vector<std::vector<double>>& candidates, double r_best, double xi);

/// Constrained BO directly in policy-parameter space with uniform random
/// search as the inner maximizer.
AdaptationLog run_cbo(const RealEnv& real, const AdaptConfig& config, const CboOptions& options);

}  // namespace sapt
