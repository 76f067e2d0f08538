#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "sapt/adapt.hpp"
#include "sapt/config.hpp"
#include "sapt/evolve.hpp"

namespace sapt {

struct EvolveSummary {
    std::size_t cells_filled = 0;
    double coverage_fraction = 0.0;
    double min_safety = 0.0;
    double mean_safety = 0.0;
    double max_safety = 0.0;
    std::size_t evaluations = 0;
    std::size_t failed = 0;
};

EvolveSummary summarize(const EvolveResult& result);

/// Writes repertoire.jsonl, progress.csv and summary.json into `out_dir`.
EvolveSummary cmd_evolve(const ExperimentConfig& config, const std::filesystem::path& out_dir);

/// Hidden dynamics of the real system for replicate k.
std::vector<double> real_dynamics_for(const ExperimentConfig& config, int replicate);

/// One adaptation run of config.method with seed config.seed + replicate.
AdaptationLog run_replicate(const ExperimentConfig& config, const Repertoire& rep, int replicate);

/// Runs config.replicates adaptations in parallel. Writes replicate_NNN.csv,
/// replicate_NNN.json, aggregate.json and run.json into `out_dir`.
/// Throws ConfigError if the repertoire was evolved for another environment.
std::vector<AdaptationLog> cmd_adapt(const ExperimentConfig& config, const std::filesystem::path& repertoire_path,
                                     const std::filesystem::path& out_dir);

/// Per-episode comparison over finished adapt runs. Writes `out` and
/// <stem>_violations.csv next to it. Incomplete runs are reported on `warn`
/// and skipped; throws Error when nothing usable is left.
void cmd_report(const std::vector<std::filesystem::path>& run_dirs, const std::filesystem::path& out,
                std::ostream& warn);

// Per-replicate log files.
void write_log_csv(const AdaptationLog& log, int replicate, std::ostream& out);
AdaptationLog read_log_csv(std::istream& in);

}  // namespace sapt
