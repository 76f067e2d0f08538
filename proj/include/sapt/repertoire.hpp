#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sapt/trajectory.hpp"

namespace sapt {

using Rng = std::mt19937_64;

/// Goal-space outcome of a policy, in the units the environment reports.
struct Descriptor {
    std::vector<double> coords;

    std::size_t size() const { return coords.size(); }
    double operator[](std::size_t i) const { return coords[i]; }
    bool operator==(const Descriptor&) const = default;
};

/// Regular grid over the goal space. Bounds are in task units.
struct GridSpec {
    std::vector<int> bins;
    std::vector<double> lower;
    std::vector<double> upper;

    std::size_t dims() const { return bins.size(); }
    std::size_t num_cells() const;

    /// Throws ConfigError if the grid is malformed.
    void validate() const;

    /// Map a task-unit descriptor to [0,1]^d, clamping out-of-range values.
    std::vector<double> normalize(const Descriptor& d) const;

    bool operator==(const GridSpec&) const = default;
};

/// Row-major cell index of `d`. Out-of-range coordinates are clamped to the
/// boundary bin; the upper bound belongs to the last bin.
std::size_t discretize(const Descriptor& d, const GridSpec& grid);

struct RepertoireEntry {
    std::vector<double> policy;
    Trajectory trajectory;
    Descriptor descriptor;
    double safety_prior = 0.0;
    std::optional<double> reward_prior;

    bool operator==(const RepertoireEntry&) const = default;
};

enum class InsertOutcome { Inserted, Replaced, Discarded };

/// MAP-Elites archive: at most one elite per grid cell, keyed by cell index.
class Repertoire {
public:
    Repertoire() = default;
    explicit Repertoire(GridSpec grid, std::string env_id = {},
                        std::vector<std::vector<double>> dynamics_conditions = {});

    const GridSpec& grid() const { return grid_; }
    const std::string& env_id() const { return env_id_; }
    const std::vector<std::vector<double>>& dynamics_conditions() const { return conditions_; }

    std::size_t size() const { return cells_.size(); }
    bool empty() const { return cells_.empty(); }

    const RepertoireEntry* find(std::size_t cell) const;

    /// Insert if the cell is empty, replace if the candidate is strictly safer.
    InsertOutcome try_insert(RepertoireEntry entry);

    /// Uniform over occupied cells. Throws EmptyArchive when empty.
    const RepertoireEntry& random_elite(Rng& rng) const;

    /// Entries ordered by cell index.
    const std::map<std::size_t, RepertoireEntry>& entries() const { return cells_; }
    std::map<std::size_t, RepertoireEntry>& mutable_entries() { return cells_; }

    bool operator==(const Repertoire& other) const;

private:
    GridSpec grid_;
    std::string env_id_;
    std::vector<std::vector<double>> conditions_;
    std::map<std::size_t, RepertoireEntry> cells_;
    std::vector<std::size_t> occupied_;  // sorted cell indices, for uniform picks
};

using RewardFn = std::function<double(const Trajectory&, std::span<const double> goal)>;

/// Annotate every entry with reward_fn(trajectory, goal). Safety priors are untouched.
void assign_rewards(Repertoire& rep, std::span<const double> goal, const RewardFn& reward_fn);

inline constexpr int kRepertoireFormatVersion = 1;

// JSON-lines persistence. Header line first, then one entry per line.
void save(const Repertoire& rep, std::ostream& out);
void save(const Repertoire& rep, const std::filesystem::path& path);
Repertoire load(std::istream& in);
Repertoire load(const std::filesystem::path& path);

}  // namespace sapt
