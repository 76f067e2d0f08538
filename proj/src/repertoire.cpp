#include "sapt/repertoire.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "sapt/error.hpp"

namespace sapt {

using nlohmann::json;

std::size_t GridSpec::num_cells() const {
    std::size_t k = 1;
    for (int b : bins) k *= static_cast<std::size_t>(b);
    return k;
}

void GridSpec::validate() const {
    if (bins.empty()) throw ConfigError("grid.bins", "at least one dimension required");
    if (lower.size() != bins.size() || upper.size() != bins.size())
        throw ConfigError("grid", "bins, lower and upper must have the same length");
    for (std::size_t i = 0; i < bins.size(); ++i) {
        if (bins[i] < 1) throw ConfigError("grid.bins", "every dimension needs >= 1 bin");
        if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || !(lower[i] < upper[i]))
            throw ConfigError("grid", "lower must be strictly below upper in every dimension");
    }
}

std::vector<double> GridSpec::normalize(const Descriptor& d) const {
    if (d.size() != dims()) throw InvalidDescriptor("descriptor dimension does not match grid");
    std::vector<double> out(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (!std::isfinite(d[i])) throw InvalidDescriptor("non-finite descriptor coordinate");
        out[i] = std::clamp((d[i] - lower[i]) / (upper[i] - lower[i]), 0.0, 1.0);
    }
    return out;
}

std::size_t discretize(const Descriptor& d, const GridSpec& grid) {
    if (d.size() != grid.dims()) throw InvalidDescriptor("descriptor dimension does not match grid");
    std::size_t index = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (!std::isfinite(d[i])) throw InvalidDescriptor("non-finite descriptor coordinate");
        const double u = (d[i] - grid.lower[i]) / (grid.upper[i] - grid.lower[i]);
        const double scaled = std::floor(u * grid.bins[i]);
        const long bin = static_cast<long>(std::clamp(scaled, 0.0, static_cast<double>(grid.bins[i] - 1)));
        index = index * static_cast<std::size_t>(grid.bins[i]) + static_cast<std::size_t>(bin);
    }
    return index;
}

Repertoire::Repertoire(GridSpec grid, std::string env_id, std::vector<std::vector<double>> dynamics_conditions)
    : grid_(std::move(grid)), env_id_(std::move(env_id)), conditions_(std::move(dynamics_conditions)) {
    grid_.validate();
}

const RepertoireEntry* Repertoire::find(std::size_t cell) const {
    auto it = cells_.find(cell);
    return it == cells_.end() ? nullptr : &it->second;
}

InsertOutcome Repertoire::try_insert(RepertoireEntry entry) {
    if (!std::isfinite(entry.safety_prior)) throw InvalidDescriptor("safety prior must be finite");
    const std::size_t cell = discretize(entry.descriptor, grid_);
    auto it = cells_.find(cell);
    if (it == cells_.end()) {
        cells_.emplace(cell, std::move(entry));
        occupied_.insert(std::lower_bound(occupied_.begin(), occupied_.end(), cell), cell);
        return InsertOutcome::Inserted;
    }
    // Ties keep the incumbent.
    if (it->second.safety_prior < entry.safety_prior) {
        it->second = std::move(entry);
        return InsertOutcome::Replaced;
    }
    return InsertOutcome::Discarded;
}

const RepertoireEntry& Repertoire::random_elite(Rng& rng) const {
    if (cells_.empty()) throw EmptyArchive("cannot pick an elite from an empty repertoire");
    std::uniform_int_distribution<std::size_t> pick(0, occupied_.size() - 1);
    return cells_.at(occupied_[pick(rng)]);
}

bool Repertoire::operator==(const Repertoire& other) const {
    return grid_ == other.grid_ && env_id_ == other.env_id_ && conditions_ == other.conditions_ &&
           cells_ == other.cells_;
}

void assign_rewards(Repertoire& rep, std::span<const double> goal, const RewardFn& reward_fn) {
    for (auto& [cell, entry] : rep.mutable_entries()) {
        if (entry.trajectory.empty())
            throw CorruptRepertoire("entry in cell " + std::to_string(cell) + " has no stored trajectory");
    }
    for (auto& [cell, entry] : rep.mutable_entries()) entry.reward_prior = reward_fn(entry.trajectory, goal);
}

namespace {

json rows(const std::vector<double>& flat, std::size_t width) {
    json out = json::array();
    if (width == 0) return out;
    for (std::size_t i = 0; i < flat.size(); i += width)
        out.push_back(std::vector<double>(flat.begin() + static_cast<long>(i),
                                          flat.begin() + static_cast<long>(i + width)));
    return out;
}

std::vector<double> flatten(const json& rows_json, std::size_t width, std::size_t line, const char* what) {
    std::vector<double> flat;
    for (const auto& row : rows_json) {
        if (!row.is_array() || row.size() != width)
            throw ParseError(line, std::string(what) + " row has the wrong width");
        for (const auto& v : row) {
            if (!v.is_number()) throw ParseError(line, std::string(what) + " holds a non-numeric value");
            flat.push_back(v.get<double>());
        }
    }
    return flat;
}

json entry_to_json(std::size_t cell, const RepertoireEntry& e) {
    json j;
    j["cell"] = cell;
    j["descriptor"] = e.descriptor.coords;
    j["policy"] = e.policy;
    j["safety"] = e.safety_prior;
    if (e.reward_prior) j["reward"] = *e.reward_prior;
    j["state_dim"] = e.trajectory.state_dim;
    j["action_dim"] = e.trajectory.action_dim;
    j["dt"] = e.trajectory.dt;
    j["truncated"] = e.trajectory.truncated;
    j["diverged"] = e.trajectory.diverged;
    j["trajectory"] = rows(e.trajectory.states, e.trajectory.state_dim);
    j["actions"] = rows(e.trajectory.actions, e.trajectory.action_dim);
    return j;
}

template <typename T>
T required(const json& j, const char* key, std::size_t line) {
    if (!j.contains(key)) throw ParseError(line, std::string("missing key '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& ex) {
        throw ParseError(line, std::string("bad value for '") + key + "': " + ex.what());
    }
}

}  // namespace

void save(const Repertoire& rep, std::ostream& out) {
    json header;
    header["format_version"] = kRepertoireFormatVersion;
    header["env_id"] = rep.env_id();
    header["grid"] = {{"bins", rep.grid().bins}, {"lower", rep.grid().lower}, {"upper", rep.grid().upper}};
    header["dynamics_conditions"] = rep.dynamics_conditions();
    header["num_entries"] = rep.size();
    out << header.dump() << '\n';
    for (const auto& [cell, entry] : rep.entries()) out << entry_to_json(cell, entry).dump() << '\n';
}

void save(const Repertoire& rep, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    save(rep, out);
    if (!out) throw Error("failed writing " + path.string());
}

Repertoire load(std::istream& in) {
    std::string text;
    std::size_t line_no = 0;
    auto parse_line = [&](const std::string& s) {
        try {
            return json::parse(s);
        } catch (const json::parse_error& ex) {
            throw ParseError(line_no, ex.what());
        }
    };

    if (!std::getline(in, text)) throw ParseError(1, "empty file, header expected");
    ++line_no;
    const json header = parse_line(text);
    if (!header.is_object()) throw ParseError(line_no, "header must be an object");
    const int version = required<int>(header, "format_version", line_no);
    if (version != kRepertoireFormatVersion)
        throw VersionError("repertoire format version " + std::to_string(version) + " is not supported (expected " +
                           std::to_string(kRepertoireFormatVersion) + ")");
    if (!header.contains("grid")) throw ParseError(line_no, "missing key 'grid'");
    GridSpec grid;
    grid.bins = required<std::vector<int>>(header["grid"], "bins", line_no);
    grid.lower = required<std::vector<double>>(header["grid"], "lower", line_no);
    grid.upper = required<std::vector<double>>(header["grid"], "upper", line_no);
    try {
        grid.validate();
    } catch (const ConfigError& ex) {
        throw ParseError(line_no, ex.what());
    }
    const auto expected = required<std::size_t>(header, "num_entries", line_no);
    Repertoire rep(grid, required<std::string>(header, "env_id", line_no),
                   required<std::vector<std::vector<double>>>(header, "dynamics_conditions", line_no));

    std::size_t count = 0;
    while (std::getline(in, text)) {
        ++line_no;
        if (text.empty()) continue;
        const json j = parse_line(text);
        if (!j.is_object()) throw ParseError(line_no, "entry must be an object");
        RepertoireEntry e;
        const auto cell = required<std::size_t>(j, "cell", line_no);
        e.descriptor.coords = required<std::vector<double>>(j, "descriptor", line_no);
        e.policy = required<std::vector<double>>(j, "policy", line_no);
        e.safety_prior = required<double>(j, "safety", line_no);
        if (j.contains("reward")) e.reward_prior = required<double>(j, "reward", line_no);
        auto& tr = e.trajectory;
        tr.state_dim = required<std::size_t>(j, "state_dim", line_no);
        tr.action_dim = required<std::size_t>(j, "action_dim", line_no);
        tr.dt = required<double>(j, "dt", line_no);
        tr.truncated = required<bool>(j, "truncated", line_no);
        tr.diverged = required<bool>(j, "diverged", line_no);
        if (!j.contains("trajectory") || !j["trajectory"].is_array())
            throw ParseError(line_no, "missing trajectory");
        tr.states = flatten(j["trajectory"], tr.state_dim, line_no, "trajectory");
        if (j.contains("actions")) tr.actions = flatten(j["actions"], tr.action_dim, line_no, "actions");

        std::size_t actual = 0;
        try {
            actual = discretize(e.descriptor, rep.grid());
        } catch (const InvalidDescriptor& ex) {
            throw ParseError(line_no, ex.what());
        }
        if (actual != cell) throw ParseError(line_no, "descriptor does not map to the stored cell index");
        if (rep.find(cell)) throw ParseError(line_no, "duplicate cell " + std::to_string(cell));
        rep.try_insert(std::move(e));
        ++count;
    }
    if (count != expected)
        throw ParseError(line_no + 1, "file truncated: expected " + std::to_string(expected) + " entries, found " +
                                          std::to_string(count));
    return rep;
}

Repertoire load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return load(in);
}

}  // namespace sapt
