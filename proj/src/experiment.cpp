#include "sapt/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "sapt/baselines.hpp"
#include "sapt/error.hpp"
#include "sapt/stats.hpp"

namespace sapt {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double v) {
    std::ostringstream s;
    s.imbue(std::locale::classic());
    s << std::setprecision(17) << v;
    return s.str();
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error("cannot write " + p.string());
    return f;
}

std::string replicate_stem(int k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "replicate_%03d", k);
    return buf;
}

struct EpisodeStats {
    double reward_median, reward_q25, reward_q75;
    double safety_median, safety_q25, safety_q75;
};

// Statistics over replicates at each episode index; replicates that stopped
// early only contribute to the episodes they reached.
std::vector<EpisodeStats> per_episode(const std::vector<AdaptationLog>& logs) {
    std::size_t n = 0;
    for (const auto& l : logs) n = std::max(n, l.episodes.size());
    std::vector<EpisodeStats> out;
    for (std::size_t t = 0; t < n; ++t) {
        std::vector<double> r, c;
        for (const auto& l : logs) {
            if (t < l.episodes.size()) {
                r.push_back(l.episodes[t].observed_reward);
                c.push_back(l.episodes[t].observed_safety);
            }
        }
        out.push_back({stats::median(r), stats::quantile(r, 0.25), stats::quantile(r, 0.75), stats::median(c),
                       stats::quantile(c, 0.25), stats::quantile(c, 0.75)});
    }
    return out;
}

std::vector<double> violation_counts(const std::vector<AdaptationLog>& logs) {
    std::vector<double> v;
    for (const auto& l : logs) v.push_back(l.violations());
    return v;
}

}  // namespace

EvolveSummary summarize(const EvolveResult& result) {
    EvolveSummary s;
    const Repertoire& rep = result.repertoire;
    s.cells_filled = rep.size();
    s.coverage_fraction = static_cast<double>(rep.size()) / static_cast<double>(rep.grid().num_cells());
    s.evaluations = result.evaluations;
    s.failed = result.failed;
    std::vector<double> safety;
    for (const auto& [cell, e] : rep.entries()) safety.push_back(e.safety_prior);
    if (!safety.empty()) {
        s.min_safety = *std::min_element(safety.begin(), safety.end());
        s.max_safety = *std::max_element(safety.begin(), safety.end());
        s.mean_safety = stats::mean(safety);
    }
    return s;
}

EvolveSummary cmd_evolve(const ExperimentConfig& config, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    auto progress = open_out(out_dir / "progress.csv");
    progress << "evaluations,cells_filled,best_safety,mean_safety\n";
    const auto result = map_elites(*config.env, config.evolve, config.grid, [&](const ProgressRecord& p) {
        progress << p.evaluations << ',' << p.cells_filled << ',' << num(p.best_safety) << ','
                 << num(p.mean_safety) << '\n';
    });
    save(result.repertoire, out_dir / "repertoire.jsonl");

    const EvolveSummary s = summarize(result);
    json j;
    j["env"] = config.env_id;
    j["cells_filled"] = s.cells_filled;
    j["num_cells"] = config.grid.num_cells();
    j["coverage_fraction"] = s.coverage_fraction;
    j["min_safety"] = s.min_safety;
    j["mean_safety"] = s.mean_safety;
    j["max_safety"] = s.max_safety;
    j["evaluations"] = s.evaluations;
    j["failed_evaluations"] = s.failed;
    open_out(out_dir / "summary.json") << j.dump(2) << '\n';
    return s;
}

std::vector<double> real_dynamics_for(const ExperimentConfig& config, int replicate) {
    if (config.real_dynamics) return *config.real_dynamics;
    Rng rng(config.seed + static_cast<std::uint64_t>(replicate) + 0x5851f42d4c957f2dULL);
    return sample_dynamics(config.env->dynamics_bounds(), 1, rng).front().params;
}

AdaptationLog run_replicate(const ExperimentConfig& config, const Repertoire& rep, int replicate) {
    const RealEnv real = make_real_env(config.env, real_dynamics_for(config, replicate), config.process_noise);
    AdaptConfig ac = config.adapt;
    ac.seed = config.seed + static_cast<std::uint64_t>(replicate);
    AdaptOptions opts = config.adapt_options;
    opts.method = method_id(config.method);
    switch (config.method) {
        case Method::Sapt:
            opts.gate = SafetyGate::LearnedGp;
            return adapt_loop(rep, real, ac, opts);
        case Method::NoGpSafety:
            return run_no_gp_safety(rep, real, ac, opts);
        case Method::SingleDynamics: {
            EvolveConfig ec = config.evolve;
            ec.seed = ac.seed;
            return run_single_dynamics(*config.env, ec, config.grid, real, ac, opts).log;
        }
        case Method::Cbo:
            return run_cbo(real, ac, config.cbo);
    }
    throw Error("unhandled method");
}

void write_log_csv(const AdaptationLog& log, int replicate, std::ostream& out) {
    std::size_t dims = 0;
    for (const auto& e : log.episodes) dims = std::max(dims, e.descriptor.size());
    out << "method,replicate,trial_index,cell_index";
    for (std::size_t i = 0; i < dims; ++i) out << ",descriptor_" << i;
    out << ",mu_r,sigma_r,mu_c,sigma_c,esi,observed_reward,observed_safety,violated,selection,truncated,"
           "safety_limit\n";
    for (const auto& e : log.episodes) {
        out << log.method << ',' << replicate << ',' << e.trial_index << ',' << e.cell_index;
        for (std::size_t i = 0; i < dims; ++i) out << ',' << (i < e.descriptor.size() ? num(e.descriptor[i]) : "");
        out << ',' << num(e.mu_r) << ',' << num(e.sigma_r) << ',' << num(e.mu_c) << ',' << num(e.sigma_c) << ','
            << num(e.esi) << ',' << num(e.observed_reward) << ',' << num(e.observed_safety) << ','
            << (e.violated ? 1 : 0) << ',' << to_string(e.kind) << ',' << (e.truncated ? 1 : 0) << ','
            << num(log.safety_limit) << '\n';
    }
}

AdaptationLog read_log_csv(std::istream& in) {
    auto split = [](const std::string& line) {
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) cols.push_back(c);
        if (!line.empty() && line.back() == ',') cols.emplace_back();
        return cols;
    };
    std::string line;
    if (!std::getline(in, line)) throw ParseError(1, "empty log file");
    const auto header = split(line);
    std::map<std::string, std::size_t> col;
    std::vector<std::size_t> desc_cols;
    for (std::size_t i = 0; i < header.size(); ++i) {
        col[header[i]] = i;
        if (header[i].rfind("descriptor_", 0) == 0) desc_cols.push_back(i);
    }
    for (const char* need : {"method", "trial_index", "cell_index", "observed_reward", "observed_safety",
                             "violated", "selection", "safety_limit"})
        if (!col.count(need)) throw ParseError(1, std::string("missing column ") + need);

    AdaptationLog log;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split(line);
        if (f.size() != header.size()) throw ParseError(lineno, "wrong number of columns");
        try {
            auto d = [&](const char* name) { return col.count(name) ? std::stod(f[col.at(name)]) : 0.0; };
            Episode e;
            log.method = f[col["method"]];
            log.safety_limit = d("safety_limit");
            e.trial_index = std::stoi(f[col["trial_index"]]);
            e.cell_index = std::stol(f[col["cell_index"]]);
            for (auto c : desc_cols)
                if (!f[c].empty()) e.descriptor.coords.push_back(std::stod(f[c]));
            e.mu_r = d("mu_r");
            e.sigma_r = d("sigma_r");
            e.mu_c = d("mu_c");
            e.sigma_c = d("sigma_c");
            e.esi = d("esi");
            e.observed_reward = d("observed_reward");
            e.observed_safety = d("observed_safety");
            e.violated = f[col["violated"]] == "1";
            e.kind = f[col["selection"]] == "fallback" ? SelectionKind::ConservativeFallback : SelectionKind::Esi;
            e.truncated = col.count("truncated") && f[col["truncated"]] == "1";
            log.episodes.push_back(std::move(e));
        } catch (const std::logic_error&) {
            throw ParseError(lineno, "malformed number");
        }
    }
    return log;
}

namespace {

json aggregate_json(const std::vector<AdaptationLog>& logs, const std::string& method) {
    json j;
    j["method"] = method;
    j["replicates"] = logs.size();
    json eps = json::array();
    const auto st = per_episode(logs);
    for (std::size_t t = 0; t < st.size(); ++t) {
        eps.push_back({{"episode", t + 1},
                       {"reward_median", st[t].reward_median},
                       {"reward_q25", st[t].reward_q25},
                       {"reward_q75", st[t].reward_q75},
                       {"safety_median", st[t].safety_median},
                       {"safety_q25", st[t].safety_q25},
                       {"safety_q75", st[t].safety_q75}});
    }
    j["episodes"] = eps;
    const auto v = violation_counts(logs);
    j["violations"] = {{"mean", stats::mean(v)}, {"std", stats::stddev(v)}};
    std::vector<double> best;
    for (const auto& l : logs) best.push_back(l.best_reward());
    j["best_reward"] = {{"median", stats::median(best)},
                        {"q25", stats::quantile(best, 0.25)},
                        {"q75", stats::quantile(best, 0.75)}};
    return j;
}

}  // namespace

std::vector<AdaptationLog> cmd_adapt(const ExperimentConfig& config, const fs::path& repertoire_path,
                                     const fs::path& out_dir) {
    const Repertoire rep = load(repertoire_path);
    if (rep.env_id() != config.env_id)
        throw ConfigError("env", "repertoire was evolved for '" + rep.env_id() + "', config asks for '" +
                                     config.env_id + "'");
    if (rep.grid().dims() != config.env->goal_dim())
        throw ConfigError("grid", "repertoire grid does not match the environment goal space");
    fs::create_directories(out_dir);

    const int n = config.replicates;
    std::vector<AdaptationLog> logs(static_cast<std::size_t>(n));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic, 1)
    for (int k = 0; k < n; ++k) {
        try {
            auto& log = logs[static_cast<std::size_t>(k)];
            log = run_replicate(config, rep, k);
            const std::string stem = replicate_stem(k);
            auto csv = open_out(out_dir / (stem + ".csv"));
            write_log_csv(log, k, csv);
            json s{{"method", log.method},
                   {"replicate", k},
                   {"seed", config.seed + static_cast<std::uint64_t>(k)},
                   {"real_dynamics", real_dynamics_for(config, k)},
                   {"best_reward", log.best_reward()},
                   {"violations", log.violations()},
                   {"episodes", log.episodes.size()}};
            open_out(out_dir / (stem + ".json")) << s.dump(2) << '\n';
        } catch (...) {
            errors[static_cast<std::size_t>(k)] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    const std::string method = method_id(config.method);
    open_out(out_dir / "aggregate.json") << aggregate_json(logs, method).dump(2) << '\n';
    json run{{"env", config.env_id},
             {"method", method},
             {"replicates", n},
             {"max_trials", config.adapt.max_trials},
             {"safety_limit", config.adapt.safety_limit},
             {"seed", config.seed}};
    open_out(out_dir / "run.json") << run.dump(2) << '\n';
    return logs;
}

void cmd_report(const std::vector<fs::path>& run_dirs, const fs::path& out, std::ostream& warn) {
    if (run_dirs.empty()) throw Error("no run directories given");
    std::vector<std::pair<std::string, std::vector<AdaptationLog>>> runs;
    for (const auto& dir : run_dirs) {
        try {
            std::ifstream rf(dir / "run.json");
            if (!rf) throw Error("no run.json (run missing or unfinished)");
            const json run = json::parse(rf);
            const int n = run.at("replicates").get<int>();
            std::vector<AdaptationLog> logs;
            for (int k = 0; k < n; ++k) {
                std::ifstream f(dir / (replicate_stem(k) + ".csv"));
                if (!f) throw Error("missing " + replicate_stem(k) + ".csv");
                logs.push_back(read_log_csv(f));
                if (logs.back().episodes.empty()) throw Error(replicate_stem(k) + ".csv has no episodes");
            }
            runs.emplace_back(run.at("method").get<std::string>(), std::move(logs));
        } catch (const std::exception& ex) {
            warn << "warning: skipping " << dir.string() << ": " << ex.what() << '\n';
        }
    }
    if (runs.empty()) throw Error("no completed runs to report");

    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    auto curves = open_out(out);
    curves << "method,episode,reward_median,reward_q25,reward_q75,safety_median,safety_q25,safety_q75\n";
    fs::path vpath = out;
    vpath.replace_filename(out.stem().string() + "_violations.csv");
    auto viol = open_out(vpath);
    viol << "method,mean,std\n";
    for (const auto& [method, logs] : runs) {
        const auto st = per_episode(logs);
        for (std::size_t t = 0; t < st.size(); ++t) {
            curves << method << ',' << t + 1 << ',' << num(st[t].reward_median) << ',' << num(st[t].reward_q25)
                   << ',' << num(st[t].reward_q75) << ',' << num(st[t].safety_median) << ','
                   << num(st[t].safety_q25) << ',' << num(st[t].safety_q75) << '\n';
        }
        const auto v = violation_counts(logs);
        viol << method << ',' << num(stats::mean(v)) << ',' << num(stats::stddev(v)) << '\n';
    }
}

}  // namespace sapt
