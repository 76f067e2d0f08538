#include "sapt/config.hpp"

#include <set>

#include "sapt/error.hpp"
#include "sapt/presets.hpp"
#include "sapt/toml_lite.hpp"

namespace sapt {

using nlohmann::json;

namespace {

const json* lookup(const json& doc, const std::string& section, const std::string& key) {
    if (!doc.contains(section)) return nullptr;
    const json& s = doc.at(section);
    if (!s.is_object()) throw ConfigError(section, "expected a table");
    return s.contains(key) ? &s.at(key) : nullptr;
}

std::string field(const std::string& section, const std::string& key) {
    return section.empty() ? key : section + "." + key;
}

template <typename T>
void read(const json& doc, const std::string& section, const std::string& key, T& out) {
    const json* v = section.empty() ? (doc.contains(key) ? &doc.at(key) : nullptr) : lookup(doc, section, key);
    if (!v) return;
    try {
        if constexpr (std::is_same_v<T, double>) {
            if (!v->is_number()) throw ConfigError(field(section, key), "expected a number");
        } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
            if (!v->is_number_integer()) throw ConfigError(field(section, key), "expected an integer");
            if constexpr (std::is_unsigned_v<T>) {
                if (v->get<long long>() < 0) throw ConfigError(field(section, key), "must be >= 0");
            }
        }
        out = v->get<T>();
    } catch (const json::exception& ex) {
        throw ConfigError(field(section, key), std::string("wrong type: ") + ex.what());
    }
}

void check_keys(const json& doc, const std::string& section, const std::set<std::string>& allowed) {
    const json& t = section.empty() ? doc : doc.at(section);
    if (!t.is_object()) throw ConfigError(section, "expected a table");
    for (const auto& [k, v] : t.items())
        if (!allowed.count(k)) throw ConfigError(field(section, k), "unknown key");
}

void read_hyper(const json& doc, const std::string& prefix, GPHyper& hyper) {
    if (!doc.contains("gp")) return;
    if (const json* v = lookup(doc, "gp", prefix + "_lengthscale")) {
        if (v->is_number()) hyper.lengthscale.assign(hyper.lengthscale.size(), v->get<double>());
        else if (v->is_array()) hyper.lengthscale = v->get<std::vector<double>>();
        else throw ConfigError("gp." + prefix + "_lengthscale", "expected a number or a list");
    }
    read(doc, "gp", prefix + "_signal_var", hyper.signal_var);
    read(doc, "gp", prefix + "_noise_var", hyper.noise_var);
}

}  // namespace

void apply_overrides(json& doc, const std::vector<std::string>& overrides) {
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError(o, "override must look like section.key=value");
        const std::string path = o.substr(0, eq);
        json value;
        try {
            value = toml::parse_value(o.substr(eq + 1));
        } catch (const ParseError&) {
            value = o.substr(eq + 1);  // bare words are taken as strings
        }
        json* cur = &doc;
        std::size_t start = 0;
        while (true) {
            const auto dot = path.find('.', start);
            const std::string part = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
            if (dot == std::string::npos) {
                (*cur)[part] = value;
                break;
            }
            if (!cur->contains(part)) (*cur)[part] = json::object();
            cur = &(*cur)[part];
            if (!cur->is_object()) throw ConfigError(path, "cannot override inside a non-table");
            start = dot + 1;
        }
    }
}

ExperimentConfig parse_config(const json& doc) {
    if (!doc.is_object()) throw ConfigError("", "config must be a table");
    check_keys(doc, "", {"env", "seed", "replicates", "method", "output_dir", "grid", "evolve", "adapt", "real", "gp",
                         "cbo", "env_params"});
    ExperimentConfig cfg;

    if (!doc.contains("env") || !doc["env"].is_string()) throw ConfigError("env", "environment id is required");
    cfg.env_id = doc["env"].get<std::string>();
    if (doc.contains("env_params")) cfg.env_params = doc["env_params"];
    cfg.env = make_env(cfg.env_id, cfg.env_params);

    read(doc, "", "seed", cfg.seed);
    read(doc, "", "replicates", cfg.replicates);
    if (cfg.replicates < 1) throw ConfigError("replicates", "must be >= 1");
    read(doc, "", "output_dir", cfg.output_dir);
    if (doc.contains("method")) {
        if (!doc["method"].is_string()) throw ConfigError("method", "expected a string");
        cfg.method = parse_method(doc["method"].get<std::string>());
    }

    cfg.grid = cfg.env->default_grid();
    if (doc.contains("grid")) {
        check_keys(doc, "grid", {"bins", "lower", "upper"});
        read(doc, "grid", "bins", cfg.grid.bins);
        read(doc, "grid", "lower", cfg.grid.lower);
        read(doc, "grid", "upper", cfg.grid.upper);
    }
    cfg.grid.validate();

    if (doc.contains("evolve")) {
        check_keys(doc, "evolve", {"n_dynamics", "n_init", "budget", "mutation_sigma", "batch_size",
                                   "progress_interval", "parallel"});
        read(doc, "evolve", "n_dynamics", cfg.evolve.n_dynamics);
        read(doc, "evolve", "n_init", cfg.evolve.n_init);
        read(doc, "evolve", "budget", cfg.evolve.budget);
        read(doc, "evolve", "mutation_sigma", cfg.evolve.mutation_sigma);
        read(doc, "evolve", "batch_size", cfg.evolve.batch_size);
        read(doc, "evolve", "progress_interval", cfg.evolve.progress_interval);
        read(doc, "evolve", "parallel", cfg.evolve.parallel);
    }
    cfg.evolve.seed = cfg.seed;
    cfg.evolve.validate();

    std::string preset = cfg.env_id;
    if (doc.contains("gp")) {
        check_keys(doc, "gp", {"preset", "reward_lengthscale", "reward_signal_var", "reward_noise_var",
                               "safety_lengthscale", "safety_signal_var", "safety_noise_var"});
        read(doc, "gp", "preset", preset);
    }
    const GpPreset gp = gp_preset(preset);
    cfg.adapt_options.reward_hyper = gp.reward;
    cfg.adapt_options.safety_hyper = gp.safety;
    read_hyper(doc, "reward", cfg.adapt_options.reward_hyper);
    read_hyper(doc, "safety", cfg.adapt_options.safety_hyper);
    cfg.adapt_options.reward_hyper.validate(cfg.grid.dims());
    cfg.adapt_options.safety_hyper.validate(cfg.grid.dims());
    cfg.adapt_options.method = method_id(cfg.method);

    cfg.adapt.kappa = gp.kappa;
    if (doc.contains("adapt")) {
        check_keys(doc, "adapt", {"goal", "safety_limit", "kappa", "max_trials", "ei_xi", "on_no_safe_cell"});
        read(doc, "adapt", "goal", cfg.adapt.goal);
        read(doc, "adapt", "safety_limit", cfg.adapt.safety_limit);
        read(doc, "adapt", "kappa", cfg.adapt.kappa);
        read(doc, "adapt", "max_trials", cfg.adapt.max_trials);
        read(doc, "adapt", "ei_xi", cfg.adapt.ei_xi);
        std::string on_none = "fallback";
        read(doc, "adapt", "on_no_safe_cell", on_none);
        if (on_none != "fallback" && on_none != "abort")
            throw ConfigError("adapt.on_no_safe_cell", "expected 'fallback' or 'abort'");
        cfg.adapt.abort_on_no_safe_cell = on_none == "abort";
    }
    if (!doc.contains("adapt") || !lookup(doc, "adapt", "goal")) throw ConfigError("adapt.goal", "a goal is required");
    if (!lookup(doc, "adapt", "safety_limit")) throw ConfigError("adapt.safety_limit", "a safety limit is required");
    cfg.adapt.seed = cfg.seed;
    cfg.adapt.validate(cfg.env->goal_dim());

    if (doc.contains("real")) {
        check_keys(doc, "real", {"process_noise", "dynamics"});
        read(doc, "real", "process_noise", cfg.process_noise);
        if (const json* d = lookup(doc, "real", "dynamics")) {
            try {
                cfg.real_dynamics = d->get<std::vector<double>>();
            } catch (const json::exception&) {
                throw ConfigError("real.dynamics", "expected a list of numbers");
            }
            if (!box_contains(cfg.env->dynamics_bounds(), *cfg.real_dynamics))
                throw ConfigError("real.dynamics", "must lie inside the feasible dynamics set");
        }
    }
    if (!(cfg.process_noise >= 0.0)) throw ConfigError("real.process_noise", "must be >= 0");

    cfg.cbo.reward_hyper = gp.cbo_reward;
    cfg.cbo.safety_hyper = gp.cbo_safety;
    if (doc.contains("cbo")) {
        check_keys(doc, "cbo", {"candidates"});
        read(doc, "cbo", "candidates", cfg.cbo.candidates);
    }
    if (cfg.cbo.candidates < 1) throw ConfigError("cbo.candidates", "must be >= 1");
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    json doc = toml::parse_file(path);
    apply_overrides(doc, overrides);
    return parse_config(doc);
}

}  // namespace sapt
