// Grid search for the GP hyperparameters and the LCB width, by sim-to-sim
// transfer on tuning seeds. Prints one CSV row per setting and the selected
// preset. The presets compiled into the library were produced with
//   sapt_tune --config configs/<env>.toml --seed 1000 --replicates 10

#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sapt/config.hpp"
#include "sapt/error.hpp"
#include "sapt/experiment.hpp"
#include "sapt/stats.hpp"

using namespace sapt;

namespace {

struct Outcome {
    double violations = 0.0;   // mean per run
    double best_reward = 0.0;  // mean over runs of the best reward
};

struct Setting {
    GPHyper reward;
    GPHyper safety;
    double kappa = 2.0;
};

Outcome evaluate(const ExperimentConfig& base, const std::vector<Repertoire>& reps, Method method,
                 const Setting& s, const CboOptions* cbo = nullptr) {
    ExperimentConfig cfg = base;
    cfg.method = method;
    cfg.adapt_options.reward_hyper = s.reward;
    cfg.adapt_options.safety_hyper = s.safety;
    cfg.adapt.kappa = s.kappa;
    if (cbo) cfg.cbo = *cbo;
    const int n = static_cast<int>(reps.size());
    std::vector<double> viol(reps.size()), best(reps.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (int k = 0; k < n; ++k) {
        const auto log = run_replicate(cfg, reps[static_cast<std::size_t>(k)], k);
        viol[static_cast<std::size_t>(k)] = log.violations();
        best[static_cast<std::size_t>(k)] = log.best_reward();
    }
    return {stats::mean(viol), stats::mean(best)};
}

// Highest mean best reward among settings within the violation budget; with
// none inside the budget, the fewest violations.
bool better(const Outcome& a, const Outcome& b, double budget) {
    const bool fa = a.violations <= budget, fb = b.violations <= budget;
    if (fa != fb) return fa;
    if (!fa) return a.violations < b.violations || (a.violations == b.violations && a.best_reward > b.best_reward);
    return a.best_reward > b.best_reward || (a.best_reward == b.best_reward && a.violations < b.violations);
}

GPHyper iso(std::size_t d, double l, double sv, double nv) { return GPHyper{std::vector<double>(d, l), sv, nv}; }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Grid search for GP hyperparameters by sim-to-sim transfer"};
    std::string config_path;
    std::uint64_t seed = 1000;
    int replicates = 10;
    double budget = 0.5;
    bool with_cbo = true;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "TOML config file")->required()->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "First tuning seed (keep disjoint from evaluation seeds)");
    app.add_option("--replicates", replicates, "Transfers per setting");
    app.add_option("--violation-budget", budget, "Admissible mean violations per run");
    app.add_option("--set", overrides, "Override a config key");
    app.add_flag("!--no-cbo", with_cbo, "Skip the constrained-BO baseline");
    CLI11_PARSE(app, argc, argv);

    try {
        ExperimentConfig cfg = load_config(config_path, overrides);
        cfg.seed = seed;
        cfg.replicates = replicates;
        const std::size_t d = cfg.grid.dims();

        std::vector<Repertoire> reps(static_cast<std::size_t>(replicates));
        for (int k = 0; k < replicates; ++k) {
            EvolveConfig ec = cfg.evolve;
            ec.seed = seed + static_cast<std::uint64_t>(k);
            reps[static_cast<std::size_t>(k)] = map_elites(*cfg.env, ec, cfg.grid).repertoire;
            std::cerr << "evolved tuning repertoire " << k + 1 << "/" << replicates << "\n";
        }

        // Scale of the sim-to-real residuals: every repertoire policy executed
        // once on its replicate's real system.
        // A second execution under another noise seed gives the episode-to-episode spread.
        std::vector<double> res_r, res_c, rep_r, rep_c;
        for (int k = 0; k < replicates; ++k) {
            Repertoire rep = reps[static_cast<std::size_t>(k)];
            assign_rewards(rep, cfg.adapt.goal, cfg.env->reward_fn());
            const auto real = make_real_env(cfg.env, real_dynamics_for(cfg, k), cfg.process_noise);
            for (const auto& [cell, e] : rep.entries()) {
                const auto tr = real.execute(e.policy, cell);
                res_r.push_back(cfg.env->reward(tr, cfg.adapt.goal) - *e.reward_prior);
                res_c.push_back(cfg.env->safety(tr) - e.safety_prior);
                const auto again = real.execute(e.policy, cell + 0x9e3779b97f4a7c15ULL);
                rep_r.push_back(cfg.env->reward(again, cfg.adapt.goal) - cfg.env->reward(tr, cfg.adapt.goal));
                rep_c.push_back(cfg.env->safety(again) - cfg.env->safety(tr));
            }
        }
        auto var = [](const std::vector<double>& v) { return std::pow(stats::stddev(v), 2); };
        const double vr = std::max(var(res_r), 1e-8), vc = std::max(var(res_c), 1e-8);
        const double er = std::max(0.5 * var(rep_r), 1e-12), ec = std::max(0.5 * var(rep_c), 1e-12);
        std::printf("# residual variance: reward %.6g safety %.6g\n", vr, vc);
        std::printf("# episode noise variance: reward %.6g safety %.6g\n", er, ec);

        const std::vector<double> lengths{0.05, 0.1, 0.2, 0.4};
        const std::vector<double> signals{0.25, 1.0, 4.0};
        const std::vector<double> noises{1e-4, 1e-2};
        auto noise_grid = [&](double scale, double episode) {
            std::vector<double> out;
            for (double nz : noises) out.push_back(nz * scale);
            if (episode > out.back()) out.push_back(episode);
            return out;
        };
        const auto noise_r = noise_grid(vr, er), noise_c = noise_grid(vc, ec);
        const std::vector<double> kappas{1.0, 1.5, 2.0, 3.0};

        std::printf("stage,lengthscale,signal_var,noise_var,kappa,violations,best_reward\n");
        auto row = [](const char* stage, const GPHyper& h, double kappa, const Outcome& o) {
            std::printf("%s,%.6g,%.6g,%.6g,%.3g,%.4f,%.6f\n", stage, h.lengthscale[0], h.signal_var, h.noise_var,
                        kappa, o.violations, o.best_reward);
            std::fflush(stdout);
        };

        // Stage 1: reward model, safety model at a neutral setting.
        Setting best{iso(d, 0.1, vr, 1e-2 * vr), iso(d, 0.1, vc, 1e-2 * vc), 2.0};
        Outcome best_out{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
        const GPHyper neutral_safety = best.safety;
        for (double l : lengths)
            for (double s : signals)
                for (double nz : noise_r) {
                    const Setting st{iso(d, l, s * vr, nz), neutral_safety, 2.0};
                    const auto o = evaluate(cfg, reps, Method::Sapt, st);
                    row("reward", st.reward, st.kappa, o);
                    if (better(o, best_out, budget)) {
                        best = st;
                        best_out = o;
                    }
                }

        // Stage 2: safety model and kappa with the chosen reward model.
        const GPHyper reward = best.reward;
        best_out = {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
        for (double l : lengths)
            for (double s : signals)
                for (double nz : noise_c)
                    for (double kappa : kappas) {
                        const Setting st{reward, iso(d, l, s * vc, nz), kappa};
                        const auto o = evaluate(cfg, reps, Method::Sapt, st);
                        row("safety", st.safety, kappa, o);
                        if (better(o, best_out, budget)) {
                            best = st;
                            best_out = o;
                        }
                    }

        std::printf("# selected reward: lengthscale %.6g signal_var %.6g noise_var %.6g\n",
                    best.reward.lengthscale[0], best.reward.signal_var, best.reward.noise_var);
        std::printf("# selected safety: lengthscale %.6g signal_var %.6g noise_var %.6g kappa %.3g\n",
                    best.safety.lengthscale[0], best.safety.signal_var, best.safety.noise_var, best.kappa);
        std::printf("# selected outcome: violations %.4f best_reward %.6f\n", best_out.violations,
                    best_out.best_reward);

        if (with_cbo) {
            // The baseline searches policy space; its scales come from random policies.
            const std::size_t p = cfg.env->policy_dim();
            Rng rng(seed);
            std::vector<double> rr, cc;
            const auto real = make_real_env(cfg.env, real_dynamics_for(cfg, 0), cfg.process_noise);
            for (int i = 0; i < 200; ++i) {
                const auto tr = real.execute(random_policy(cfg.env->policy_bounds(), rng), i);
                rr.push_back(cfg.env->reward(tr, cfg.adapt.goal));
                cc.push_back(cfg.env->safety(tr) - cfg.adapt.safety_limit);
            }
            const double cvr = std::max(var(rr), 1e-8), cvc = std::max(var(cc), 1e-8);
            std::printf("# random-policy variance: reward %.6g safety %.6g\n", cvr, cvc);
            CboOptions best_cbo;
            Outcome best_cbo_out{std::numeric_limits<double>::infinity(),
                                 -std::numeric_limits<double>::infinity()};
            const auto nr = noise_grid(cvr, er), nc = noise_grid(cvc, ec);
            for (double l : {0.1, 0.3, 1.0}) {
                for (std::size_t j = 0; j < std::max(nr.size(), nc.size()); ++j) {
                    CboOptions o = cfg.cbo;
                    o.reward_hyper = iso(p, l * std::sqrt(double(p)), cvr, nr[std::min(j, nr.size() - 1)]);
                    o.safety_hyper = iso(p, l * std::sqrt(double(p)), cvc, nc[std::min(j, nc.size() - 1)]);
                    const auto out = evaluate(cfg, reps, Method::Cbo, best, &o);
                    row("cbo", o.reward_hyper, 0.0, out);
                    if (better(out, best_cbo_out, budget)) {
                        best_cbo = o;
                        best_cbo_out = out;
                    }
                }
            }
            std::printf("# selected cbo: lengthscale %.6g reward %.6g/%.6g safety %.6g/%.6g\n",
                        best_cbo.reward_hyper.lengthscale[0], best_cbo.reward_hyper.signal_var,
                        best_cbo.reward_hyper.noise_var, best_cbo.safety_hyper.signal_var,
                        best_cbo.safety_hyper.noise_var);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
