// Acceptance suite. Prints one PASS/FAIL line per criterion; exit status is
// non-zero if any criterion fails. Pass criterion numbers as arguments to run
// a subset, e.g. `sapt_acceptance 1 2 8`.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include <Eigen/Dense>

#include "oracle.hpp"
#include "sapt/acquisition.hpp"
#include "sapt/arm.hpp"
#include "sapt/baselines.hpp"
#include "sapt/config.hpp"
#include "sapt/experiment.hpp"
#include "sapt/gp.hpp"
#include "sapt/lander.hpp"
#include "sapt/stats.hpp"

using namespace sapt;
namespace fs = std::filesystem;

namespace {

const std::string kConfigs = std::string(SAPT_SOURCE_DIR) + "/configs/";

struct Result {
    bool pass;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// 1 ------------------------------------------------------------------------

Result gp_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(101);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> n_obs(0, 8), dims(1, 2);
    double max_err = 0.0;
    for (int ds = 0; ds < 100; ++ds) {
        const std::size_t d = static_cast<std::size_t>(dims(rng));
        const std::size_t n = static_cast<std::size_t>(n_obs(rng));
        GPHyper h;
        for (std::size_t i = 0; i < d; ++i) h.lengthscale.push_back(0.05 + u(rng));
        h.signal_var = 0.1 + 3.0 * u(rng);
        h.noise_var = 1e-4 + 0.2 * u(rng);
        const double a = 2.0 * u(rng) - 1.0, b = 4.0 * u(rng);
        auto mean = [a, b](std::span<const double> x) {
            double s = a;
            for (double v : x) s += std::cos(b * v);
            return s;
        };
        std::vector<Observation> obs;
        std::vector<std::vector<double>> xs;
        std::vector<double> ys;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> x(d);
            for (auto& v : x) v = u(rng);
            const double y = 3.0 * u(rng) - 1.5;
            obs.push_back({x, y});
            xs.push_back(x);
            ys.push_back(y);
        }
        const GPModel gp = gp_fit(mean, obs, h);
        const oracle::Kernel kern{h.lengthscale, h.signal_var};
        auto mean_v = [&](const std::vector<double>& x) { return mean(x); };
        for (int q = 0; q < 10; ++q) {
            std::vector<double> x(d);
            for (auto& v : x) v = u(rng);
            if (q == 0 && n > 0) x = xs[0];
            const auto [m, v] = oracle::gp_posterior(kern, h.noise_var, mean_v, xs, ys, x);
            const auto p = gp_predict(gp, x);
            max_err = std::max({max_err, std::abs(p.mean - m), std::abs(p.variance - v)});
        }
    }
    const double t = seconds_since(t0);
    return {max_err <= 1e-8 && t < 10.0, fmt("100 datasets, max |error| %.2e (tol 1e-8), %.2f s", max_err, t)};
}

// 2 ------------------------------------------------------------------------

Result gating() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(202);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int esi = 0, fallback = 0, bad = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t d = 1 + static_cast<std::size_t>(trial % 2);
        GridSpec grid{std::vector<int>(d, d == 1 ? 40 : 8), std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)};
        Repertoire rep(grid);
        const int cells = 1 + static_cast<int>(u(rng) * 40);
        for (int c = 0; c < cells; ++c) {
            RepertoireEntry e;
            for (std::size_t i = 0; i < d; ++i) e.descriptor.coords.push_back(u(rng));
            e.safety_prior = 4.0 * u(rng) - 1.0;
            e.reward_prior = u(rng);
            rep.try_insert(e);
        }
        GPHyper hr{std::vector<double>(d, 0.05 + 0.5 * u(rng)), 0.01 + u(rng), 1e-4 + 0.1 * u(rng)};
        GPHyper hc{std::vector<double>(d, 0.05 + 0.5 * u(rng)), 0.01 + 2.0 * u(rng), 1e-4 + 0.1 * u(rng)};
        GPModel gr(RepertoirePrior(rep, RepertoirePrior::Field::Reward), hr);
        GPModel gc(RepertoirePrior(rep, RepertoirePrior::Field::Safety), hc);
        const int n_obs = static_cast<int>(u(rng) * 10);
        for (int i = 0; i < n_obs; ++i) {
            std::vector<double> x(d);
            for (auto& v : x) v = u(rng);
            gr.add_observation({x, u(rng)});
            gc.add_observation({x, 4.0 * u(rng) - 2.0});
        }
        AdaptConfig cfg;
        cfg.goal = std::vector<double>(d, 0.0);
        cfg.safety_limit = 2.0 * u(rng) - 0.5;
        cfg.kappa = 3.0 * u(rng);
        cfg.ei_xi = 0.01;
        const auto sel = select_next(rep, gr, gc, cfg, u(rng));
        if (sel.kind == SelectionKind::Esi) {
            ++esi;
            const auto x = grid.normalize(rep.find(sel.cell)->descriptor);
            const auto p = gc.predict(x);
            if (p.mean - cfg.kappa * p.stddev() < cfg.safety_limit) ++bad;
        } else {
            ++fallback;
        }
    }
    const double t = seconds_since(t0);
    return {bad == 0 && esi > 0 && t < 30.0,
            fmt("1000 states: %d ESI selections, %d fallbacks, %d below the limit, %.2f s", esi, fallback, bad, t)};
}

// 3 ------------------------------------------------------------------------

// Safety functions drawn from the safety GP's own prior over a 1-D repertoire.
// Reward priors peak where the prior safety is close to the limit, pulling
// selections toward the boundary of the admitted set.
Result calibration() {
    const auto t0 = std::chrono::steady_clock::now();
    const int cells = 60;
    const double limit = 0.0;
    GridSpec grid{{cells}, {0.0}, {1.0}};
    Repertoire rep(grid);
    std::vector<double> xs;
    for (int i = 0; i < cells; ++i) {
        RepertoireEntry e;
        const double x = (i + 0.5) / cells;
        xs.push_back(x);
        e.descriptor = Descriptor{{x}};
        e.safety_prior = 2.5 * std::cos(2.0 * std::numbers::pi * x);
        e.reward_prior = std::exp(-std::pow(e.safety_prior - 0.5, 2));
        rep.try_insert(e);
    }
    const GPHyper hc{{0.08}, 1.0, 1e-2};
    const GPHyper hr{{0.1}, 0.05, 1e-3};

    Eigen::MatrixXd k(cells, cells);
    for (int i = 0; i < cells; ++i)
        for (int j = 0; j < cells; ++j)
            k(i, j) = hc.signal_var * std::exp(-0.5 * std::pow((xs[i] - xs[j]) / hc.lengthscale[0], 2));
    k.diagonal().array() += 1e-9;
    const Eigen::MatrixXd l = k.llt().matrixL();

    std::string detail;
    bool pass = true;
    for (double kappa : {1.0, 2.0}) {
        Rng rng(kappa == 1.0 ? 303 : 304);
        std::normal_distribution<double> z(0.0, 1.0);
        int selections = 0, violations = 0;
        for (int ep = 0; ep < 100; ++ep) {
            Eigen::VectorXd w(cells);
            for (int i = 0; i < cells; ++i) w(i) = z(rng);
            const Eigen::VectorXd f = l * w;
            GPModel gc(RepertoirePrior(rep, RepertoirePrior::Field::Safety), hc);
            GPModel gr(RepertoirePrior(rep, RepertoirePrior::Field::Reward), hr);
            AdaptConfig cfg;
            cfg.goal = {0.0};
            cfg.safety_limit = limit;
            cfg.kappa = kappa;
            cfg.ei_xi = 0.0;
            double r_best = 0.0;
            for (int t = 0; t < 10; ++t) {
                const auto sel = select_next(rep, gr, gc, cfg, r_best);
                const std::size_t i = sel.cell;
                const double c_true = rep.find(i)->safety_prior + f(static_cast<Eigen::Index>(i));
                if (sel.kind == SelectionKind::Esi) {
                    ++selections;
                    if (c_true < limit) ++violations;
                }
                const double r = *rep.find(i)->reward_prior + 0.1 * z(rng);
                if (c_true >= limit) r_best = std::max(r_best, r);
                gc.add_observation({{xs[i]}, c_true + std::sqrt(hc.noise_var) * z(rng)});
                gr.add_observation({{xs[i]}, r});
            }
        }
        const double p = violation_bound(kappa);
        const double freq = static_cast<double>(violations) / selections;
        const double tol = p + 2.0 * std::sqrt(p * (1.0 - p) / selections);
        const bool ok = selections >= 500 && freq <= tol;
        pass = pass && ok;
        detail += fmt("kappa %.0f: %d/%d violations = %.4f (bound %.4f, +2se %.4f); ", kappa, violations, selections,
                      freq, p, tol);
    }
    const double t = seconds_since(t0);
    detail += fmt("%.1f s", t);
    return {pass && t < 300.0, detail};
}

// 4, 5, 6 ------------------------------------------------------------------

struct SuiteStats {
    double viol_mean = 0, viol_std = 0, best_median = 0, final_median = 0;
};

struct Suite {
    std::map<Method, SuiteStats> stats;
    std::vector<Repertoire> repertoires;
    double seconds = 0;
};

Suite run_suite(const ExperimentConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    Suite s;
    const int n = cfg.replicates;
    s.repertoires.resize(static_cast<std::size_t>(n));
    // Every replicate evolves its own repertoire from seed + k.
#pragma omp parallel for schedule(dynamic, 1)
    for (int k = 0; k < n; ++k) {
        EvolveConfig ec = cfg.evolve;
        ec.seed = cfg.seed + static_cast<std::uint64_t>(k);
        s.repertoires[static_cast<std::size_t>(k)] = map_elites(*cfg.env, ec, cfg.grid).repertoire;
    }
    for (Method m : {Method::Sapt, Method::NoGpSafety, Method::SingleDynamics, Method::Cbo}) {
        ExperimentConfig c = cfg;
        c.method = m;
        std::vector<double> viol(static_cast<std::size_t>(n)), best(viol.size()), last(viol.size());
#pragma omp parallel for schedule(dynamic, 1)
        for (int k = 0; k < n; ++k) {
            const auto log = run_replicate(c, s.repertoires[static_cast<std::size_t>(k)], k);
            viol[static_cast<std::size_t>(k)] = log.violations();
            best[static_cast<std::size_t>(k)] = log.best_reward(20);
            last[static_cast<std::size_t>(k)] = log.episodes.back().observed_reward;
        }
        s.stats[m] = {stats::mean(viol), stats::stddev(viol), stats::median(best), stats::median(last)};
        std::printf("       %-16s violations %.2f +- %.2f, median best reward %.4f, median last reward %.4f\n",
                    method_id(m), s.stats[m].viol_mean, s.stats[m].viol_std, s.stats[m].best_median,
                    s.stats[m].final_median);
        std::fflush(stdout);
    }
    s.seconds = seconds_since(t0);
    return s;
}

Suite* asteroid_suite() {
    static std::unique_ptr<Suite> suite;
    if (!suite) suite = std::make_unique<Suite>(run_suite(load_config(kConfigs + "asteroid.toml")));
    return suite.get();
}

Result asteroid() {
    const Suite& s = *asteroid_suite();
    const auto& sa = s.stats.at(Method::Sapt);
    const auto& ng = s.stats.at(Method::NoGpSafety);
    const auto& sd = s.stats.at(Method::SingleDynamics);
    const bool pass = sa.viol_mean <= 0.5 && ng.viol_mean > sa.viol_mean && sd.viol_mean > sa.viol_mean &&
                      sa.best_median >= 0.9 && s.seconds < 900.0;
    return {pass, fmt("violations sapt %.2f, no-gp-safety %.2f, single-dynamics %.2f; sapt median best reward %.4f "
                      "(>= 0.9); %.0f s",
                      sa.viol_mean, ng.viol_mean, sd.viol_mean, sa.best_median, s.seconds)};
}

Result arm() {
    auto cfg = load_config(kConfigs + "arm.toml");
    const Suite s = run_suite(cfg);
    const auto& sa = s.stats.at(Method::Sapt);
    const auto& ng = s.stats.at(Method::NoGpSafety);
    const auto& sd = s.stats.at(Method::SingleDynamics);
    const auto& cb = s.stats.at(Method::Cbo);
    const bool pass = sa.viol_mean <= 1.0 && sa.viol_mean <= ng.viol_mean && sa.viol_mean <= sd.viol_mean &&
                      sa.best_median >= cb.best_median && s.seconds < 2700.0;
    return {pass, fmt("violations sapt %.2f, no-gp-safety %.2f, single-dynamics %.2f; median best reward sapt %.4f vs "
                      "cbo %.4f; %.0f s",
                      sa.viol_mean, ng.viol_mean, sd.viol_mean, sa.best_median, cb.best_median, s.seconds)};
}

// Constant-setpoint sweep: every setpoint held for the whole episode, over a
// gain grid. The reachable band is the hull of the mean final altitudes.
std::pair<double, double> reachable_band(const LanderEnv& env, const std::vector<std::vector<double>>& conditions) {
    double lo = 1e300, hi = -1e300;
    const auto& b = env.policy_bounds();
    for (int s = 0; s <= 80; ++s) {
        const double sp = b[3].lo + b[3].span() * s / 80.0;
        for (double fkp : {0.0, 0.25, 0.5, 1.0})
            for (double fki : {0.0, 0.5, 1.0})
                for (double fkd : {0.0, 1.0}) {
                    std::vector<double> policy{b[0].lo + fkp * b[0].span(), b[1].lo + fki * b[1].span(),
                                               b[2].lo + fkd * b[2].span(), sp, sp, sp, sp, sp};
                    double mean = 0.0;
                    for (const auto& c : conditions) mean += env.descriptor(env.rollout(policy, c))[0];
                    mean /= static_cast<double>(conditions.size());
                    lo = std::min(lo, mean);
                    hi = std::max(hi, mean);
                }
    }
    return {lo, hi};
}

Result coverage() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto cfg = load_config(kConfigs + "asteroid.toml");
    const auto res = map_elites(*cfg.env, cfg.evolve, cfg.grid);
    const auto& env = dynamic_cast<const LanderEnv&>(*cfg.env);
    const auto [lo, hi] = reachable_band(env, res.repertoire.dynamics_conditions());
    const GridSpec& g = cfg.grid;
    const double width = (g.upper[0] - g.lower[0]) / g.bins[0];
    int inside = 0, filled = 0;
    for (int c = 0; c < g.bins[0]; ++c) {
        const double a = g.lower[0] + c * width, b = a + width;
        if (a < lo || b > hi) continue;  // only cells wholly inside the band
        ++inside;
        if (res.repertoire.find(static_cast<std::size_t>(c))) ++filled;
    }
    const double frac = inside ? static_cast<double>(filled) / inside : 0.0;
    const double t = seconds_since(t0);
    return {inside > 0 && frac >= 0.8 && t < 300.0,
            fmt("band [%.1f, %.1f] m, %d/%d cells filled (%.1f%%, need 80%%), %zu cells overall, %.1f s", lo, hi,
                filled, inside, 100.0 * frac, res.repertoire.size(), t)};
}

// 7 ------------------------------------------------------------------------

int run_cli(const std::string& args, const std::string& workers) {
    const std::string cmd = "SAPT_WORKERS=" + workers + " " + std::string(SAPT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

Result determinism() {
    const auto t0 = std::chrono::steady_clock::now();
    const fs::path root = fs::temp_directory_path() / ("sapt_accept_" + std::to_string(::getpid()));
    fs::remove_all(root);
    int compared = 0, differing = 0, failed_runs = 0;
    for (const std::string env : {"asteroid", "arm"}) {
        const std::string small = " --set evolve.budget=3000 --set replicates=3";
        std::vector<std::string> runs{"a", "b", "c"};
        for (std::size_t r = 0; r < runs.size(); ++r) {
            const fs::path dir = root / env / runs[r];
            const std::string workers = r == 2 ? "4" : "1";
            failed_runs += run_cli("evolve --config " + kConfigs + env + ".toml --out " + (dir / "ev").string() + small,
                                   workers) != 0;
            for (const char* m : {"sapt", "cbo"})
                failed_runs += run_cli("adapt --config " + kConfigs + env + ".toml --repertoire " +
                                           (dir / "ev" / "repertoire.jsonl").string() + " --method " + m + " --out " +
                                           (dir / m).string() + small + " --set cbo.candidates=512",
                                       workers) != 0;
        }
        for (const auto& entry : fs::recursive_directory_iterator(root / env / "a")) {
            if (!entry.is_regular_file()) continue;
            const auto rel = fs::relative(entry.path(), root / env / "a");
            const std::string ref = slurp(entry.path());
            for (const char* other : {"b", "c"}) {
                ++compared;
                if (slurp(root / env / other / rel) != ref) ++differing;
            }
        }
    }
    fs::remove_all(root);
    const double t = seconds_since(t0);
    return {failed_runs == 0 && differing == 0 && compared > 0,
            fmt("%d file comparisons (1 vs 1 and 1 vs 4 workers), %d differ, %d failed runs, %.1f s", compared,
                differing, failed_runs, t)};
}

// 8 ------------------------------------------------------------------------

Result spot_checks() {
    const bool vb = violation_bound(0.0) == 0.5;
    const double ei = expected_improvement(0.0, 1.0, 0.0, 0.0);
    const double mc = oracle::mc_expected_improvement(0.0, 1.0, 0.0, 4'000'000, 808);
    const bool ei_ok = std::abs(ei - mc) < 1e-3 && std::abs(ei - 0.39894) < 1e-3;

    Rng rng(809);
    std::uniform_real_distribution<double> angle(-10.0, 10.0), link(4.0, 7.0);
    double fk_err = 0.0;
    for (int i = 0; i < 1000; ++i) {
        std::array<double, 4> q{}, l{};
        for (int j = 0; j < 4; ++j) {
            q[j] = angle(rng);
            l[j] = link(rng);
        }
        const auto joints = arm_fk(q, l);
        std::complex<double> rot = 1.0, pos = 0.0;
        for (int j = 0; j < 4; ++j) {
            rot *= std::exp(std::complex<double>(0.0, q[j]));
            pos += l[j] * rot;
            fk_err = std::max({fk_err, std::abs(joints[j + 1].x - pos.real()), std::abs(joints[j + 1].y - pos.imag())});
        }
    }
    return {vb && ei_ok && fk_err <= 1e-10,
            fmt("violation_bound(0) = %.17g; EI = %.6f, Monte Carlo %.6f; arm_fk max error %.2e over 1000 inputs",
                violation_bound(0.0), ei, mc, fk_err)};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Result()>>> criteria{
        {"GP oracle equivalence", gp_oracle},
        {"safety gating invariant", gating},
        {"violation-bound calibration", calibration},
        {"asteroid sim-to-sim suite", asteroid},
        {"planar-arm sim-to-sim suite", arm},
        {"asteroid repertoire coverage", coverage},
        {"determinism", determinism},
        {"numerical spot checks", spot_checks},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i + 1);
        if (!only.empty() && !only.count(id)) continue;
        Result r{false, ""};
        try {
            r = criteria[i].second();
        } catch (const std::exception& e) {
            r = {false, std::string("exception: ") + e.what()};
        }
        failures += !r.pass;
        std::printf("[%s] %d. %s: %s\n", r.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), r.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
