#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <omp.h>

#include "sapt/config.hpp"
#include "sapt/error.hpp"
#include "sapt/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

void apply_worker_cap() {
    if (const char* w = std::getenv("SAPT_WORKERS")) {
        char* end = nullptr;
        const long n = std::strtol(w, &end, 10);
        if (end == w || *end != '\0' || n < 1) throw sapt::ConfigError("SAPT_WORKERS", "must be a positive integer");
        omp_set_num_threads(static_cast<int>(n));
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Safety-aware policy transfer: repertoire evolution and safe sim-to-real adaptation"};
    app.require_subcommand(1);

    std::string config_path, out, repertoire, method;
    std::vector<std::string> overrides, dirs;

    auto* evolve = app.add_subcommand("evolve", "Evolve a safety repertoire over randomized dynamics");
    evolve->add_option("--config", config_path, "TOML config file")->required()->check(CLI::ExistingFile);
    evolve->add_option("--out", out, "Output directory")->required();
    evolve->add_option("--set", overrides, "Override a config key, e.g. --set evolve.budget=1000");

    auto* adapt = app.add_subcommand("adapt", "Transfer to the held-out real system");
    adapt->add_option("--config", config_path, "TOML config file")->required()->check(CLI::ExistingFile);
    adapt->add_option("--repertoire", repertoire, "Repertoire file from `evolve`")
        ->required()
        ->check(CLI::ExistingFile);
    adapt->add_option("--method", method, "sapt, no-gp-safety, single-dynamics or cbo");
    adapt->add_option("--out", out, "Output directory")->required();
    adapt->add_option("--set", overrides, "Override a config key");

    auto* report = app.add_subcommand("report", "Compare finished adapt runs");
    report->add_option("dirs", dirs, "Run directories")->required();
    report->add_option("--out", out, "Output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        apply_worker_cap();
        if (*evolve) {
            const auto cfg = sapt::load_config(config_path, overrides);
            const auto s = sapt::cmd_evolve(cfg, out);
            std::cerr << "filled " << s.cells_filled << " cells (" << s.coverage_fraction * 100.0
                      << "% of the grid), safety in [" << s.min_safety << ", " << s.max_safety << "]\n";
        } else if (*adapt) {
            if (!method.empty()) overrides.push_back("method=\"" + method + "\"");
            const auto cfg = sapt::load_config(config_path, overrides);
            const auto logs = sapt::cmd_adapt(cfg, repertoire, out);
            int violations = 0;
            for (const auto& l : logs) violations += l.violations();
            std::cerr << logs.size() << " replicates, " << violations << " violations in total\n";
        } else if (*report) {
            std::vector<std::filesystem::path> paths(dirs.begin(), dirs.end());
            sapt::cmd_report(paths, out, std::cerr);
        }
    } catch (const sapt::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const sapt::ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const sapt::VersionError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
