#include <cstdint>
#include <cstdio>
#include <string>

#include "CLI11.hpp"

#include "ttsa/ttsa.h"

int main(int argc, char** argv) {
    CLI::App app{"simulation and verification lab for linear two-timescale"
                 " stochastic approximation"};
    app.set_version_flag("--version", std::string(ttsa_version()));
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    int threads = 0;
    bool strict = false;
    bool dry_run = false;

    auto add = [&](const char* name, const char* desc) {
        CLI::App* sc = app.add_subcommand(name, desc);
        sc->add_option("--config", config_path, "JSON experiment config")
            ->required()
            ->check(CLI::ExistingFile);
        sc->add_option("--seed", seed, "master RNG seed")->required();
        sc->add_option("--out", out_dir, "output directory")->required();
        sc->add_option("--threads", threads, "worker threads (default: hardware count)");
        sc->add_flag("--strict", strict, "escalate failed statistical checks to exit 4");
        sc->add_flag("--dry-run", dry_run, "validate and print the resolved config, write nothing");
        return sc;
    };
    add("simulate", "replicate trajectories; write MSE table and trajectory CSVs");
    add("rates", "estimate distances to the limit law over a horizon grid and fit rates");
    add("covariance", "compare the finite-n last-iterate covariance against its limit");
    add("rl", "build a policy-evaluation instance and run the configured study");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // usage problems are config-class failures
    }

    ttsa_run_options options;
    options.seed = seed;
    options.threads = threads;
    options.strict = strict ? 1 : 0;
    options.dry_run = dry_run ? 1 : 0;

    const std::string command = app.get_subcommands().front()->get_name();
    char* summary = nullptr;
    char* error = nullptr;
    const ttsa_status status = ttsa_run_command(command.c_str(), config_path.c_str(),
                                                out_dir.c_str(), &options, &summary, &error);

    if (summary) std::fputs(summary, stdout);
    if (status != TTSA_OK) std::fprintf(stderr, "error: %s\n", error ? error : "unknown failure");
    ttsa_string_free(summary);
    ttsa_string_free(error);

    switch (status) {
    case TTSA_OK: return 0;
    case TTSA_CONFIG_ERROR: return 2;
    case TTSA_CHECK_FAILED: return 4;
    default: return 3;
    }
}
