#pragma once

#include <cstdint>
#include <string>

namespace ttsa {

struct RunSettings {
    std::uint64_t seed = 0;
    int threads = 1;  // <= 0 means use the hardware thread count
    bool strict = false;
    bool dry_run = false;
};

/// Executes one command ("simulate", "rates", "covariance", "rl") against the
/// JSON config at config_path, writing artifacts under out_dir, and returns
/// the summary JSON text. Output bytes depend only on (config, command, seed),
/// never on the thread count. dry_run validates and resolves the config and
/// returns the resolution without writing anything. All failures throw Error;
/// exit_class(code) gives the intended process exit code.
std::string run_command(const std::string& command, const std::string& config_path,
                        const std::string& out_dir, const RunSettings& settings);

}  // namespace ttsa
