#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "nematic/config.hpp"

namespace nematic {

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitNumerical = 2 };

/// A solve diverged, a study failed, or an invariant check failed.
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CheckResult {
    std::string group;
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Invariant suite on the grid, nonlinearity and noise of `cfg`.
std::vector<CheckResult> run_verify(const ExperimentConfig& cfg, int threads = 1);
void print_verify_table(std::ostream& os, const std::vector<CheckResult>& results);

struct RunOptions {
    std::filesystem::path out_dir = ".";
    int threads = 1;
};

inline constexpr const char* kSubcommands[] = {"verify", "skeleton", "simulate", "convolution",
                                               "rate",   "mc-ldp",   "importance"};

/// Runs one subcommand and writes its artifacts into opt.out_dir. Returns the
/// exit status; throws ConfigError / NumericalFailure / std::domain_error on failure.
int run_subcommand(const std::string& name, const ExperimentConfig& cfg, const RunOptions& opt, std::ostream& log);

/// JSON error record {"status","kind","message","exit_code"}.
std::string error_record(const std::string& kind, const std::string& message, int exit_code);

/// Full command-line entry point. Never throws.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace nematic
