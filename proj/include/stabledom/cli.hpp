#pragma once

#include "stabledom/assumptions.hpp"
#include "stabledom/config.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace stabledom {

constexpr const char* kVersion = "0.1.0";

struct RunOptions {
    std::string config_path;
    /// Overrides [output] dir.
    std::optional<std::string> out_dir;
    /// Overrides run.seed.
    std::optional<std::uint64_t> seed;
};

struct RunOutcome {
    /// 0 pass, 1 any fail verdict, 2 error or inconclusive.
    int exit_code = 2;
    Verdict verdict = Verdict::Inconclusive;
    std::string message;
    std::vector<std::string> artifacts;
};

/// Pass unless some verdict fails (Fail) or none fails but one is inconclusive (Inconclusive).
Verdict combine(const std::vector<Verdict>& verdicts);
int exit_code_for(Verdict v);

/// 64-bit FNV-1a of the bytes.
std::uint64_t fnv1a64(const std::string& bytes);

/// Loads the config, runs the command and writes report.json, the CSV tables and manifest.json
/// into the output directory. Errors are reported on `log` and map to exit code 2; a config error
/// names its line.
RunOutcome run(Command command, const RunOptions& options, std::ostream& log);

/// Entry point behind the command-line tool: `<command> --config <path> [--out <dir>] [--seed <u64>]`.
int cli_main(int argc, char** argv);

} // namespace stabledom
