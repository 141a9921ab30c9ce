#pragma once

#include "stabledom/params.hpp"
#include "stabledom/profile.hpp"
#include "stabledom/quadrature.hpp"

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace stabledom {

/// Raw `key = value` entries grouped by `[section]`; keys before the first header belong to "".
/// Comments start with '#' or ';' at the beginning of a line or after whitespace.
class IniDocument {
public:
    struct Entry {
        std::string value;
        int line = 0;
    };

    /// Throws ConfigError with the offending line for syntax errors and duplicate keys.
    static IniDocument parse(std::istream& in);

    bool has_section(const std::string& section) const { return sections_.count(section) != 0; }
    /// Line of the section header, 0 for the implicit top-level section.
    int section_line(const std::string& section) const;
    const Entry* find(const std::string& section, const std::string& key) const;
    std::vector<std::string> keys(const std::string& section) const;
    std::vector<std::string> sections() const;

private:
    struct Section {
        int line = 0;
        std::map<std::string, Entry> entries;
    };
    std::map<std::string, Section> sections_;
};

enum class Command { CheckAssumptions, Iterate, Density, Simulate, VerifyBounds, SweepS3 };

std::string to_string(Command c);
/// Throws ConfigError for an unknown name.
Command parse_command(const std::string& name, int line = 0);

struct KernelSection {
    PhiProfile phi = ConstantOne{};
    ModelParams params;
};

struct GridSection {
    double half_width = 20.0;
    int cells_per_eps = 4;
};

struct RunSection {
    double t = 0.5;
    double eps = 0.25;
    /// Iteration depth for iterate and verify-bounds.
    int n_max = 8;
    std::size_t n_paths = 100000;
    std::uint64_t seed = 0;
    double tol = 1e-10;
    double cert_tol = 1e-4;
    double lag_max = 64.0;
    /// Histogram window for simulate; the whole box when absent.
    std::optional<double> window;
    int cells_per_bin = 1;
    QuadratureSpec quad;
};

struct SweepSection {
    std::vector<double> betas{0.25, 0.5, 0.75, 1.0, 1.5, 2.0};
    /// Entries are offsets from gamma* when the matching flag is set ("g*", "g*-0.2").
    std::vector<double> gammas{-1.0, 0.0, -0.2, 0.0, 0.2};
    std::vector<bool> gamma_relative{false, false, true, true, true};
    std::vector<double> alphas{0.5, 1.0, 1.5};
    std::vector<int> dims{1, 2};
    std::vector<double> lags{4, 6, 8, 10, 12, 14, 16, 18, 20};
    double m = 1.0;
};

struct ExperimentConfig {
    Command command = Command::CheckAssumptions;
    KernelSection kernel;
    GridSection grid;
    RunSection run;
    SweepSection sweep;
    /// [output] dir; the CLI --out flag takes precedence.
    std::string out_dir = "out";
};

/// Parses and validates a config. Unknown sections or keys, missing sections the command needs
/// and out-of-range values raise ConfigError naming the field and its line. A command given by the
/// caller must agree with the config's own `command` key when both are present.
ExperimentConfig parse_experiment(std::istream& in, std::optional<Command> command = std::nullopt);
ExperimentConfig load_experiment(const std::string& path, std::optional<Command> command = std::nullopt);

} // namespace stabledom
