#include "stabledom/cli.hpp"

#include "stabledom/bounds.hpp"
#include "stabledom/errors.hpp"
#include "stabledom/grid_kernel.hpp"
#include "stabledom/iterated.hpp"
#include "stabledom/report_io.hpp"
#include "stabledom/semigroup.hpp"
#include "stabledom/simulator.hpp"
#include "stabledom/tempered.hpp"

#include <CLI11.hpp>
#include <boost/version.hpp>
#include <fftw3.h>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

namespace stabledom {

namespace fs = std::filesystem;

Verdict combine(const std::vector<Verdict>& verdicts) {
    bool inconclusive = false;
    for (Verdict v : verdicts) {
        if (v == Verdict::Fail) return Verdict::Fail;
        inconclusive = inconclusive || v == Verdict::Inconclusive;
    }
    return inconclusive ? Verdict::Inconclusive : Verdict::Pass;
}

int exit_code_for(Verdict v) {
    switch (v) {
    case Verdict::Pass: return 0;
    case Verdict::Fail: return 1;
    case Verdict::Inconclusive: return 2;
    }
    return 2;
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

namespace {

struct Context {
    const ExperimentConfig& cfg;
    fs::path out;
    Json report;
    std::vector<Verdict> verdicts;
    std::vector<std::string> artifacts;

    std::string file(const std::string& name) {
        artifacts.push_back(name);
        return (out / name).string();
    }
};

JumpKernel make_kernel(const ExperimentConfig& cfg) {
    return JumpKernel::saturated(cfg.kernel.params, cfg.kernel.phi);
}

Point origin() { return {0.0, 0.0, 0.0}; }

/// Points along the first axis at the given distances from the origin.
std::vector<Point> axis_points(const std::vector<double>& dists) {
    std::vector<Point> pts;
    for (double r : dists) pts.push_back({r, 0.0, 0.0});
    return pts;
}

std::shared_ptr<GridKernel> make_grid_kernel(const ExperimentConfig& cfg, const JumpKernel& kernel) {
    const Grid grid = Grid::aligned(cfg.kernel.params.dim, cfg.run.eps, cfg.grid.half_width, cfg.grid.cells_per_eps);
    return std::make_shared<GridKernel>(build_f_eps(kernel, grid, cfg.run.quad));
}

Json kernel_json(const ExperimentConfig& cfg) {
    Json j;
    j["profile"] = profile_name(cfg.kernel.phi);
    j["alpha"] = cfg.kernel.params.alpha;
    j["dim"] = cfg.kernel.params.dim;
    j["M"] = cfg.kernel.params.M;
    j["eps"] = cfg.kernel.params.eps;
    return j;
}

Json grid_json(const GridKernel& gk) {
    const Grid& g = gk.grid();
    Json j;
    j["points"] = g.size();
    j["spacing"] = g.spacing;
    j["half_width"] = -g.lower_edge(0);
    j["b_bar"] = gk.b_bar();
    j["b_low"] = gk.b_low();
    j["max_row_defect"] = gk.max_row_defect();
    j["max_tail_fraction"] = gk.max_tail_fraction();
    j["fft"] = gk.uses_fft();
    return j;
}

void cmd_check_assumptions(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const JumpKernel kernel = make_kernel(cfg);
    const int d = cfg.kernel.params.dim;
    std::vector<double> lags;
    for (double r = 4.0; r <= cfg.run.lag_max * (1.0 + 1e-12); r *= 2.0) lags.push_back(r);
    std::vector<Point> xs{origin(), {1.5, 0.0, 0.0}, {-3.0, 0.0, 0.0}};
    if (d >= 2) xs.push_back({0.7, -2.2, 0.0});
    std::vector<Point> hs = axis_points({0.3, 1.0, 2.5, 7.0});
    if (d >= 2) hs.push_back({0.4, 1.3, d == 3 ? -0.8 : 0.0});

    std::vector<AssumptionReport> reps;
    reps.push_back(check_a1a(cfg.kernel.phi, cfg.run.lag_max, 0.01));
    reps.push_back(check_a1b(cfg.kernel.phi, cfg.run.lag_max));
    reps.push_back(check_a1c(kernel, lags, cfg.run.quad));
    reps.push_back(check_a2(kernel, xs, hs));
    reps.push_back(check_a3(kernel, xs, hs));
    reps.push_back(check_a4(kernel, {1.0, 0.5, 0.25, 0.125, 0.0625}, xs, cfg.run.quad));

    Json arr = Json::array();
    for (const auto& r : reps) {
        arr.push_back(to_json(r));
        ctx.verdicts.push_back(r.verdict);
    }
    ctx.report["kernel"] = kernel_json(cfg);
    ctx.report["assumptions"] = arr;

    std::vector<std::vector<double>> trace;
    for (const auto& [lag, ratio] : reps[2].trace) trace.push_back({lag, ratio});
    write_table_csv(ctx.file("a1c_ratio.csv"), {"lag", "ratio"}, trace);
}

void cmd_iterate(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const JumpKernel kernel = make_kernel(cfg);
    auto gk = make_grid_kernel(cfg, kernel);
    IteratedKernels ik(gk, {gk->grid().locate(origin())});
    Verdict v = Verdict::Pass;
    std::string note;
    try {
        ik.extend_to(cfg.run.n_max, cfg.run.cert_tol);
    } catch (const MassCertificateError& e) {
        v = Verdict::Fail;
        note = e.what();
    }
    ctx.report["kernel"] = kernel_json(cfg);
    ctx.report["grid"] = grid_json(*gk);
    Json it;
    it["verdict"] = to_string(v);
    it["levels"] = ik.levels();
    it["max_certificate_error"] = ik.max_certificate_error();
    it["cert_tol"] = cfg.run.cert_tol;
    if (!note.empty()) it["note"] = note;
    Json certs = Json::array();
    for (const auto& c : ik.certificates()) certs.push_back(to_json(c));
    it["certificates"] = certs;
    ctx.report["iterate"] = it;
    ctx.verdicts.push_back(v);
    write_certificates_csv(ctx.file("certificates.csv"), ik.certificates());
}

DensityResult run_density(const ExperimentConfig& cfg, const std::shared_ptr<GridKernel>& gk) {
    IteratedKernels ik(gk, {gk->grid().locate(origin())});
    return density_p_eps(ik, cfg.run.t, ik.sources().front(), cfg.run.tol);
}

void cmd_density(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const JumpKernel kernel = make_kernel(cfg);
    auto gk = make_grid_kernel(cfg, kernel);
    const DensityResult dres = run_density(cfg, gk);
    const BoundReport maint = verify_maint(dres, cfg.kernel.phi);
    ctx.report["kernel"] = kernel_json(cfg);
    ctx.report["grid"] = grid_json(*gk);
    ctx.report["density"] = summary_json(dres);
    ctx.report["envelope"] = to_json(maint);
    ctx.verdicts.push_back(maint.verdict);
    write_density_csv(ctx.file("density.csv"), dres, cfg.kernel.phi);
}

void cmd_simulate(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const JumpKernel kernel = make_kernel(cfg);
    auto gk = make_grid_kernel(cfg, kernel);
    const DensityResult dres = run_density(cfg, gk);
    const Grid& g = gk->grid();
    const HistogramSpec hist = cfg.run.window
                                   ? HistogramSpec::from_grid_window(g, *cfg.run.window, cfg.run.cells_per_bin)
                                   : HistogramSpec::from_grid(g, cfg.run.cells_per_bin);
    const SimConfig sc{kernel, cfg.run.eps, cfg.run.t, cfg.run.n_paths, cfg.run.seed, origin(), hist, 100.0};
    const EmpiricalDensity emp = simulate_paths(sc);
    const SeriesComparison cmp = compare_to_series(emp, dres);
    ctx.report["kernel"] = kernel_json(cfg);
    ctx.report["grid"] = grid_json(*gk);
    ctx.report["seed"] = cfg.run.seed;
    ctx.report["density"] = summary_json(dres);
    ctx.report["simulation"] = summary_json(emp);
    ctx.report["comparison"] = to_json(cmp);
    ctx.verdicts.push_back(cmp.verdict);
    write_density_csv(ctx.file("density.csv"), dres, cfg.kernel.phi);
    write_empirical_csv(ctx.file("empirical.csv"), emp, cfg.kernel.params.alpha, cfg.kernel.phi);
    write_comparison_csv(ctx.file("comparison.csv"), emp, cmp);
}

void add_bound(Context& ctx, Json& arr, const BoundReport& r, const std::string& csv) {
    arr.push_back(to_json(r));
    ctx.verdicts.push_back(r.verdict);
    if (!r.columns.empty()) write_table_csv(ctx.file(csv), r.columns, r.table);
}

void cmd_verify_bounds(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const JumpKernel kernel = make_kernel(cfg);
    const QuadratureSpec& quad = cfg.run.quad;
    auto gk = make_grid_kernel(cfg, kernel);
    ctx.report["kernel"] = kernel_json(cfg);
    ctx.report["grid"] = grid_json(*gk);
    Json arr = Json::array();

    std::vector<EintlSample> near, far;
    for (double r : {0.5, 1.0, 2.0, 4.0, 8.0}) near.push_back({origin(), {r, 0.0, 0.0}, cfg.run.eps});
    for (double r : {3.0, 4.0, 8.0, 16.0}) far.push_back({origin(), {r, 0.0, 0.0}, cfg.run.eps});
    add_bound(ctx, arr, verify_eintl(kernel, 1, near, 0.25, {}, quad), "eintl_part1.csv");
    add_bound(ctx, arr, verify_eintl(kernel, 2, far, 0.25, {}, quad), "eintl_part2.csv");

    IteratedKernels ik(gk, {gk->grid().locate(origin())});
    add_bound(ctx, arr, verify_estimate1(ik, 1, cfg.run.n_max, quad), "estimate1_part1.csv");
    add_bound(ctx, arr, verify_estimate1(ik, 2, cfg.run.n_max, quad), "estimate1_part2.csv");
    const Estimate23Report e23 = verify_estimate2_3(ik, cfg.run.n_max, quad);
    add_bound(ctx, arr, e23.estimate2, "estimate2.csv");
    add_bound(ctx, arr, e23.estimate3, "estimate3.csv");

    const DensityResult dres = density_p_eps(ik, cfg.run.t, ik.sources().front(), cfg.run.tol);
    add_bound(ctx, arr, verify_maint(dres, cfg.kernel.phi), "envelope.csv");
    ctx.report["bounds"] = arr;
}

std::vector<ParamCell> sweep_cells(const SweepSection& sw) {
    std::vector<ParamCell> cells;
    for (int d : sw.dims)
        for (double alpha : sw.alphas)
            for (double beta : sw.betas)
                for (std::size_t k = 0; k < sw.gammas.size(); ++k) {
                    ParamCell c;
                    c.m = sw.m;
                    c.alpha = alpha;
                    c.dim = d;
                    c.beta = beta;
                    c.gamma = sw.gamma_relative[k] ? c.gamma_star() + sw.gammas[k] : sw.gammas[k];
                    cells.push_back(c);
                }
    return cells;
}

void cmd_sweep(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto rows = sweep_condition_c(sweep_cells(cfg.sweep), cfg.sweep.lags, cfg.run.quad);
    Json arr = Json::array();
    std::size_t mismatched = 0, undecided = 0, rejected = 0;
    for (const auto& r : rows) {
        arr.push_back(to_json(r));
        if (r.observed == Observed::Rejected) {
            ++rejected;
        } else if (!r.matches) {
            if (r.observed == Observed::Inconclusive) ++undecided;
            else ++mismatched;
        }
    }
    const Verdict v = mismatched ? Verdict::Fail : undecided ? Verdict::Inconclusive : Verdict::Pass;
    Json summary;
    summary["verdict"] = to_string(v);
    summary["cells"] = rows.size();
    summary["mismatched"] = mismatched;
    summary["inconclusive_on_decided_cells"] = undecided;
    summary["rejected_profiles"] = rejected;
    ctx.report["sweep"] = summary;
    ctx.report["rows"] = arr;
    ctx.verdicts.push_back(v);
    write_sweep_csv(ctx.file("sweep.csv"), rows);
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

} // namespace

RunOutcome run(Command command, const RunOptions& options, std::ostream& log) {
    RunOutcome outcome;
    std::string bytes;
    ExperimentConfig cfg;
    try {
        std::ifstream in(options.config_path, std::ios::binary);
        if (!in) throw ConfigError("cannot open config '" + options.config_path + "'", 0);
        std::ostringstream ss;
        ss << in.rdbuf();
        bytes = ss.str();
        std::istringstream parse_in(bytes);
        cfg = parse_experiment(parse_in, command);
    } catch (const ConfigError& e) {
        outcome.message = std::string("config error: ") + e.what();
        log << options.config_path << ": " << outcome.message << '\n';
        return outcome;
    }
    if (options.seed) cfg.run.seed = *options.seed;
    if (options.out_dir) cfg.out_dir = *options.out_dir;

    Context ctx{cfg, fs::path(cfg.out_dir), Json::object(), {}, {}};
    try {
        fs::create_directories(ctx.out);
        ctx.report["command"] = to_string(cfg.command);
        switch (cfg.command) {
        case Command::CheckAssumptions: cmd_check_assumptions(ctx); break;
        case Command::Iterate: cmd_iterate(ctx); break;
        case Command::Density: cmd_density(ctx); break;
        case Command::Simulate: cmd_simulate(ctx); break;
        case Command::VerifyBounds: cmd_verify_bounds(ctx); break;
        case Command::SweepS3: cmd_sweep(ctx); break;
        }
        outcome.verdict = combine(ctx.verdicts);
        outcome.exit_code = exit_code_for(outcome.verdict);
        ctx.report["verdict"] = to_string(outcome.verdict);
        write_json(ctx.file("report.json"), ctx.report);
        outcome.message = to_string(cfg.command) + ": " + to_string(outcome.verdict);
    } catch (const std::exception& e) {
        outcome.verdict = Verdict::Inconclusive;
        outcome.exit_code = 2;
        outcome.message = std::string("error: ") + e.what();
    }

    Json manifest;
    manifest["command"] = to_string(cfg.command);
    manifest["config_path"] = options.config_path;
    manifest["config_fnv1a64"] = hex64(fnv1a64(bytes));
    manifest["seed"] = cfg.run.seed;
    manifest["exit_code"] = outcome.exit_code;
    manifest["verdict"] = to_string(outcome.verdict);
    manifest["outputs"] = ctx.artifacts;
    Json versions;
    versions["stabledom"] = kVersion;
    versions["compiler"] = __VERSION__;
    versions["boost"] = BOOST_LIB_VERSION;
    versions["fftw"] = std::string(fftw_version);
    versions["nlohmann_json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH);
    manifest["versions"] = versions;
    manifest["timestamp_utc"] = utc_timestamp();
    try {
        write_json((ctx.out / "manifest.json").string(), manifest);
    } catch (const std::exception& e) {
        outcome.exit_code = 2;
        outcome.message += std::string("; manifest: ") + e.what();
    }
    outcome.artifacts = ctx.artifacts;
    outcome.artifacts.push_back("manifest.json");
    log << outcome.message << '\n';
    return outcome;
}

int cli_main(int argc, char** argv) {
    CLI::App app{"Truncated-kernel approximation of stable-dominated jump semigroups"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    RunOptions opts;
    std::string out;
    std::uint64_t seed = 0;
    Command chosen = Command::CheckAssumptions;
    const std::vector<std::pair<Command, std::string>> commands{
        {Command::CheckAssumptions, "Sample the kernel assumptions and report empirical constants"},
        {Command::Iterate, "Build f_eps on the lattice, iterate it and certify the masses"},
        {Command::Density, "Heat kernel of the truncated process by uniformization"},
        {Command::Simulate, "Monte Carlo paths compared bin by bin with the series density"},
        {Command::VerifyBounds, "Integral estimates, iterated-kernel bounds and the heat kernel envelope"},
        {Command::SweepS3, "Convolution condition sweep over tempered profiles"},
    };
    for (const auto& [cmd, help] : commands) {
        auto* sub = app.add_subcommand(to_string(cmd), help);
        sub->add_option("--config", opts.config_path, "Path to the key = value config")->required();
        sub->add_option("--out", out, "Output directory (overrides [output] dir)");
        sub->add_option("--seed", seed, "Random seed (overrides run.seed)");
        const Command c = cmd;
        sub->callback([&chosen, c] { chosen = c; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    const auto* sub = app.get_subcommands().front();
    if (sub->count("--out")) opts.out_dir = out;
    if (sub->count("--seed")) opts.seed = seed;
    return run(chosen, opts, std::cerr).exit_code;
}

} // namespace stabledom
