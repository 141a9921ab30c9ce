// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the number of failed criteria.

#include "stabledom/ball_volume.hpp"
#include "stabledom/bounds.hpp"
#include "stabledom/generator.hpp"
#include "stabledom/grid_kernel.hpp"
#include "stabledom/iterated.hpp"
#include "stabledom/semigroup.hpp"
#include "stabledom/simulator.hpp"
#include "stabledom/tempered.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/core.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

using namespace stabledom;
using BoostGK = boost::math::quadrature::gauss_kronrod<double, 61>;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

ModelParams params(double alpha, int dim, double eps) {
    ModelParams p;
    p.alpha = alpha;
    p.dim = dim;
    p.eps = eps;
    return p;
}

// b_bar for M |h|^{-alpha-1} in one dimension: 2 eps^{-alpha} / alpha
double b_bar_1d(double alpha, double eps) { return 2.0 * std::pow(eps, -alpha) / alpha; }

double slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Outcome mass_identity() {
    double worst = 0.0;
    for (double alpha : {0.5, 1.0})
        for (double eps : {0.25, 0.5}) {
            const auto k = JumpKernel::saturated(params(alpha, 1, eps), ConstantOne{});
            // wide enough that the leak stays a small correction
            const Grid g = Grid::aligned(1, eps, alpha == 1.0 ? 200.0 : 4000.0);
            IteratedKernels ik(std::make_shared<GridKernel>(build_f_eps(k, g)));
            ik.extend_to(5);
            const double bl = ik.base().b_bar();
            const double exact = b_bar_1d(alpha, eps);
            const double h = g.cell_volume();
            for (int n = 1; n <= 5; ++n) {
                const auto& row = ik.normalized_row(n, 0);
                double in_box = 0.0;
                for (double v : row) in_box += v * h;
                // translation invariance gives b_eps(x) = b_bar, so the closed form is b_bar^n
                const double lattice = (in_box + ik.leak(n, 0)) * std::pow(bl, n);
                worst = std::max(worst, std::abs(lattice - std::pow(exact, n)) / std::pow(exact, n));
            }
        }
    return {worst <= 1e-5, fmt::format("max relative error {:.3e} (tol 1e-5)", worst)};
}

Outcome conservativeness() {
    const auto k = JumpKernel::saturated(params(1.0, 1, 0.2), ConstantOne{});
    const Grid g = Grid::aligned(1, 0.2, 100.0);
    const GridKernel gk = build_f_eps(k, g);
    bool ok = true;
    std::string detail;
    for (double tb : {1.0, 10.0, 50.0}) {
        const double t = tb / gk.b_bar();
        const GridFunction one{std::vector<double>(g.size(), 1.0), 1.0};
        const auto r = expm_apply(gk, one, t, 1e-10);
        double dev = 0.0;
        for (double v : r.value.values) dev = std::max(dev, std::abs(v - 1.0));
        dev = std::max(dev, std::abs(r.value.exterior - 1.0));
        ok = ok && dev <= r.truncation_bound + 1e-6;
        detail += fmt::format("t*b={}: dev {:.2e} bound {:.2e}; ", tb, dev, r.truncation_bound);
    }
    return {ok, detail};
}

Outcome semigroup_property() {
    const auto k = JumpKernel::saturated(params(1.0, 1, 0.2), ConstantOne{});
    const Grid g = Grid::aligned(1, 0.2, 100.0);
    const GridKernel gk = build_f_eps(k, g);
    const auto bump = smooth_bump({0.0, 0.0, 0.0}, 1.0);
    GridFunction f;
    f.values.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) f.values[i] = bump(g.point(i));
    const double tol = 1e-6;
    bool ok = true;
    std::string detail;
    for (auto [t, s] : {std::pair{0.5, 0.5}, std::pair{0.2, 0.8}}) {
        const auto a = expm_apply(gk, f, t + s, tol).value;
        const auto b = expm_apply(gk, expm_apply(gk, f, s, tol).value, t, tol).value;
        double dev = std::abs(a.exterior - b.exterior);
        for (std::size_t i = 0; i < g.size(); ++i) dev = std::max(dev, std::abs(a.values[i] - b.values[i]));
        ok = ok && dev <= 2.0 * tol;
        detail += fmt::format("(t,s)=({},{}): {:.2e}; ", t, s, dev);
    }
    return {ok, detail + "tol 2e-6"};
}

Outcome heat_kernel_envelope() {
    bool ok = true;
    std::string detail;
    for (int fam = 0; fam < 2; ++fam)
        for (double alpha : {0.5, 1.0}) {
            const PhiProfile phi = fam == 0 ? PhiProfile{ConstantOne{}} : PhiProfile{ExpPower{1.0, 1.0, 0.0}};
            const auto k = JumpKernel::saturated(params(alpha, 1, 0.2), phi);
            const MainTStudySpec spec;
            const auto st = maint_study(k, spec);

            // brute-force sup on the base lattice at t = 0.5 with the envelope written out here
            const Grid g = Grid::aligned(1, spec.eps, spec.half_width, spec.cells_per_eps);
            IteratedKernels ik(std::make_shared<GridKernel>(build_f_eps(k, g)));
            const auto d = density_p_eps(ik, 0.5, ik.sources().front(), spec.tol);
            double sup = 0.0;
            for (std::size_t y = 0; y < g.size(); ++y) {
                if (y == d.source) continue;
                const double r = std::abs(g.point(y)[0]);
                const double phir = fam == 0 || r <= 1.0 ? 1.0 : std::exp(-r);
                const double env = std::min(std::pow(0.5, -1.0 / alpha), 0.5 * phir * std::pow(r, -alpha - 1.0));
                if (env > 0.0) sup = std::max(sup, d.q[y] / env);
            }
            const auto it = std::find(st.ts.begin(), st.ts.end(), 0.5);
            const double lib_sup = it == st.ts.end() ? NAN : st.sup_base[it - st.ts.begin()];
            const bool oracle_ok = std::abs(lib_sup - sup) <= 1e-9 * sup;
            const bool stable = st.max_eps_change < 0.2 && st.max_grid_change < 0.2;
            const bool this_ok = st.finite && stable && st.C2 >= 0.0 && oracle_ok;
            ok = ok && this_ok;
            detail += fmt::format("\n      {} alpha={}: finite={} eps_change={:.3f} grid_change={:.3f} C1={:.4f} C2={:.4f} "
                                  "sup(t=0.5) lib {:.6f} oracle {:.6f} -> {}",
                                  profile_name(phi), alpha, st.finite, st.max_eps_change, st.max_grid_change, st.C1,
                                  st.C2, lib_sup, sup, this_ok ? "ok" : "red");
        }
    return {ok, detail};
}

Outcome log_closed_form() {
    double worst = 0.0;
    for (double x : {3.0, 5.0, 8.0}) {
        const double oracle = 2.0 * std::log(x - 1.0) * std::exp(-x) / x;
        worst = std::max(worst, std::abs(remark_closed_form(x).numeric - oracle) / oracle);
    }
    const double at3 = remark_closed_form(3.0).numeric;
    // the quoted reference carries six significant digits; allow one unit in the last of them
    const bool pinned = std::abs(at3 - 0.0230066) <= 1e-7;
    return {worst <= 1e-6 && pinned,
            fmt::format("max relative gap {:.2e} (tol 1e-6); value at x=3 {:.9f} against quoted 0.0230066", worst, at3)};
}

Outcome region_map() {
    std::vector<ParamCell> cells;
    for (double beta : {0.25, 0.5, 0.75, 1.0, 1.5, 2.0}) {
        ParamCell base;
        base.beta = beta;
        for (double gamma : {-1.0, 0.0, base.gamma_star() - 0.2, base.gamma_star(), base.gamma_star() + 0.2}) {
            ParamCell c = base;
            c.gamma = gamma;
            cells.push_back(c);
        }
    }
    const auto rows = sweep_condition_c(cells, default_sweep_lags());
    auto observed = [&](double beta, double gamma) {
        for (const auto& r : rows)
            if (r.cell.beta == beta && std::abs(r.cell.gamma - gamma) < 1e-12) return r.observed;
        return Observed::Inconclusive;
    };
    const bool named = observed(0.5, 0.0) == Observed::Holds && observed(1.0, 0.0) == Observed::Holds &&
                       observed(2.0, 0.0) == Observed::Fails && observed(1.0, 0.5) == Observed::Fails;
    int decided = 0, agree = 0;
    for (const auto& r : rows) {
        const Regime pred = r.cell.predicted();
        if (pred == Regime::Boundary) continue;
        ++decided;
        const Observed want = pred == Regime::Holds ? Observed::Holds : Observed::Fails;
        if (r.observed == want) ++agree;
        else fmt::print("      mismatch beta={} gamma={}: predicted {}, observed {}\n", r.cell.beta, r.cell.gamma,
                        to_string(pred), to_string(r.observed));
    }
    return {named && agree == decided, fmt::format("named cells {}; {}/{} decided cells agree", named ? "ok" : "wrong", agree, decided)};
}

Outcome monte_carlo() {
    const double eps = 0.2, t = 0.5;
    const auto k = JumpKernel::saturated(params(1.0, 1, eps), ConstantOne{});
    const Grid g = Grid::aligned(1, eps, 100.0);
    IteratedKernels ik(std::make_shared<GridKernel>(build_f_eps(k, g)));
    const auto d = density_p_eps(ik, t, ik.sources().front(), 1e-10);
    const SimConfig cfg{k, eps, t, 1000000, 12345, {0.0, 0.0, 0.0}, HistogramSpec::from_grid_window(g, 10.0, 4)};
    const auto e = simulate_paths(cfg);
    const auto c = compare_to_series(e, d);

    // the atom against the closed form, with its own binomial standard error
    const double atom = std::exp(-t * b_bar_1d(1.0, eps));
    const double se = std::sqrt(atom * (1.0 - atom) / 1e6);
    const double atom_z = (e.atom_estimate - atom) / se;
    // fraction within 3 sigma recomputed from the per-bin masses
    std::size_t occ = 0, within = 0;
    for (std::size_t i = 0; i < e.bins.size(); ++i) {
        if (e.bins[i].count == 0) continue;
        ++occ;
        const double p = c.expected_mass[i];
        const double sd = std::sqrt(std::max(p * (1.0 - p), 1e-300) / 1e6);
        if (std::abs(e.bins[i].mass - p) <= 3.0 * sd) ++within;
    }
    const double frac = occ ? static_cast<double>(within) / occ : 0.0;
    return {frac >= 0.99 && std::abs(atom_z) <= 3.0,
            fmt::format("{}/{} occupied bins within 3 sigma ({:.4f}); atom {:.6f} vs {:.6f}, z={:.2f}", within, occ,
                        frac, e.atom_estimate, atom, atom_z)};
}

Outcome estimate3_decay() {
    bool ok = true;
    std::string detail;
    for (double alpha : {1.0, 0.5}) {
        const auto k = JumpKernel::saturated(params(alpha, 1, 0.25), ConstantOne{});
        const Grid g = Grid::aligned(1, 0.25, 100.0);
        IteratedKernels ik(std::make_shared<GridKernel>(build_f_eps(k, g)));
        const auto rep = verify_estimate2_3(ik, 16);
        std::vector<double> lx, ly;
        for (int n = 8; n <= 16; ++n) {
            const auto& row = ik.normalized_row(n, 0);
            lx.push_back(std::log(n));
            ly.push_back(std::log(*std::max_element(row.begin(), row.end())));
        }
        const double s = slope(lx, ly);
        const double target = -1.0 / alpha;
        const double lib = rep.estimate3.fitted.count("slope") ? rep.estimate3.fitted.at("slope") : NAN;
        ok = ok && std::abs(s - target) <= 0.3 && std::abs(lib - s) <= 1e-9;
        detail += fmt::format("alpha={}: slope {:.4f} (library {:.4f}) target {:.1f}; ", alpha, s, lib, target);
    }
    return {ok, detail + "tol 0.3"};
}

// area of the intersection of two discs at distance dist
double lens_area(double dist, double r1, double r2) {
    if (dist >= r1 + r2) return 0.0;
    const double rs = std::min(r1, r2);
    if (dist <= std::abs(r1 - r2)) return std::numbers::pi * rs * rs;
    const double a1 = std::acos((dist * dist + r1 * r1 - r2 * r2) / (2.0 * dist * r1));
    const double a2 = std::acos((dist * dist + r2 * r2 - r1 * r1) / (2.0 * dist * r2));
    return r1 * r1 * (a1 - std::sin(2.0 * a1) / 2.0) + r2 * r2 * (a2 - std::sin(2.0 * a2) / 2.0);
}

Outcome ball_intersection() {
    double c[2][2];
    bool oracle_ok = true;
    for (int di = 0; di < 2; ++di)
        for (int ni = 0; ni < 2; ++ni) {
            const int d = di + 1, n = ni == 0 ? 8 : 16;
            c[di][ni] = verify_volumeest(n, d, 1e9).max_ratio;
            double best = 0.0;
            for (int p = 1; p <= n - 1; ++p)
                for (int k = 1; k <= n - p; ++k) {
                    const double r1 = p + k, r2 = n - p;
                    const double v = d == 1 ? std::max(0.0, std::min(r1, n + r2) - std::max(-r1, n - r2))
                                            : lens_area(n, r1, r2);
                    best = std::max(best, v / (std::pow(k, 0.5 * (d + 1)) * std::pow(std::min(r1, r2), 0.5 * (d - 1))));
                }
            oracle_ok = oracle_ok && std::abs(best - c[di][ni]) <= 1e-9 * best;
        }
    const double change = std::abs(c[1][1] - c[1][0]) / c[1][0];
    const double change1 = std::abs(c[0][1] - c[0][0]) / c[0][0];
    const bool d1 = verify_volumeest(8, 1, 1.0 + 1e-9).pass && verify_volumeest(16, 1, 1.0 + 1e-9).pass;
    return {oracle_ok && d1 && change < 0.1 && change1 < 0.1,
            fmt::format("c(d=1) {:.6f}/{:.6f}, c(d=2) {:.6f}/{:.6f} at n=8/16, change {:.2f}%; oracle {}", c[0][0],
                        c[0][1], c[1][0], c[1][1], 100.0 * change, oracle_ok ? "agrees" : "disagrees")};
}

Outcome generator_convergence_rate() {
    const double alpha = 0.5;
    const auto k = JumpKernel::saturated(params(alpha, 1, 0.1), ConstantOne{});
    const auto bump = smooth_bump({0.0, 0.0, 0.0}, 1.0);
    std::vector<Point> probes;
    for (int i = -12; i <= 12; ++i) probes.push_back({0.1 * i, 0.0, 0.0});
    const std::vector<double> eps{0.4, 0.2, 0.1, 0.05};
    const auto rep = generator_convergence(k, bump, eps, probes);

    // the small-jump part int_0^eps (phi(x+h) + phi(x-h) - 2 phi(x)) h^{-1-alpha} dh, directly
    auto phi = [](double x) { return std::abs(x) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - x * x)) : 0.0; };
    std::vector<double> gaps;
    for (double e : eps) {
        double sup = 0.0;
        for (const auto& p : probes) {
            const double x = p[0];
            auto f = [&](double h) { return (phi(x + h) + phi(x - h) - 2.0 * phi(x)) * std::pow(h, -1.0 - alpha); };
            sup = std::max(sup, std::abs(BoostGK::integrate(f, 0.0, e, 20, 1e-12)));
        }
        gaps.push_back(sup);
    }
    bool ok = true;
    std::string detail = "gaps";
    for (std::size_t i = 0; i < gaps.size(); ++i) {
        detail += fmt::format(" {:.4e}", gaps[i]);
        if (i > 0) ok = ok && gaps[i] < gaps[i - 1] && gaps[i] / gaps[i - 1] <= 0.8;
        ok = ok && std::abs(gaps[i] - rep.gaps[i]) <= 1e-5 * gaps[i];
    }
    return {ok && rep.verdict == Verdict::Pass, detail + fmt::format("; worst ratio {:.4f} (max 0.8)", rep.worst_ratio)};
}

} // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {"1 mass identity of iterated kernels", mass_identity},
        {"2 conservativeness", conservativeness},
        {"3 semigroup property", semigroup_property},
        {"4 heat kernel envelope", heat_kernel_envelope},
        {"5 logarithmic closed form", log_closed_form},
        {"6 tempered region map", region_map},
        {"7 Monte Carlo against the series", monte_carlo},
        {"8 decay of sup-normalised iterates", estimate3_decay},
        {"9 ball intersection constant", ball_intersection},
        {"10 generator convergence", generator_convergence_rate},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        fmt::print("{} criterion {}: {} [{:.1f}s]\n", o.pass ? "PASS" : "FAIL", c.name, o.detail, secs);
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    fmt::print("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
    return failed;
}
