#include "stabledom/assumptions.hpp"

#include "stabledom/convolution.hpp"
#include "stabledom/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace stabledom {

std::string to_string(Verdict v) {
    switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    default: return "inconclusive";
    }
}

namespace {

constexpr double kStability = 0.2;

bool stable(double base, double extended) {
    if (!std::isfinite(base) || !std::isfinite(extended)) return false;
    if (base == 0.0) return extended == 0.0;
    return std::abs(extended / base - 1.0) < kStability;
}

struct A1aScan {
    double worst = 0.0, worst_tail = 0.0;
    double a = 0.0, b = 0.0;
    int samples = 0;
};

A1aScan scan_a1a(const PhiProfile& phi, double lag_max, double step) {
    A1aScan s;
    const int na = static_cast<int>(std::floor(lag_max / step + 1e-9));
    const int nb = static_cast<int>(std::floor(1.0 / step + 1e-9));
    for (int i = 0; i <= na; ++i) {
        const double a = i * step;
        const double la = log_phi(phi, a);
        auto visit = [&](double b) {
            if (b < 0.0) return;
            const double ratio = std::exp(la - log_phi(phi, b));
            ++s.samples;
            if (!(ratio <= s.worst)) {
                s.worst = ratio;
                s.a = a;
                s.b = b;
            }
            if (a > 1.0 && b > 1.0 && ratio > s.worst_tail) s.worst_tail = ratio;
        };
        for (int j = -nb; j <= nb; ++j) visit(a + j * step);
        visit(a - 1.0);
        visit(a + 1.0);
    }
    return s;
}

double max_knot_gap(const PhiProfile& phi) {
    const auto* tab = std::get_if<Tabulated>(&phi);
    if (!tab) return 0.0;
    double prev = 1.0, gap = 0.0;
    for (const auto& kv : tab->knots) {
        gap = std::max(gap, kv.first - prev);
        prev = kv.first;
    }
    return gap;
}

} // namespace

AssumptionReport check_a1a(const PhiProfile& phi, double lag_max, double step) {
    if (!(lag_max > 2.0)) throw PreconditionError("check_a1a needs lag_max > 2");
    if (!(step > 0.0)) throw PreconditionError("check_a1a needs step > 0");
    validate_profile(phi);
    AssumptionReport rep;
    rep.condition = "A1a";
    const A1aScan base = scan_a1a(phi, lag_max, step);
    const A1aScan doubled = scan_a1a(phi, 2.0 * lag_max, step);
    rep.worst_ratio = doubled.worst;
    rep.worst_location = {doubled.a, doubled.b};
    rep.samples_checked = base.samples + doubled.samples;
    rep.constants["c1"] = doubled.worst;
    rep.constants["c1_tail"] = doubled.worst_tail;
    rep.trace = {{lag_max, base.worst}, {2.0 * lag_max, doubled.worst}};
    if (max_knot_gap(phi) > 1.0) {
        rep.verdict = Verdict::Inconclusive;
        rep.note = "tabulated profile has knot gaps wider than 1";
        return rep;
    }
    rep.verdict = stable(base.worst, doubled.worst) ? Verdict::Pass : Verdict::Fail;
    rep.note = "c1 includes pairs straddling s = 1; c1_tail restricts to a, b > 1";
    return rep;
}

namespace {

std::pair<double, double> scan_a1b(const PhiProfile& phi, double lag_max, int& samples) {
    const bool tabulated = std::holds_alternative<Tabulated>(phi);
    std::vector<double> knots;
    if (tabulated) {
        for (const auto& kv : std::get<Tabulated>(phi).knots) knots.push_back(kv.first);
    }
    constexpr int n = 4000;
    double worst = 0.0, where = 1.0;
    for (int i = 1; i <= n; ++i) {
        const double a = 1.0 + (lag_max - 1.0) * i / n;
        if (tabulated) {
            // the interpolant has kinks at the knots; difference quotients straddling them are skipped
            const double h = 1e-4 * std::max(1.0, a);
            bool near_knot = a - 2.0 * h <= 1.0;
            for (double k : knots) near_knot = near_knot || std::abs(a - k) <= 2.0 * h;
            if (near_knot) continue;
        }
        const double r = derivative_ratio(phi, a);
        ++samples;
        if (!(r <= worst)) {
            worst = r;
            where = a;
        }
    }
    return {worst, where};
}

} // namespace

AssumptionReport check_a1b(const PhiProfile& phi, double lag_max) {
    if (!(lag_max > 1.0)) throw PreconditionError("check_a1b needs lag_max > 1");
    validate_profile(phi);
    AssumptionReport rep;
    rep.condition = "A1b";
    int samples = 0;
    const auto [w1, a1] = scan_a1b(phi, lag_max, samples);
    const auto [w2, a2] = scan_a1b(phi, 2.0 * lag_max, samples);
    rep.samples_checked = samples;
    rep.worst_ratio = std::max(w1, w2);
    rep.worst_location = {w2 >= w1 ? a2 : a1};
    rep.constants["c2"] = rep.worst_ratio;
    rep.trace = {{lag_max, w1}, {2.0 * lag_max, w2}};
    if (std::holds_alternative<Tabulated>(phi) && max_knot_gap(phi) > 1.0) {
        rep.verdict = Verdict::Inconclusive;
        rep.note = "tabulated profile too sparse for finite differences";
        return rep;
    }
    rep.verdict = stable(w1, w2) ? Verdict::Pass : Verdict::Fail;
    return rep;
}

AssumptionReport check_a1c(const JumpKernel& kernel, const std::vector<double>& lags, const QuadratureSpec& quad) {
    if (lags.empty()) throw PreconditionError("check_a1c needs at least one lag");
    for (double r : lags)
        if (!(r > 2.0)) throw PreconditionError("check_a1c lags must exceed 2");
    AssumptionReport rep;
    rep.condition = "A1c";
    std::vector<double> all = lags;
    std::sort(all.begin(), all.end());
    const double top = all.back();
    all.push_back(1.5 * top);
    all.push_back(2.0 * top);
    double worst_base = 0.0, worst_all = 0.0, where = all.front();
    bool overflow = false;
    try {
        for (std::size_t i = 0; i < all.size(); ++i) {
            double ratio;
            try {
                ratio = convolution_ratio(kernel.phi(), kernel.params(), all[i], quad);
            } catch (const QuadratureError& e) {
                if (std::isfinite(e.last_estimate)) throw;
                ratio = std::numeric_limits<double>::infinity();
            }
            if (!std::isfinite(ratio)) overflow = true;
            rep.trace.emplace_back(all[i], ratio);
            ++rep.samples_checked;
            if (i < lags.size()) worst_base = std::max(worst_base, ratio);
            if (!(ratio <= worst_all)) {
                worst_all = ratio;
                where = all[i];
            }
        }
    } catch (const QuadratureError& e) {
        rep.verdict = Verdict::Inconclusive;
        rep.note = std::string("quadrature did not converge: ") + e.what();
        return rep;
    }
    rep.worst_ratio = worst_all;
    rep.worst_location = {where};
    rep.constants["c3"] = worst_all;
    rep.verdict = (!overflow && stable(worst_base, worst_all)) ? Verdict::Pass : Verdict::Fail;
    if (overflow) rep.note = "ratio overflowed double range at the extended lags";
    return rep;
}

AssumptionReport check_a2(const JumpKernel& kernel, const std::vector<Point>& xs, const std::vector<Point>& hs) {
    AssumptionReport rep;
    rep.condition = "A2";
    double worst = 0.0;
    for (const auto& x : xs) {
        for (const auto& h : hs) {
            const double fp = kernel(x, x + h), fm = kernel(x, x - h);
            const double scale = std::max(fp, fm);
            ++rep.samples_checked;
            if (scale > 0.0) {
                const double asym = std::abs(fp - fm) / scale;
                if (asym > worst) {
                    worst = asym;
                    rep.worst_location = {x[0], x[1], x[2], h[0], h[1], h[2]};
                }
            }
        }
    }
    rep.worst_ratio = worst;
    rep.constants["increment_asymmetry"] = worst;
    const bool symmetric = worst <= 1e-12 && kernel.flags().symmetric_in_increment;
    if (kernel.params().alpha < 1.0) {
        rep.verdict = Verdict::Pass;
        rep.note = symmetric ? "licensed by symmetric increments (alpha < 1 as well)" : "licensed by alpha < 1";
    } else {
        rep.verdict = symmetric ? Verdict::Pass : Verdict::Fail;
        rep.note = symmetric ? "licensed by symmetric increments (sampled)"
                             : "alpha >= 1 needs symmetric increments; sampled asymmetry or undeclared flag";
    }
    return rep;
}

AssumptionReport check_a3(const JumpKernel& kernel, const std::vector<Point>& xs, const std::vector<Point>& ys) {
    AssumptionReport rep;
    rep.condition = "A3";
    double worst = 0.0;
    for (const auto& x : xs) {
        for (const auto& y : ys) {
            if (distance(x, y) == 0.0) continue;
            const double a = kernel(x, y), b = kernel(y, x);
            const double scale = std::max(a, b);
            ++rep.samples_checked;
            if (scale > 0.0 && std::abs(a - b) / scale > worst) {
                worst = std::abs(a - b) / scale;
                rep.worst_location = {x[0], x[1], x[2], y[0], y[1], y[2]};
            }
        }
    }
    rep.worst_ratio = worst;
    rep.constants["argument_asymmetry"] = worst;
    rep.verdict = (worst <= 1e-12) ? Verdict::Pass : Verdict::Fail;
    if (rep.verdict == Verdict::Pass && !kernel.flags().symmetric_in_arguments)
        rep.note = "sampled symmetric although the flag is not declared";
    return rep;
}

double tail_mass(const JumpKernel& kernel, const Point& x, double radius, const QuadratureSpec& quad, TailWeight weight) {
    if (!(radius > 0.0)) throw DomainError("tail_mass needs a positive radius (the integrand is not integrable at 0)");
    const auto& prm = kernel.params();
    const int d = prm.dim;
    const double inf = std::numeric_limits<double>::infinity();
    // |f| r^{d-1} <= M r^{-alpha-1}; the 1/phi weight makes this exact for saturated kernels
    const PowerTail env{prm.M, prm.alpha};

    if (kernel.saturated_kernel()) {
        if (weight == TailWeight::InverseProfile) {
            return unit_sphere_area(d) * prm.M * std::pow(radius, -prm.alpha) / prm.alpha;
        }
        auto g = [&](double r) { return kernel.radial(r); };
        return integrate_radial_detailed(g, radius, inf, d, quad, env).value;
    }

    auto weighted = [&](const Point& y) {
        const double r = distance(x, y);
        const double f = kernel(x, y);
        if (weight == TailWeight::One || f == 0.0) return f;
        const double ph = phi_eval(kernel.phi(), r);
        return ph > 0.0 ? f / ph : 0.0;
    };
    if (kernel.has_radial()) {
        auto g = [&](double r) {
            Point y = x;
            y[0] += r;
            return weighted(y);
        };
        return integrate_radial_detailed(g, radius, inf, d, quad, env).value;
    }

    // general kernels: spherical coordinates around x
    auto radial_along = [&](const Point& dir) {
        auto g = [&](double r) {
            const double rr = (d == 1) ? 1.0 : std::pow(r, d - 1);
            return weighted(x + r * dir) * rr;
        };
        return integrate_to_infinity(g, radius, quad, env, {1.0}).value;
    };
    if (d == 1) return radial_along({1.0, 0.0, 0.0}) + radial_along({-1.0, 0.0, 0.0});
    QuadratureSpec outer = quad;
    outer.rel_tol = std::max(quad.rel_tol, 1e-7);
    if (d == 2) {
        auto ang = [&](double th) { return radial_along({std::cos(th), std::sin(th), 0.0}); };
        return integrate(ang, 0.0, 2.0 * std::numbers::pi, outer);
    }
    auto polar = [&](double th) {
        auto az = [&](double ph) {
            return radial_along({std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)});
        };
        return std::sin(th) * integrate(az, 0.0, 2.0 * std::numbers::pi, outer);
    };
    return integrate(polar, 0.0, std::numbers::pi, outer);
}

AssumptionReport check_a4(const JumpKernel& kernel, const std::vector<double>& radii, const std::vector<Point>& xs,
                          const QuadratureSpec& quad) {
    if (radii.empty() || xs.empty()) throw PreconditionError("check_a4 needs radii and sample points");
    for (double r : radii)
        if (!(r > 0.0)) throw PreconditionError("check_a4 radii must be positive");
    std::vector<double> sorted = radii;
    std::sort(sorted.begin(), sorted.end());
    const double alpha = kernel.params().alpha;

    AssumptionReport rep;
    rep.condition = "A4";
    double c4 = std::numeric_limits<double>::infinity(), c4_half = c4;
    double c5 = 0.0;
    std::vector<double> low_scaled(sorted.size());  // inf_x b_eps(x) eps^alpha
    const std::size_t half = (sorted.size() + 1) / 2;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double eps = sorted[i];
        double inf_weighted = std::numeric_limits<double>::infinity();
        double inf_b = inf_weighted, sup_b = 0.0;
        for (const auto& x : xs) {
            const double w = tail_mass(kernel, x, eps, quad, TailWeight::InverseProfile) * std::pow(eps, alpha);
            const double b = tail_mass(kernel, x, eps, quad, TailWeight::One) * std::pow(eps, alpha);
            rep.samples_checked += 1;
            if (w < inf_weighted) inf_weighted = w;
            inf_b = std::min(inf_b, b);
            sup_b = std::max(sup_b, b);
            if (w < c4) rep.worst_location = {x[0], x[1], x[2], eps};
        }
        rep.trace.emplace_back(eps, inf_weighted);
        c4 = std::min(c4, inf_weighted);
        if (i < half) c4_half = std::min(c4_half, inf_weighted);
        if (eps <= 1.0) c5 = std::max(c5, sup_b);
        low_scaled[i] = inf_b;
    }
    // eps0: largest tested eps such that every tested eps up to it keeps inf b_eps eps^alpha >= c4 / 2
    double eps0 = 0.0, c6 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (!(low_scaled[i] >= 0.5 * c4) || !(c4 > 0.0)) break;
        eps0 = sorted[i];
        c6 = std::min(c6, low_scaled[i]);
    }
    rep.worst_ratio = c4;
    rep.constants["c4"] = c4;
    rep.constants["c5"] = c5;
    rep.constants["c6"] = std::isfinite(c6) ? c6 : 0.0;
    rep.constants["eps0"] = eps0;
    const bool positive = c4 > 1e-12 * std::max(1.0, c5);
    rep.verdict = (positive && stable(c4_half, c4)) ? Verdict::Pass : Verdict::Fail;
    rep.note = "constants are empirical lower witnesses over the sampled radii and points";
    return rep;
}

} // namespace stabledom
