#include "stabledom/generator.hpp"

#include "stabledom/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace stabledom {

TestFunction smooth_bump(const Point& center, double radius) {
    if (!(radius > 0.0)) throw PreconditionError("bump radius must be positive");
    TestFunction tf;
    tf.center = center;
    tf.support_radius = radius;
    tf.f = [center, radius](const Point& y) {
        const double s = distance(y, center) / radius;
        if (s >= 1.0) return 0.0;
        return std::exp(1.0 - 1.0 / (1.0 - s * s));
    };
    return tf;
}

double generator_apply(const JumpKernel& kernel, const TestFunction& phi, const Point& x, double eps_probe,
                       const QuadratureSpec& quad) {
    const ModelParams& p = kernel.params();
    if (!(eps_probe >= 0.0)) throw PreconditionError("eps_probe must be nonnegative");
    if (!kernel.flags().symmetric_in_increment && p.alpha >= 1.0)
        throw PreconditionError("alpha >= 1 requires symmetric increments for the principal value");
    const int d = p.dim;
    const double phix = phi(x);
    const double reach = distance(x, phi.center) + phi.support_radius;
    // below delta the paired differences are replaced by their Taylor expansion
    const double delta = 1e-3 * phi.support_radius;

    auto along = [&](const Point& u) {
        auto at = [&](double r) { return x + r * u; };
        const double up = phi(at(delta)), down = phi(at(-delta));
        const double second = (up + down - 2.0 * phix) / (delta * delta);
        const double first = (up - down) / (2.0 * delta);
        auto jac = [d](double r) { return d == 1 ? 1.0 : std::pow(r, d - 1); };
        auto core = [&](double r) {
            const double fp = kernel(x, at(r)), fm = kernel(x, at(-r));
            return (r * first * (fp - fm) + 0.5 * r * r * second * (fp + fm)) * jac(r);
        };
        auto outer = [&](double r) {
            const double fp = kernel(x, at(r)), fm = kernel(x, at(-r));
            return ((phi(at(r)) - phix) * fp + (phi(at(-r)) - phix) * fm) * jac(r);
        };
        double s = 0.0;
        if (eps_probe < delta) s += integrate(core, eps_probe, delta, quad);
        const double lo = std::max(eps_probe, delta);
        if (lo < reach) s += integrate(outer, lo, reach, quad, {1.0});
        return s;
    };

    double inner;
    if (d == 1) {
        inner = along({1.0, 0.0, 0.0});
    } else if (d == 2) {
        inner = integrate([&](double th) { return along({std::cos(th), std::sin(th), 0.0}); }, 0.0, std::numbers::pi,
                          quad);
    } else {
        inner = integrate(
            [&](double th) {
                const double st = std::sin(th), ct = std::cos(th);
                return st * integrate([&](double ph) { return along({st * std::cos(ph), st * std::sin(ph), ct}); },
                                      0.0, 2.0 * std::numbers::pi, quad);
            },
            0.0, 0.5 * std::numbers::pi, quad);
    }
    // beyond reach phi vanishes on both rays, leaving -phi(x) times the tail mass
    double far = 0.0;
    if (phix != 0.0) far = -phix * tail_mass(kernel, x, std::max(reach, eps_probe), quad);
    return inner + far;
}

GeneratorConvergenceReport generator_convergence(const JumpKernel& kernel, const TestFunction& phi,
                                                 const std::vector<double>& eps, const std::vector<Point>& probes,
                                                 const QuadratureSpec& quad, double max_ratio) {
    if (eps.size() < 2) throw PreconditionError("generator convergence needs at least two eps values");
    if (probes.empty()) throw PreconditionError("generator convergence needs probe points");
    for (std::size_t k = 1; k < eps.size(); ++k)
        if (!(eps[k] < eps[k - 1])) throw PreconditionError("eps sequence must decrease");
    std::vector<double> full(probes.size());
    for (std::size_t i = 0; i < probes.size(); ++i) full[i] = generator_apply(kernel, phi, probes[i], 0.0, quad);

    GeneratorConvergenceReport rep;
    rep.eps = eps;
    for (double e : eps) {
        double gap = 0.0;
        for (std::size_t i = 0; i < probes.size(); ++i)
            gap = std::max(gap, std::abs(full[i] - generator_apply(kernel, phi, probes[i], e, quad)));
        rep.gaps.push_back(gap);
    }
    rep.monotone = true;
    for (std::size_t k = 1; k < rep.gaps.size(); ++k) {
        const double r = rep.gaps[k - 1] > 0.0 ? rep.gaps[k] / rep.gaps[k - 1] : 0.0;
        rep.ratios.push_back(r);
        rep.worst_ratio = std::max(rep.worst_ratio, r);
        rep.monotone = rep.monotone && rep.gaps[k] < rep.gaps[k - 1];
    }
    if (rep.gaps.front() == 0.0) rep.verdict = Verdict::Inconclusive;
    else rep.verdict = rep.monotone && rep.worst_ratio <= max_ratio ? Verdict::Pass : Verdict::Fail;
    return rep;
}

} // namespace stabledom
