#include "stabledom/semigroup.hpp"

#include "stabledom/errors.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace stabledom {

double GridFunction::sup_norm() const {
    double m = std::abs(exterior);
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

GridFunction gamma_apply_normalized(const GridKernel& gk, const GridFunction& v) {
    const std::size_t n = gk.grid().size();
    if (v.values.size() != n) throw PreconditionError("grid function has the wrong size");
    GridFunction out;
    gk.apply(v.values, out.values);
    const double bbar = gk.b_bar();
    for (std::size_t x = 0; x < n; ++x)
        out.values[x] = (out.values[x] + gk.out_of_box(x) * v.exterior + gk.atom_weight(x) * v.values[x]) / bbar;
    out.exterior = v.exterior;
    return out;
}

double poisson_tail(double rate, int n) {
    if (n < 0) return 1.0;
    return boost::math::gamma_p(static_cast<double>(n) + 1.0, rate);
}

int poisson_truncation(double rate, double scale, double tol) {
    if (!(rate >= 0.0) || !(tol > 0.0)) throw PreconditionError("poisson truncation needs rate >= 0 and tol > 0");
    if (scale == 0.0 || rate == 0.0) return 0;
    int n = static_cast<int>(std::floor(rate));
    while (n > 0 && poisson_tail(rate, n - 1) * scale <= tol) --n;
    while (poisson_tail(rate, n) * scale > tol) ++n;
    return n;
}

std::vector<double> poisson_weights(double rate, int N) {
    std::vector<double> w(static_cast<std::size_t>(N) + 1);
    for (int k = 0; k <= N; ++k) {
        w[k] = rate == 0.0 ? (k == 0 ? 1.0 : 0.0)
                           : std::exp(-rate + k * std::log(rate) - std::lgamma(static_cast<double>(k) + 1.0));
    }
    return w;
}

ExpmResult expm_apply(const GridKernel& gk, const GridFunction& phi, double t, double tol) {
    if (!(t > 0.0)) throw PreconditionError("t must be positive");
    if (!(tol > 0.0)) throw PreconditionError("tol must be positive");
    const double rate = t * gk.b_bar();
    const double scale = phi.sup_norm();
    ExpmResult res;
    res.truncation_N = poisson_truncation(rate, scale, tol);
    res.truncation_bound = poisson_tail(rate, res.truncation_N) * scale;
    const auto w = poisson_weights(rate, res.truncation_N);
    GridFunction term = phi;
    res.value.values.assign(phi.values.size(), 0.0);
    res.value.exterior = phi.exterior;
    for (int k = 0; k <= res.truncation_N; ++k) {
        if (k > 0) term = gamma_apply_normalized(gk, term);
        for (std::size_t i = 0; i < term.values.size(); ++i) res.value.values[i] += w[k] * term.values[i];
    }
    return res;
}

ExpmResult expm_apply(const IteratedKernels& ik, const GridFunction& phi, double t, double tol) {
    return expm_apply(ik.base(), phi, t, tol);
}

double DensityResult::total_mass() const {
    double s = 0.0;
    for (double v : q) s += v;
    return s * grid.cell_volume() + exterior_mass + atom;
}

DensityResult density_p_eps(IteratedKernels& ik, double t, std::size_t x, double tol) {
    if (!(t > 0.0)) throw PreconditionError("t must be positive");
    if (!(tol > 0.0)) throw PreconditionError("tol must be positive");
    const std::size_t slot = ik.slot_of(x);
    const GridKernel& gk = ik.base();
    const double rate = t * gk.b_bar();
    DensityResult res;
    res.t = t;
    res.eps = gk.kernel().params().eps;
    res.alpha = gk.kernel().params().alpha;
    res.source = x;
    res.grid = gk.grid();
    res.x = gk.grid().point(x);
    res.truncation_N = std::max(1, poisson_truncation(rate, 1.0, tol));
    res.truncation_bound = poisson_tail(rate, res.truncation_N);
    if (ik.levels() < res.truncation_N) ik.extend_to(res.truncation_N);
    const auto w = poisson_weights(rate, res.truncation_N);
    res.q.assign(gk.grid().size(), 0.0);
    for (int n = 1; n <= res.truncation_N; ++n) {
        const auto& g = ik.normalized_row(n, slot);
        for (std::size_t y = 0; y < g.size(); ++y) res.q[y] += w[n] * g[y];
        res.exterior_mass += w[n] * ik.leak(n, slot);
    }
    res.b_source = gk.b_eps(x);
    res.atom = std::exp(-t * res.b_source);
    return res;
}

} // namespace stabledom
