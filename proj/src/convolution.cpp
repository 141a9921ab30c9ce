#include "stabledom/convolution.hpp"

#include "stabledom/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace stabledom {

ShellDecomposition ShellDecomposition::build(double lag) {
    if (!(lag > 2.0)) throw DomainError("shell decomposition needs lag > 2");
    ShellDecomposition sd;
    sd.lag = lag;
    for (int p = 1; lag - p > 0.5 * lag; ++p) {
        const double s_hi = lag - p;
        const double s_lo = std::max(0.5 * lag, lag - p - 1.0);
        for (int k = 0; p + k < lag - p; ++k) {
            ShellCell c;
            c.p = p;
            c.k = k;
            c.s_lo = s_lo;
            c.s_hi = s_hi;
            c.rho_lo = p + k;
            c.rho_hi = std::min<double>(p + k + 1.0, s_hi);
            sd.cells.push_back(c);
        }
    }
    return sd;
}

int ShellDecomposition::locate(double rho, double s) const {
    if (!(rho >= 1.0 && rho < s && s < lag - 1.0 && s >= lag - rho)) return -1;
    const int p = static_cast<int>(std::ceil(lag - s)) - 1;
    const int k = static_cast<int>(std::floor(rho)) - p;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].p == p && cells[i].k == k) return static_cast<int>(i);
    }
    return -1;
}

namespace {

struct ConvContext {
    const PhiProfile& phi;
    int dim;
    double power;  // alpha + d
    double lag;
    double log_scale;
    QuadratureSpec inner;

    double logk(double s) const { return log_phi(phi, s) - power * std::log(s); }

    // Surface integral over |z-x| = rho of exp(logk(s) + logk(rho) - log_scale) for s in [s_a, s_b).
    double shell(double rho, double s_a, double s_b) const {
        const double r = lag;
        const double lr = logk(rho) - log_scale;
        if (dim == 1) {
            // the "sphere" is the two points x - rho and x + rho
            double acc = 0.0;
            for (double s : {std::abs(r - rho), r + rho}) {
                if (s >= std::max(s_a, 1.0) && s < s_b) acc += std::exp(lr + logk(s));
            }
            return acc;
        }
        s_a = std::max({s_a, std::abs(r - rho), 1.0});
        s_b = std::min(s_b, r + rho);
        if (!(s_b > s_a)) return 0.0;
        if (dim == 2) {
            auto theta = [&](double s) {
                return std::acos(std::clamp((rho * rho + r * r - s * s) / (2.0 * rho * r), -1.0, 1.0));
            };
            const double ta = theta(s_a), tb = theta(s_b);
            auto f = [&](double th) {
                const double s = std::sqrt(std::max(0.0, rho * rho + r * r - 2.0 * rho * r * std::cos(th)));
                return std::exp(lr + logk(s));
            };
            return 2.0 * rho * integrate(f, ta, tb, inner);
        }
        auto f = [&](double s) { return std::exp(lr + logk(s)) * s; };
        return 2.0 * std::numbers::pi * rho / r * integrate(f, s_a, s_b, inner, {1.0});
    }
};

// Integrates piecewise between the breakpoints with rho = a + (b-a)(3u^2 - 2u^3) on each piece. In two
// dimensions a shell opens like sqrt(rho - rho0) at the piece ends, which plain bisection cannot resolve
// below the noise of the inner angular quadrature; the substitution makes the integrand vanish smoothly.
double integrate_pieces(const Integrand& f, double a, double b, const QuadratureSpec& spec, std::vector<double> bp) {
    bp.push_back(a);
    bp.push_back(b);
    std::sort(bp.begin(), bp.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
        const double lo = std::max(a, bp[i]), hi = std::min(b, bp[i + 1]);
        if (!(hi > lo)) continue;
        const double w = hi - lo;
        auto g = [&](double u) { return f(lo + w * u * u * (3.0 - 2.0 * u)) * 6.0 * w * u * (1.0 - u); };
        total += integrate(g, 0.0, 1.0, spec);
    }
    return total;
}

} // namespace

ConvolutionBreakdown convolution_breakdown(const PhiProfile& phi, const ModelParams& params, double lag,
                                           const QuadratureSpec& quad, double log_scale) {
    if (!(lag > 2.0)) throw PreconditionError("convolution_integral needs lag > 2");
    if (params.dim < 1 || params.dim > 3) throw PreconditionError("dimension must be 1, 2 or 3");
    quad.validate();
    QuadratureSpec inner = quad;
    inner.rel_tol = quad.rel_tol * 0.1;
    inner.abs_tol = std::numeric_limits<double>::min();
    ConvContext ctx{phi, params.dim, params.alpha + params.dim, lag, log_scale, inner};
    const double r = lag;

    ConvolutionBreakdown out;
    out.lag = lag;
    out.log_scale = log_scale;

    // Relative targets only: absolute scales vary by hundreds of orders of magnitude across profiles.
    QuadratureSpec outer = quad;
    outer.abs_tol = std::numeric_limits<double>::min();

    const ShellDecomposition sd = ShellDecomposition::build(lag);
    out.cell_values.reserve(sd.cells.size());
    for (const auto& c : sd.cells) {
        auto f = [&](double rho) { return ctx.shell(rho, std::max(c.s_lo, rho), c.s_hi); };
        std::vector<double> bp{r - c.s_hi, r - c.s_lo, 0.5 * r, c.s_lo, c.s_hi};
        const double v = c.rho_hi > c.rho_lo ? integrate_pieces(f, c.rho_lo, c.rho_hi, outer, bp) : 0.0;
        out.cell_values.push_back(v);
        out.near_part += v;
    }

    auto far = [&](double rho) { return ctx.shell(rho, std::max(rho, r - 1.0), std::numeric_limits<double>::infinity()); };
    std::optional<PowerTail> env;
    const double coeff = unit_sphere_area(params.dim) * std::exp(-log_scale);
    if (std::isfinite(coeff)) env = PowerTail{coeff, 2.0 * params.alpha + params.dim};
    QuadratureSpec far_spec = outer;
    far_spec.abs_tol = std::max(std::numeric_limits<double>::min(), 1e-3 * quad.rel_tol * out.near_part);
    // the far piece is split at the kinks of the s-range: rho = 1 (start), r-1, r, and r/2
    double head = integrate_pieces(far, 1.0, std::max(2.0 * r, 4.0), outer, {0.5 * r, r - 1.0, r - 2.0, r, r + 1.0});
    const QuadResult tail = integrate_to_infinity(far, std::max(2.0 * r, 4.0), far_spec, env);
    out.far_part = head + tail.value;
    out.truncation_radius = tail.truncation_radius;

    out.total = 2.0 * (out.far_part + out.near_part);

    // crude bound from the displayed proof: k(r-1) times the full profile integral outside the unit ball
    const double lk = ctx.logk(r - 1.0) - log_scale;
    auto radial = [&](double s) { return std::exp(ctx.logk(s)); };
    out.far_bound = std::exp(lk) * integrate_radial(radial, 1.0, std::numeric_limits<double>::infinity(), params.dim, quad);
    return out;
}

double convolution_integral(const PhiProfile& phi, const ModelParams& params, double lag, const QuadratureSpec& quad) {
    return convolution_breakdown(phi, params, lag, quad, 0.0).total;
}

double convolution_ratio(const PhiProfile& phi, const ModelParams& params, double lag, const QuadratureSpec& quad) {
    if (!(lag > 2.0)) throw PreconditionError("convolution ratio needs lag > 2");
    const double log_k = log_phi(phi, lag) - (params.alpha + params.dim) * std::log(lag);
    return convolution_breakdown(phi, params, lag, quad, log_k).total;
}

} // namespace stabledom
