#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace stabledom {

struct QuadratureSpec {
    double rel_tol = 1e-8;
    double abs_tol = 1e-12;
    int max_subdivisions = 2000;

    void validate() const;
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    int subdivisions = 0;
    bool converged = true;
    double previous_value = 0.0;
    /// Outer radius beyond which the integrand was bounded analytically (inf for finite ranges).
    double truncation_radius = std::numeric_limits<double>::infinity();
};

using Integrand = std::function<double(double)>;

/// Bound |f(r)| <= coeff * r^{-power-1} for r beyond the truncation radius, power > 0.
/// Its tail coeff * R^{-power} / power decides where an infinite range is cut.
struct PowerTail {
    double coeff = 1.0;
    double power = 1.0;
};

/// Globally adaptive Gauss-Kronrod (7/15) on [a, b], split first at the given breakpoints.
/// Never throws on budget exhaustion; inspect `converged`.
QuadResult gauss_kronrod(const Integrand& f, double a, double b, const QuadratureSpec& spec,
                         const std::vector<double>& breakpoints = {});

/// Like gauss_kronrod, but throws QuadratureError (with the last two estimates) when not converged.
double integrate(const Integrand& f, double a, double b, const QuadratureSpec& spec,
                 const std::vector<double>& breakpoints = {});

/// Integral over [a, inf) on geometric panels [a 2^k, a 2^{k+1}]. With an envelope the range is cut
/// where the envelope tail falls below tolerance; without one the tail is extrapolated as a
/// geometric series from the last two panels. Throws QuadratureError on failure.
QuadResult integrate_to_infinity(const Integrand& f, double a, const QuadratureSpec& spec,
                                 std::optional<PowerTail> envelope = std::nullopt,
                                 const std::vector<double>& breakpoints = {});

/// sigma_dim * int_{r_min}^{r_max} g(r) r^{dim-1} dr; r_max may be +inf. Always splits at r = 1.
double integrate_radial(const Integrand& g, double r_min, double r_max, int dim, const QuadratureSpec& spec);

/// integrate_radial with an envelope on g(r) r^{dim-1} for the infinite part, returning details.
QuadResult integrate_radial_detailed(const Integrand& g, double r_min, double r_max, int dim,
                                     const QuadratureSpec& spec, std::optional<PowerTail> envelope);

} // namespace stabledom
