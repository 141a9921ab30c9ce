#pragma once

#include "stabledom/params.hpp"
#include "stabledom/profile.hpp"
#include "stabledom/quadrature.hpp"

#include <vector>

namespace stabledom {

/// One cell D_{p,k}: points z with s = |z-y| in [s_lo, s_hi) and rho = |z-x| in [rho_lo, rho_hi), rho < s.
struct ShellCell {
    int p = 0;
    int k = 0;
    double s_lo = 0.0;
    double s_hi = 0.0;
    double rho_lo = 0.0;
    double rho_hi = 0.0;
};

/// Cells covering {z : 1 <= |z-x| < |z-y| < lag-1}. For integer lags the shells are the
/// D_p = {lag-p-1 <= |z-y| < lag-p}; for other lags the innermost shell is clipped at lag/2.
struct ShellDecomposition {
    double lag = 0.0;
    std::vector<ShellCell> cells;

    static ShellDecomposition build(double lag);

    /// Index of the cell containing (rho, s), or -1 when the pair lies outside the covered set.
    int locate(double rho, double s) const;
};

struct ConvolutionBreakdown {
    double lag = 0.0;
    /// All integrals below are multiplied by exp(-log_scale).
    double log_scale = 0.0;
    double total = 0.0;
    /// The half-space piece {|z-x| >= 1, |z-x| < |z-y|, |z-y| >= lag-1}, before the reflection factor 2.
    double far_part = 0.0;
    /// Sum over the shell cells, before the reflection factor 2.
    double near_part = 0.0;
    std::vector<double> cell_values;
    /// k(lag-1) * int_{|z|>=1} k, the crude bound on the far piece, scaled like the rest.
    double far_bound = 0.0;
    double truncation_radius = 0.0;
};

/// int_{|x-z|>=1, |y-z|>=1} k(|y-z|) k(|z-x|) dz with k(s) = phi(s) s^{-alpha-d} and |x-y| = lag > 2.
double convolution_integral(const PhiProfile& phi, const ModelParams& params, double lag, const QuadratureSpec& quad);

/// Full breakdown, every integral scaled by exp(-log_scale) so tiny values stay representable.
ConvolutionBreakdown convolution_breakdown(const PhiProfile& phi, const ModelParams& params, double lag,
                                           const QuadratureSpec& quad, double log_scale = 0.0);

/// convolution_integral(lag) / k(lag), evaluated in scaled form.
double convolution_ratio(const PhiProfile& phi, const ModelParams& params, double lag, const QuadratureSpec& quad);

} // namespace stabledom
