#pragma once

#include "stabledom/profile.hpp"
#include "stabledom/quadrature.hpp"

#include <string>
#include <vector>

namespace stabledom {

enum class Regime { Holds, Fails, Boundary };
std::string to_string(Regime r);

/// Parameters of phi(s) = e^{-m s^beta} s^gamma with the stable index and dimension.
struct ParamCell {
    double m = 1.0;
    double beta = 1.0;
    double gamma = 0.0;
    double alpha = 0.5;
    int dim = 1;

    /// gamma* = d/2 + alpha - 1/2.
    double gamma_star() const { return 0.5 * dim + alpha - 0.5; }
    /// Holds iff beta in (0, 1] and gamma < gamma*; fails iff beta > 1, or beta = 1, gamma = gamma*
    /// and d = 1; boundary otherwise.
    Regime predicted() const;
    PhiProfile profile() const { return ExpPower{m, beta, gamma}; }
};

enum class Observed { Holds, Fails, Inconclusive, Rejected };
std::string to_string(Observed o);

struct SweepRow {
    ParamCell cell;
    Regime predicted = Regime::Boundary;
    Observed observed = Observed::Inconclusive;
    std::vector<double> lags;
    std::vector<double> ratios;
    double max_ratio = 0.0;
    /// ratio at the last lag over ratio at the first.
    double growth_factor = 0.0;
    /// Exponent q in dr/d(ln lag) ~ lag^q over the upper half of the lags; NaN when not fitted.
    double slope_exponent = 0.0;
    /// Observed agrees with predicted; boundary predictions agree with anything.
    bool matches = false;
    std::string note;
};

/// Classifies the convolution condition per cell from the convolution ratio along the lags:
/// non-finite, or monotone growth by 10x or more, is a failure; a ratio that has turned down at the
/// last lag holds; otherwise the increments dr/d(ln lag) decide: a flat power law (q >= -0.15) is
/// logarithmic growth and fails, a decaying one (q <= -0.3) with the ratio within 20% of its
/// mid-range value holds, anything else is inconclusive. Profiles exceeding 1 are rejected.
std::vector<SweepRow> sweep_condition_c(const std::vector<ParamCell>& cells, const std::vector<double>& lags,
                                        const QuadratureSpec& quad = {});

/// beta in {0.25, 0.5, 0.75, 1, 1.5, 2}, gamma in {-1, 0, g*-0.2, g*, g*+0.2}, alpha in
/// {0.5, 1, 1.5}, d in {1, 2}, m = 1.
std::vector<ParamCell> default_sweep_cells();

/// Lags 4, 6, ..., 20.
std::vector<double> default_sweep_lags();

struct RemarkValues {
    double numeric = 0.0;
    double analytic = 0.0;
    double rel_gap = 0.0;
};

/// int_1^{x-1} e^{-(x-z)} (x-z)^{-1} e^{-z} z^{-1} dz by quadrature, against 2 ln(x-1) e^{-x} / x.
RemarkValues remark_closed_form(double x, const QuadratureSpec& quad = {});

/// int over the unit ball at the midpoint of x and y of k(|y-z|) k(|z-x|) dz, divided by k(lag),
/// with k(s) = phi(s) s^{-alpha-d}.
double midpoint_lower_bound(const ParamCell& cell, double lag, const QuadratureSpec& quad = {});

} // namespace stabledom
