#include "stabledom/tempered.hpp"

#include "parallel.hpp"
#include "stabledom/convolution.hpp"
#include "stabledom/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace stabledom {

std::string to_string(Regime r) {
    switch (r) {
    case Regime::Holds: return "holds";
    case Regime::Fails: return "fails";
    case Regime::Boundary: return "boundary";
    }
    return "?";
}

std::string to_string(Observed o) {
    switch (o) {
    case Observed::Holds: return "holds";
    case Observed::Fails: return "fails";
    case Observed::Inconclusive: return "inconclusive";
    case Observed::Rejected: return "rejected";
    }
    return "?";
}

Regime ParamCell::predicted() const {
    const double gs = gamma_star();
    const bool critical = std::abs(gamma - gs) <= 1e-12 * std::max(1.0, std::abs(gs));
    if (beta > 1.0 || (beta == 1.0 && critical && dim == 1)) return Regime::Fails;
    if (beta > 0.0 && beta <= 1.0 && gamma < gs && !critical) return Regime::Holds;
    return Regime::Boundary;
}

std::vector<ParamCell> default_sweep_cells() {
    std::vector<ParamCell> cells;
    for (int d : {1, 2})
        for (double alpha : {0.5, 1.0, 1.5})
            for (double beta : {0.25, 0.5, 0.75, 1.0, 1.5, 2.0}) {
                ParamCell c;
                c.alpha = alpha;
                c.dim = d;
                c.beta = beta;
                const double gs = c.gamma_star();
                for (double gamma : {-1.0, 0.0, gs - 0.2, gs, gs + 0.2}) {
                    c.gamma = gamma;
                    cells.push_back(c);
                }
            }
    return cells;
}

std::vector<double> default_sweep_lags() { return {4, 6, 8, 10, 12, 14, 16, 18, 20}; }

namespace {

std::string format_lag(double lag) {
    std::ostringstream os;
    os << lag;
    return os.str();
}

SweepRow classify(const ParamCell& cell, const std::vector<double>& lags, const QuadratureSpec& quad) {
    SweepRow row;
    row.cell = cell;
    row.predicted = cell.predicted();
    row.lags = lags;
    row.slope_exponent = std::numeric_limits<double>::quiet_NaN();
    const PhiProfile phi = cell.profile();
    try {
        validate_profile(phi);
    } catch (const DomainError& e) {
        row.observed = Observed::Rejected;
        row.note = e.what();
        return row;
    }
    ModelParams prm;
    prm.alpha = cell.alpha;
    prm.dim = cell.dim;
    QuadratureSpec loose = quad;
    loose.rel_tol = std::min(1e-4, 100.0 * quad.rel_tol);
    loose.max_subdivisions = 5 * quad.max_subdivisions;
    bool finite = true;
    for (double lag : lags) {
        double r;
        try {
            r = convolution_ratio(phi, prm, lag, quad);
        } catch (const QuadratureError&) {
            try {
                r = convolution_ratio(phi, prm, lag, loose);
                row.note = "loosened quadrature at lag " + format_lag(lag);
            } catch (const QuadratureError& e) {
                row.observed = Observed::Inconclusive;
                row.note = "quadrature did not converge at lag " + format_lag(lag) + ": " + e.what();
                row.matches = row.predicted == Regime::Boundary;
                return row;
            }
        }
        row.ratios.push_back(r);
        finite = finite && std::isfinite(r);
    }
    row.max_ratio = *std::max_element(row.ratios.begin(), row.ratios.end());
    row.growth_factor = row.ratios.back() / row.ratios.front();
    bool increasing = true;
    for (std::size_t i = 1; i < row.ratios.size(); ++i) increasing = increasing && row.ratios[i] > row.ratios[i - 1];

    if (!finite || (increasing && row.growth_factor >= 10.0)) {
        row.observed = Observed::Fails;
    } else {
        // increments of the ratio per unit of ln(lag), placed at the geometric midpoints
        std::vector<double> mid, inc;
        for (std::size_t i = 0; i + 1 < lags.size(); ++i) {
            mid.push_back(std::sqrt(lags[i] * lags[i + 1]));
            inc.push_back((row.ratios[i + 1] - row.ratios[i]) / std::log(lags[i + 1] / lags[i]));
        }
        if (inc.back() <= 0.0) {
            row.observed = Observed::Holds;
        } else {
            std::vector<double> lx, ly;
            for (std::size_t i = inc.size() / 2; i < inc.size(); ++i) {
                if (inc[i] <= 0.0) continue;
                lx.push_back(std::log(mid[i]));
                ly.push_back(std::log(inc[i]));
            }
            if (lx.size() < 2) {
                row.observed = Observed::Inconclusive;
            } else {
                double sx = 0, sy = 0, sxx = 0, sxy = 0;
                const double n = static_cast<double>(lx.size());
                for (std::size_t i = 0; i < lx.size(); ++i) {
                    sx += lx[i];
                    sy += ly[i];
                    sxx += lx[i] * lx[i];
                    sxy += lx[i] * ly[i];
                }
                const double q = (n * sxy - sx * sy) / (n * sxx - sx * sx);
                row.slope_exponent = q;
                const double r_mid = row.ratios[row.ratios.size() / 2];
                if (q >= -0.15) row.observed = Observed::Fails;
                else if (q <= -0.3 && row.ratios.back() / r_mid <= 1.2) row.observed = Observed::Holds;
                else row.observed = Observed::Inconclusive;
            }
        }
    }
    switch (row.predicted) {
    case Regime::Holds: row.matches = row.observed == Observed::Holds; break;
    case Regime::Fails: row.matches = row.observed == Observed::Fails; break;
    case Regime::Boundary: row.matches = true; break;
    }
    return row;
}

} // namespace

std::vector<SweepRow> sweep_condition_c(const std::vector<ParamCell>& cells, const std::vector<double>& lags,
                                        const QuadratureSpec& quad) {
    if (lags.size() < 3) throw PreconditionError("the sweep needs at least three lags");
    for (std::size_t i = 0; i < lags.size(); ++i) {
        if (!(lags[i] > 2.0)) throw PreconditionError("lags must exceed 2");
        if (i > 0 && !(lags[i] > lags[i - 1])) throw PreconditionError("lags must increase");
    }
    std::vector<SweepRow> rows(cells.size());
    detail::parallel_for(cells.size(), [&](std::size_t i) { rows[i] = classify(cells[i], lags, quad); }, 1);
    return rows;
}

RemarkValues remark_closed_form(double x, const QuadratureSpec& quad) {
    if (!(x > 2.0)) throw DomainError("the closed form needs x > 2");
    auto f = [x](double z) { return std::exp(-(x - z)) / (x - z) * std::exp(-z) / z; };
    QuadratureSpec q = quad;
    q.rel_tol = std::min(quad.rel_tol, 1e-10);
    q.abs_tol = std::numeric_limits<double>::min();
    RemarkValues v;
    v.numeric = integrate(f, 1.0, x - 1.0, q);
    v.analytic = 2.0 * std::log1p(x - 2.0) * std::exp(-x) / x;
    v.rel_gap = std::abs(v.numeric - v.analytic) / v.analytic;
    return v;
}

double midpoint_lower_bound(const ParamCell& cell, double lag, const QuadratureSpec& quad) {
    if (!(lag > 4.0)) throw DomainError("midpoint lower bound needs lag > 4");
    const PhiProfile phi = cell.profile();
    const double p = cell.alpha + cell.dim;
    auto logk = [&](double s) { return log_phi(phi, s) - p * std::log(s); };
    const double ref = logk(lag);
    const double h = 0.5 * lag;
    // z = midpoint + (u, v) with u along y - x; |z-x| = |(h+u, v)|, |z-y| = |(h-u, v)|
    auto pair = [&](double u, double v) {
        return std::exp(logk(std::hypot(h + u, v)) + logk(std::hypot(h - u, v)) - ref);
    };
    QuadratureSpec q = quad;
    q.abs_tol = std::numeric_limits<double>::min();
    const std::vector<double> bp{0.0};
    switch (cell.dim) {
    case 1: return integrate([&](double u) { return pair(u, 0.0); }, -1.0, 1.0, q, bp);
    case 2:
        return integrate(
            [&](double u) {
                const double w = std::sqrt(std::max(0.0, 1.0 - u * u));
                return 2.0 * integrate([&](double v) { return pair(u, v); }, 0.0, w, q);
            },
            -1.0, 1.0, q, bp);
    case 3:
        return integrate(
            [&](double u) {
                const double w = std::sqrt(std::max(0.0, 1.0 - u * u));
                return integrate([&](double v) { return 2.0 * std::numbers::pi * v * pair(u, v); }, 0.0, w, q);
            },
            -1.0, 1.0, q, bp);
    default: throw PreconditionError("dimension must be 1, 2 or 3");
    }
}

} // namespace stabledom
