#pragma once

#include "stabledom/kernel.hpp"
#include "stabledom/quadrature.hpp"

#include <map>
#include <string>
#include <vector>

namespace stabledom {

enum class Verdict { Pass, Fail, Inconclusive };

std::string to_string(Verdict v);

/// Outcome of one sampled assumption check. The constants are empirical lower witnesses of the
/// existential constants, not optimal values.
struct AssumptionReport {
    std::string condition;  // A1a, A1b, A1c, A2, A3, A4
    Verdict verdict = Verdict::Inconclusive;
    double worst_ratio = 0.0;
    std::vector<double> worst_location;
    int samples_checked = 0;
    std::map<std::string, double> constants;
    std::string note;
    /// (sample coordinate, ratio) pairs, e.g. ratio(r) per lag for A1c.
    std::vector<std::pair<double, double>> trace;
};

/// sup phi(a)/phi(b) over |a-b| <= 1, sampled on [0, lag_max] with the given step.
AssumptionReport check_a1a(const PhiProfile& phi, double lag_max, double step);

/// sup over a > 1 of max(|phi'(a)|, |phi''(a)|) / phi(a), sampled on (1, lag_max].
AssumptionReport check_a1b(const PhiProfile& phi, double lag_max);

/// ratio(r) = int_{|x-z|>=1, |y-z|>=1} k(|y-z|) k(|z-x|) dz / k(r), k(s) = phi(s) s^{-alpha-d}, |x-y| = r.
AssumptionReport check_a1c(const JumpKernel& kernel, const std::vector<double>& lags, const QuadratureSpec& quad);

/// Increment symmetry f(x, x+h) = f(x, x-h), or the alpha < 1 branch.
AssumptionReport check_a2(const JumpKernel& kernel, const std::vector<Point>& xs, const std::vector<Point>& hs);

/// Argument symmetry f(x, y) = f(y, x).
AssumptionReport check_a3(const JumpKernel& kernel, const std::vector<Point>& xs, const std::vector<Point>& ys);

enum class TailWeight { One, InverseProfile };

/// b_radius(x) = int_{|y-x| > radius} w(|y-x|) f(x, y) dy with w = 1 or 1/phi.
double tail_mass(const JumpKernel& kernel, const Point& x, double radius, const QuadratureSpec& quad,
                 TailWeight weight = TailWeight::One);

/// inf_x int_{|y-x|>eps} f/phi * eps^alpha over the radii; also c5, c6 and the operational eps0.
AssumptionReport check_a4(const JumpKernel& kernel, const std::vector<double>& radii, const std::vector<Point>& xs,
                          const QuadratureSpec& quad = {});

} // namespace stabledom
