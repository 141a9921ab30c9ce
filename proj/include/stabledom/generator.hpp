#pragma once

#include "stabledom/assumptions.hpp"
#include "stabledom/kernel.hpp"
#include "stabledom/quadrature.hpp"

#include <functional>
#include <vector>

namespace stabledom {

/// A twice differentiable test function vanishing outside the ball B(center, support_radius).
struct TestFunction {
    std::function<double(const Point&)> f;
    Point center{0.0, 0.0, 0.0};
    double support_radius = 1.0;

    double operator()(const Point& y) const { return f(y); }
};

/// exp(1 - 1 / (1 - |y-c|^2 / R^2)) inside the ball, 0 outside; equals 1 at the centre.
TestFunction smooth_bump(const Point& center, double radius);

/// A_eps phi(x) = int_{|h| > eps} (phi(x+h) - phi(x)) f(x, x+h) dh. eps_probe = 0 gives the full
/// generator as a principal value, pairing h with -h. With alpha >= 1 the kernel must have
/// symmetric increments, otherwise PreconditionError.
double generator_apply(const JumpKernel& kernel, const TestFunction& phi, const Point& x, double eps_probe,
                       const QuadratureSpec& quad = {});

struct GeneratorConvergenceReport {
    std::vector<double> eps;
    /// sup over the probes of |A phi - A_eps phi| per eps.
    std::vector<double> gaps;
    /// gaps[k+1] / gaps[k].
    std::vector<double> ratios;
    bool monotone = false;
    double worst_ratio = 0.0;
    Verdict verdict = Verdict::Inconclusive;
};

/// Sup-norm gaps along a decreasing eps sequence; passes when the gaps decrease monotonically with
/// every ratio at most max_ratio.
GeneratorConvergenceReport generator_convergence(const JumpKernel& kernel, const TestFunction& phi,
                                                 const std::vector<double>& eps, const std::vector<Point>& probes,
                                                 const QuadratureSpec& quad = {}, double max_ratio = 0.8);

} // namespace stabledom
