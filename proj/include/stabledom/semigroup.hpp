#pragma once

#include "stabledom/iterated.hpp"

#include <vector>

namespace stabledom {

/// A bounded function on the lattice together with its constant value on the exterior of the box.
/// The exterior is an absorbing state: mass that jumps out keeps the value `exterior`.
struct GridFunction {
    std::vector<double> values;
    double exterior = 0.0;

    double sup_norm() const;
};

/// Gamma_eps v / b_bar on the lattice with the absorbing exterior.
GridFunction gamma_apply_normalized(const GridKernel& gk, const GridFunction& v);

/// Smallest N with P(Poisson(rate) > N) * scale <= tol.
int poisson_truncation(double rate, double scale, double tol);
/// P(Poisson(rate) > n).
double poisson_tail(double rate, int n);
/// e^{-rate} rate^n / n! for n = 0..N.
std::vector<double> poisson_weights(double rate, int N);

struct ExpmResult {
    GridFunction value;
    int truncation_N = 0;
    /// P(Poisson(t b_bar) > N) * sup|phi|, a rigorous bound on the dropped series tail.
    double truncation_bound = 0.0;
};

/// e^{t A_eps} phi = e^{-t b_bar} sum_n t^n Gamma^n phi / n!, truncated once the Poisson tail times
/// sup|phi| is at most tol.
ExpmResult expm_apply(const GridKernel& gk, const GridFunction& phi, double t, double tol);
ExpmResult expm_apply(const IteratedKernels& ik, const GridFunction& phi, double t, double tol);

struct DensityResult {
    double t = 0.0;
    double eps = 0.0;
    double alpha = 0.0;
    std::size_t source = 0;
    Point x{0.0, 0.0, 0.0};
    Grid grid;
    /// Continuous part q_eps(t, x, y) on the lattice.
    std::vector<double> q;
    /// e^{-t b_eps(x)}, the probability of no jump.
    double atom = 0.0;
    /// b_eps at the source.
    double b_source = 0.0;
    /// Mass that left the box before t.
    double exterior_mass = 0.0;
    int truncation_N = 0;
    double truncation_bound = 0.0;

    /// sum_y q(y) h^d + exterior_mass + atom.
    double total_mass() const;
};

/// q(y) = e^{-t b_bar} sum_{n>=1} t^n f_n(x, y) / n!, extending ik to the levels needed.
/// x must be one of the sources of ik.
DensityResult density_p_eps(IteratedKernels& ik, double t, std::size_t x, double tol);

} // namespace stabledom
