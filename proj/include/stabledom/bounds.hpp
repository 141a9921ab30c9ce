#pragma once

#include "stabledom/assumptions.hpp"
#include "stabledom/iterated.hpp"
#include "stabledom/semigroup.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace stabledom {

/// Empirically extracted constants (c7..c15, C1, C2, kappa) with a provenance note each.
/// They are minimal witnesses over the sampled set, not the existential optimum.
struct BoundConstants {
    std::map<std::string, double> values;
    std::map<std::string, std::string> provenance;

    void set(const std::string& tag, double value, std::string note);
    std::optional<double> get(const std::string& tag) const;
};

struct BoundReport {
    std::string target;
    std::size_t samples = 0;
    /// Largest observed LHS / RHS.
    double max_ratio = 0.0;
    std::map<std::string, double> fitted;
    Verdict verdict = Verdict::Inconclusive;
    std::string note;
    /// The supremum sits in the outer 30% between source and box edge, so the true sup may lie outside.
    bool sup_on_boundary = false;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> table;
};

struct EintlSample {
    Point x{0.0, 0.0, 0.0};
    Point y{0.0, 0.0, 0.0};
    double eps = 0.25;
};

/// Part 1: int_{B(y, kappa|y-x|)} |z-x|^{-alpha-d} f_eps(y,z) dz <= (b_eps(y) + c7) |y-x|^{-alpha-d}.
/// Part 2: int_{B(y,1)} phi(|z-x|) |z-x|^{-alpha-d} f_eps(y,z) dz <= (b_eps(y) + c8) phi(|y-x|) |y-x|^{-alpha-d},
/// for |x-y| > 2. Reports the minimal admissible constant per sample; with a constant supplied in
/// consts the inequality is checked against it as well.
BoundReport verify_eintl(const JumpKernel& kernel, int part, const std::vector<EintlSample>& samples, double kappa,
                         const BoundConstants& consts = {}, const QuadratureSpec& quad = {});

/// verify_eintl part 1 for each kappa.
std::vector<BoundReport> kappa_sensitivity(const JumpKernel& kernel, const std::vector<EintlSample>& samples,
                                           const std::vector<double>& kappas = {0.1, 0.25, 0.4},
                                           const QuadratureSpec& quad = {});

/// R(n) = sup_{y != x} f_n(x,y) / w(y) over the sources of ik, with w the cell average of
/// |z-x|^{-alpha-d} (part 1) or phi(|z-x|) |z-x|^{-alpha-d} (part 2). Fits R(n) <= c n (b_bar + c')^{n-1}.
/// Extends ik to n_max levels.
BoundReport verify_estimate1(IteratedKernels& ik, int part, int n_max, const QuadratureSpec& quad = {});

struct Estimate23Report {
    BoundReport estimate2;
    BoundReport estimate3;
};

/// Estimate2: f_n(x,y) <= c12 b_bar^{d/alpha} (b_bar^n - (b_bar - b_eps(x))^n).
/// Estimate3: log-log slope of S(n) = sup_y f_n(x,y) / (b_bar + c15)^n over n in [n_max/2, n_max]
/// must equal -d/alpha within slope_tol.
Estimate23Report verify_estimate2_3(IteratedKernels& ik, int n_max, const QuadratureSpec& quad = {},
                                    double slope_tol = 0.3);

/// min(t^{-d/alpha}, t phi(r) r^{-alpha-d}), the two-regime heat kernel envelope at distance r > 0.
double maint_envelope(double t, double r, double alpha, int dim, const PhiProfile& phi);

/// Sup over lattice y != x of q(t,x,y) / min(t^{-d/alpha}, t phi(|y-x|) |y-x|^{-alpha-d}).
/// The atom is checked separately against e^{-t b_eps(x)}. With C1, C2 in consts the sup must not
/// exceed C1 e^{C2 t}.
BoundReport verify_maint(const DensityResult& dres, const PhiProfile& phi, const BoundConstants& consts = {});

struct MainTStudySpec {
    std::vector<double> ts{0.25, 0.5, 1.0};
    double eps = 0.2;
    double half_width = 100.0;
    int cells_per_eps = 4;
    /// Finer lattice for the refinement comparison.
    int cells_per_eps_fine = 9;
    double tol = 1e-10;
    /// Allowed relative change of the sup ratio under eps halving and grid refinement.
    double stability = 0.2;
};

struct MainTStudy {
    /// Per t: sup ratio at (eps, h), (eps/2, h), (eps, fine h).
    std::vector<double> ts;
    std::vector<double> sup_base, sup_half_eps, sup_fine_grid;
    std::vector<bool> on_boundary;
    double C1 = 0.0;
    double C2 = 0.0;
    double max_eps_change = 0.0;
    double max_grid_change = 0.0;
    bool finite = false;
    Verdict verdict = Verdict::Inconclusive;
    std::string note;
};

/// Runs the density at every t on three lattices, fits log sup = log C1 + C2 t by least squares on
/// the base lattice and checks finiteness, C2 >= 0 and stability.
MainTStudy maint_study(const JumpKernel& kernel, const MainTStudySpec& spec);

} // namespace stabledom
