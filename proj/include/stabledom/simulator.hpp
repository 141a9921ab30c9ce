#pragma once

#include "stabledom/assumptions.hpp"
#include "stabledom/kernel.hpp"
#include "stabledom/semigroup.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace stabledom {

/// Regular histogram over the box [lower, upper] with `bins` cells per axis (unused axes: 1 bin).
struct HistogramSpec {
    Point lower{0.0, 0.0, 0.0};
    Point upper{0.0, 0.0, 0.0};
    std::array<int, 3> bins{1, 1, 1};

    /// Bins made of `cells_per_bin` consecutive lattice cells covering the grid box.
    static HistogramSpec from_grid(const Grid& grid, int cells_per_bin);
    /// Bins made of lattice cells covering only [-half_width, half_width]^d (snapped to cell edges).
    static HistogramSpec from_grid_window(const Grid& grid, double half_width, int cells_per_bin);
};

struct SimConfig {
    JumpKernel kernel;
    double eps = 0.25;
    double t_horizon = 1.0;
    std::size_t n_paths = 1000;
    std::uint64_t seed = 0;
    Point x0{0.0, 0.0, 0.0};
    HistogramSpec histogram;
    /// Paths farther than this factor times the histogram box (about its centre) stop in the overflow bin.
    double safety_factor = 100.0;
};

struct EmpiricalBin {
    Point center{0.0, 0.0, 0.0};
    double volume = 0.0;
    std::uint64_t count = 0;
    double mass = 0.0;
    double std_error = 0.0;
};

struct EmpiricalDensity {
    double eps = 0.0;
    double t = 0.0;
    Point x0{0.0, 0.0, 0.0};
    int dim = 1;
    std::size_t n_paths = 0;
    HistogramSpec histogram;
    std::vector<EmpiricalBin> bins;
    /// Fraction of paths without an accepted jump.
    double atom_estimate = 0.0;
    double atom_std_error = 0.0;
    /// Paths that jumped at least once and ended outside the histogram, overflow included.
    double outside_mass = 0.0;
    std::uint64_t overflow_paths = 0;
    std::uint64_t proposals = 0;
    std::uint64_t accepted = 0;

    /// Sum of bin masses + outside_mass + atom_estimate; equals 1 up to rounding.
    double total_mass() const;
};

/// Uniform on the open interval (0, 1) from 53 random bits.
double open_uniform(std::mt19937_64& rng);

/// eps * u^{-1/alpha}: inverse of the tail distribution (eps/r)^alpha.
double dominating_radius(double eps, double alpha, double u);

/// Draw from M |h|^{-alpha-d} restricted to |h| > eps, normalised.
Point sample_dominating_jump(const ModelParams& params, std::mt19937_64& rng);

/// Total rate sigma_d M eps^{-alpha} / alpha of the dominating proposals.
double dominating_rate(const ModelParams& params);

/// Exact simulation by thinning; path i draws from its own generator seeded by (seed, i).
EmpiricalDensity simulate_paths(const SimConfig& cfg);

struct SeriesComparison {
    Verdict verdict = Verdict::Inconclusive;
    std::vector<double> z_scores;  // per occupied bin
    std::vector<double> expected_mass;
    double max_abs_z = 0.0;
    double fraction_within_3sigma = 0.0;
    std::size_t occupied_bins = 0;
    double atom_z = 0.0;
    std::string note;
};

/// Per-bin z-scores of the empirical masses against the series masses int_bin q.
/// Throws ConfigurationError when eps, t or the source differ.
SeriesComparison compare_to_series(const EmpiricalDensity& emp, const DensityResult& dres);

} // namespace stabledom
