#include "stabledom/simulator.hpp"

#include "parallel.hpp"
#include "stabledom/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace stabledom {

namespace {

std::size_t bin_count(const HistogramSpec& h) {
    return static_cast<std::size_t>(h.bins[0]) * h.bins[1] * h.bins[2];
}

double bin_width(const HistogramSpec& h, int axis) { return (h.upper[axis] - h.lower[axis]) / h.bins[axis]; }

/// Flat bin index of p, or -1 when p lies outside the histogram box.
long locate_bin(const HistogramSpec& h, int dim, const Point& p) {
    long idx = 0, stride = 1;
    for (int a = 0; a < dim; ++a) {
        if (!(p[a] >= h.lower[a] && p[a] < h.upper[a])) return -1;
        const int b = std::min(h.bins[a] - 1, static_cast<int>((p[a] - h.lower[a]) / bin_width(h, a)));
        idx += stride * b;
        stride *= h.bins[a];
    }
    return idx;
}

HistogramSpec snapped(const Grid& grid, const std::array<int, 3>& lo_cell, const std::array<int, 3>& hi_cell,
                      int cells_per_bin) {
    HistogramSpec h;
    for (int a = 0; a < grid.dim; ++a) {
        const int cells = hi_cell[a] - lo_cell[a];
        const int bins = cells / cells_per_bin;
        if (bins < 1) throw PreconditionError("histogram window holds less than one bin");
        h.bins[a] = bins;
        h.lower[a] = grid.lower_edge(a) + lo_cell[a] * grid.spacing;
        h.upper[a] = h.lower[a] + bins * cells_per_bin * grid.spacing;
    }
    return h;
}

} // namespace

HistogramSpec HistogramSpec::from_grid(const Grid& grid, int cells_per_bin) {
    if (cells_per_bin < 1) throw PreconditionError("cells_per_bin must be at least 1");
    return snapped(grid, {0, 0, 0}, grid.count, cells_per_bin);
}

HistogramSpec HistogramSpec::from_grid_window(const Grid& grid, double half_width, int cells_per_bin) {
    if (cells_per_bin < 1) throw PreconditionError("cells_per_bin must be at least 1");
    std::array<int, 3> lo{0, 0, 0}, hi{1, 1, 1};
    for (int a = 0; a < grid.dim; ++a) {
        const double h = grid.spacing;
        lo[a] = std::clamp(static_cast<int>(std::floor((-half_width - grid.lower_edge(a)) / h)), 0, grid.count[a]);
        hi[a] = std::clamp(static_cast<int>(std::ceil((half_width - grid.lower_edge(a)) / h)), 0, grid.count[a]);
        // grow symmetrically to a whole number of bins
        while ((hi[a] - lo[a]) % cells_per_bin != 0) {
            if (hi[a] < grid.count[a]) ++hi[a];
            else if (lo[a] > 0) --lo[a];
            else break;
        }
    }
    return snapped(grid, lo, hi, cells_per_bin);
}

double EmpiricalDensity::total_mass() const {
    double s = atom_estimate + outside_mass;
    for (const auto& b : bins) s += b.mass;
    return s;
}

double open_uniform(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

double dominating_radius(double eps, double alpha, double u) {
    if (!(u > 0.0 && u < 1.0)) throw DomainError("uniform variate must lie in (0, 1)");
    return eps * std::pow(u, -1.0 / alpha);
}

double dominating_rate(const ModelParams& params) {
    return unit_sphere_area(params.dim) * params.M * std::pow(params.eps, -params.alpha) / params.alpha;
}

Point sample_dominating_jump(const ModelParams& params, std::mt19937_64& rng) {
    const double r = dominating_radius(params.eps, params.alpha, open_uniform(rng));
    switch (params.dim) {
    case 1: return {open_uniform(rng) < 0.5 ? -r : r, 0.0, 0.0};
    case 2: {
        const double th = 2.0 * std::numbers::pi * open_uniform(rng);
        return {r * std::cos(th), r * std::sin(th), 0.0};
    }
    default: {
        const double z = 2.0 * open_uniform(rng) - 1.0;
        const double ph = 2.0 * std::numbers::pi * open_uniform(rng);
        const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
        return {r * s * std::cos(ph), r * s * std::sin(ph), r * z};
    }
    }
}

EmpiricalDensity simulate_paths(const SimConfig& cfg) {
    ModelParams params = cfg.kernel.params();
    params.eps = cfg.eps;
    params.validate();
    if (cfg.n_paths < 1) throw PreconditionError("n_paths must be at least 1");
    if (!(cfg.t_horizon > 0.0)) throw PreconditionError("t_horizon must be positive");
    const int dim = params.dim;
    const HistogramSpec& hs = cfg.histogram;
    for (int a = 0; a < dim; ++a)
        if (!(hs.upper[a] > hs.lower[a]) || hs.bins[a] < 1) throw PreconditionError("histogram box is empty");
    const JumpKernel kernel = cfg.kernel.with_eps(cfg.eps);

    Point mid{0.0, 0.0, 0.0};
    double safety = 0.0;
    for (int a = 0; a < dim; ++a) {
        mid[a] = 0.5 * (hs.lower[a] + hs.upper[a]);
        safety = std::max(safety, cfg.safety_factor * 0.5 * (hs.upper[a] - hs.lower[a]));
    }
    const double rate = dominating_rate(params);
    const std::size_t nb = bin_count(hs);

    constexpr std::size_t kBlock = 4096;
    const std::size_t blocks = (cfg.n_paths + kBlock - 1) / kBlock;
    struct Tally {
        std::vector<std::uint64_t> counts;
        std::uint64_t atom = 0, outside = 0, overflow = 0, proposals = 0, accepted = 0;
    };
    std::vector<Tally> tallies(blocks);
    detail::parallel_for(blocks, [&](std::size_t b) {
        Tally& tl = tallies[b];
        tl.counts.assign(nb, 0);
        const std::size_t first = b * kBlock, last = std::min(cfg.n_paths, first + kBlock);
        for (std::size_t path = first; path < last; ++path) {
            std::seed_seq sseq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                               static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)};
            std::mt19937_64 rng(sseq);
            Point pos = cfg.x0;
            double clock = 0.0;
            std::uint64_t jumps = 0;
            bool overflow = false;
            while (true) {
                clock += -std::log(open_uniform(rng)) / rate;
                if (clock > cfg.t_horizon) break;
                const Point h = sample_dominating_jump(params, rng);
                ++tl.proposals;
                const Point target = pos + h;
                const double accept = kernel(pos, target) / kernel.stable_envelope(norm(h));
                if (open_uniform(rng) < accept) {
                    pos = target;
                    ++jumps;
                    if (distance(pos, mid) > safety) {
                        overflow = true;
                        break;
                    }
                }
            }
            tl.accepted += jumps;
            if (jumps == 0) {
                ++tl.atom;
                continue;
            }
            if (overflow) {
                ++tl.overflow;
                ++tl.outside;
                continue;
            }
            const long bi = locate_bin(hs, dim, pos);
            if (bi < 0) ++tl.outside;
            else ++tl.counts[static_cast<std::size_t>(bi)];
        }
    }, 1);

    EmpiricalDensity emp;
    emp.eps = cfg.eps;
    emp.t = cfg.t_horizon;
    emp.x0 = cfg.x0;
    emp.dim = dim;
    emp.n_paths = cfg.n_paths;
    emp.histogram = hs;
    std::vector<std::uint64_t> counts(nb, 0);
    std::uint64_t atom = 0, outside = 0;
    for (const auto& tl : tallies) {
        for (std::size_t i = 0; i < nb; ++i) counts[i] += tl.counts[i];
        atom += tl.atom;
        outside += tl.outside;
        emp.overflow_paths += tl.overflow;
        emp.proposals += tl.proposals;
        emp.accepted += tl.accepted;
    }
    const double n = static_cast<double>(cfg.n_paths);
    double vol = 1.0;
    for (int a = 0; a < dim; ++a) vol *= bin_width(hs, a);
    emp.bins.resize(nb);
    for (std::size_t i = 0; i < nb; ++i) {
        EmpiricalBin& bin = emp.bins[i];
        std::size_t rest = i;
        for (int a = 0; a < dim; ++a) {
            const std::size_t k = rest % hs.bins[a];
            rest /= hs.bins[a];
            bin.center[a] = hs.lower[a] + (k + 0.5) * bin_width(hs, a);
        }
        bin.volume = vol;
        bin.count = counts[i];
        bin.mass = counts[i] / n;
        bin.std_error = std::sqrt(bin.mass * (1.0 - bin.mass) / n);
    }
    emp.atom_estimate = atom / n;
    emp.atom_std_error = std::sqrt(emp.atom_estimate * (1.0 - emp.atom_estimate) / n);
    emp.outside_mass = outside / n;
    return emp;
}

SeriesComparison compare_to_series(const EmpiricalDensity& emp, const DensityResult& dres) {
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); };
    if (!close(emp.eps, dres.eps)) throw ConfigurationError("simulation and series use different eps");
    if (!close(emp.t, dres.t)) throw ConfigurationError("simulation and series use different t");
    if (distance(emp.x0, dres.x) > 1e-9) throw ConfigurationError("simulation and series start at different points");
    if (emp.dim != dres.grid.dim) throw ConfigurationError("simulation and series differ in dimension");

    const HistogramSpec& hs = emp.histogram;
    const Grid& g = dres.grid;
    const int dim = g.dim;
    const double h = g.spacing;
    SeriesComparison cmp;
    cmp.expected_mass.assign(emp.bins.size(), 0.0);
    for (std::size_t c = 0; c < g.size(); ++c) {
        if (dres.q[c] == 0.0) continue;
        const Point p = g.point(c);
        // overlaps of the cell with the bins, axis by axis
        std::array<std::vector<std::pair<int, double>>, 3> parts;
        bool empty = false;
        for (int a = 0; a < dim && !empty; ++a) {
            const double lo = p[a] - 0.5 * h, hi = p[a] + 0.5 * h, w = bin_width(hs, a);
            const int b0 = std::max(0, static_cast<int>(std::floor((lo - hs.lower[a]) / w)));
            const int b1 = std::min(hs.bins[a] - 1, static_cast<int>(std::floor((hi - hs.lower[a]) / w)));
            for (int b = b0; b <= b1; ++b) {
                const double ov = std::min(hi, hs.lower[a] + (b + 1) * w) - std::max(lo, hs.lower[a] + b * w);
                if (ov > 1e-12 * h) parts[a].push_back({b, ov / h});
            }
            empty = parts[a].empty();
        }
        if (empty) continue;
        for (int a = dim; a < 3; ++a) parts[a] = {{0, 1.0}};
        const double m = dres.q[c] * g.cell_volume();
        for (const auto& [i0, f0] : parts[0])
            for (const auto& [i1, f1] : parts[1])
                for (const auto& [i2, f2] : parts[2])
                    cmp.expected_mass[i0 + static_cast<std::size_t>(hs.bins[0]) * (i1 + static_cast<std::size_t>(hs.bins[1]) * i2)] +=
                        m * f0 * f1 * f2;
    }
    const double n = static_cast<double>(emp.n_paths);
    std::size_t within = 0;
    double max_expected_count = 0.0;
    for (std::size_t i = 0; i < emp.bins.size(); ++i) {
        const double p = cmp.expected_mass[i];
        max_expected_count = std::max(max_expected_count, p * n);
        if (emp.bins[i].count == 0) continue;
        ++cmp.occupied_bins;
        const double sd = std::sqrt(p * (1.0 - p) / n);
        const double diff = emp.bins[i].mass - p;
        const double z = sd > 0.0 ? diff / sd : std::numeric_limits<double>::infinity();
        cmp.z_scores.push_back(z);
        cmp.max_abs_z = std::max(cmp.max_abs_z, std::abs(z));
        if (std::abs(z) <= 3.0) ++within;
    }
    cmp.fraction_within_3sigma = cmp.occupied_bins ? static_cast<double>(within) / cmp.occupied_bins : 0.0;
    const double atom_sd = std::sqrt(dres.atom * (1.0 - dres.atom) / n);
    cmp.atom_z = atom_sd > 0.0 ? (emp.atom_estimate - dres.atom) / atom_sd : 0.0;

    if (emp.n_paths < 1000 || max_expected_count < 100.0) {
        cmp.verdict = Verdict::Inconclusive;
        cmp.note = "too few paths for a meaningful comparison";
        return cmp;
    }
    const bool ok = cmp.fraction_within_3sigma >= 0.99 && std::abs(cmp.atom_z) <= 3.0;
    cmp.verdict = ok ? Verdict::Pass : Verdict::Fail;
    return cmp;
}

} // namespace stabledom
