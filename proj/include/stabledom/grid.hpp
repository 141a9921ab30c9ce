#pragma once

#include "stabledom/params.hpp"

#include <array>
#include <cstddef>

namespace stabledom {

/// Regular lattice origin + i*spacing, i in [0, count) per axis. Each point owns the cell
/// [p - h/2, p + h/2]^dim; the box is the union of the cells.
struct Grid {
    int dim = 1;
    std::array<int, 3> count{1, 1, 1};
    std::array<double, 3> origin{0.0, 0.0, 0.0};
    double spacing = 0.1;

    /// Lattice symmetric about 0 containing 0, with points out to +-half_width on every axis.
    static Grid centered(int dim, double half_width, double spacing);

    /// Centered lattice whose spacing puts eps on a cell boundary: spacing = eps / (cells_per_eps + 1/2).
    /// In one dimension this leaves no cell cut by the truncation sphere.
    static Grid aligned(int dim, double eps, double half_width, int cells_per_eps = 4);

    std::size_t size() const { return static_cast<std::size_t>(count[0]) * count[1] * count[2]; }
    double cell_volume() const;

    std::array<int, 3> multi_index(std::size_t idx) const;
    std::size_t flat_index(const std::array<int, 3>& mi) const;
    Point point(std::size_t idx) const;

    /// Lower and upper box edges per axis (half a cell outside the extreme points).
    double lower_edge(int axis) const { return origin[axis] - 0.5 * spacing; }
    double upper_edge(int axis) const { return origin[axis] + (count[axis] - 0.5) * spacing; }

    /// Index of the lattice point whose cell contains p; throws PreconditionError outside the box.
    std::size_t locate(const Point& p) const;
    bool in_box(const Point& p) const;

    /// Smallest distance from the lattice point idx to the box boundary.
    double distance_to_boundary(std::size_t idx) const;

    bool same_as(const Grid& other) const;

    /// Radius r with P(no dominating jump longer than r before time t) = 0.999, a margin suggestion.
    static double margin_recommendation(const ModelParams& params, double t);
};

} // namespace stabledom
