#include "stabledom/grid.hpp"

#include "stabledom/errors.hpp"

#include <algorithm>
#include <cmath>

namespace stabledom {

Grid Grid::centered(int dim, double half_width, double spacing) {
    if (dim < 1 || dim > 3) throw PreconditionError("grid dimension must be 1, 2 or 3");
    if (!(spacing > 0.0) || !(half_width >= spacing)) throw PreconditionError("grid needs spacing > 0 and half_width >= spacing");
    Grid g;
    g.dim = dim;
    g.spacing = spacing;
    const int n = static_cast<int>(std::floor(half_width / spacing + 1e-9));
    for (int a = 0; a < dim; ++a) {
        g.count[a] = 2 * n + 1;
        g.origin[a] = -n * spacing;
    }
    return g;
}

Grid Grid::aligned(int dim, double eps, double half_width, int cells_per_eps) {
    if (cells_per_eps < 4) throw PreconditionError("aligned grid needs at least 4 cells per eps");
    return centered(dim, half_width, eps / (cells_per_eps + 0.5));
}

double Grid::cell_volume() const { return std::pow(spacing, dim); }

std::array<int, 3> Grid::multi_index(std::size_t idx) const {
    std::array<int, 3> mi{0, 0, 0};
    mi[0] = static_cast<int>(idx % count[0]);
    idx /= count[0];
    mi[1] = static_cast<int>(idx % count[1]);
    mi[2] = static_cast<int>(idx / count[1]);
    return mi;
}

std::size_t Grid::flat_index(const std::array<int, 3>& mi) const {
    return static_cast<std::size_t>(mi[0]) + static_cast<std::size_t>(count[0]) * (mi[1] + static_cast<std::size_t>(count[1]) * mi[2]);
}

Point Grid::point(std::size_t idx) const {
    const auto mi = multi_index(idx);
    Point p{0.0, 0.0, 0.0};
    for (int a = 0; a < dim; ++a) p[a] = origin[a] + mi[a] * spacing;
    return p;
}

bool Grid::in_box(const Point& p) const {
    for (int a = 0; a < dim; ++a) {
        if (p[a] < lower_edge(a) || p[a] >= upper_edge(a)) return false;
    }
    return true;
}

std::size_t Grid::locate(const Point& p) const {
    if (!in_box(p)) throw PreconditionError("point lies outside the grid box");
    std::array<int, 3> mi{0, 0, 0};
    for (int a = 0; a < dim; ++a) {
        mi[a] = std::clamp(static_cast<int>(std::floor((p[a] - origin[a]) / spacing + 0.5)), 0, count[a] - 1);
    }
    return flat_index(mi);
}

double Grid::distance_to_boundary(std::size_t idx) const {
    const Point p = point(idx);
    double d = INFINITY;
    for (int a = 0; a < dim; ++a) d = std::min({d, p[a] - lower_edge(a), upper_edge(a) - p[a]});
    return d;
}

bool Grid::same_as(const Grid& o) const {
    if (dim != o.dim || spacing != o.spacing) return false;
    for (int a = 0; a < 3; ++a)
        if (count[a] != o.count[a] || origin[a] != o.origin[a]) return false;
    return true;
}

double Grid::margin_recommendation(const ModelParams& params, double t) {
    // jumps longer than r arrive at rate sigma_d M r^{-alpha} / alpha
    const double rate_coeff = t * unit_sphere_area(params.dim) * params.M / params.alpha;
    return std::pow(rate_coeff / -std::log(0.999), 1.0 / params.alpha);
}

} // namespace stabledom
