#pragma once

#include <array>
#include <cmath>
#include <numbers>

namespace stabledom {

/// Points live in R^dim with dim <= 3; unused trailing coordinates are kept at zero.
using Point = std::array<double, 3>;

inline double norm(const Point& p) { return std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]); }

inline double distance(const Point& a, const Point& b) {
    const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

inline Point operator+(const Point& a, const Point& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Point operator-(const Point& a, const Point& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Point operator*(double s, const Point& a) { return {s * a[0], s * a[1], s * a[2]}; }

/// Surface measure of the unit sphere in R^dim (counting measure {-1,+1} for dim = 1).
inline double unit_sphere_area(int dim) {
    switch (dim) {
    case 1: return 2.0;
    case 2: return 2.0 * std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi;
    default: return std::nan("");
    }
}

inline double unit_ball_volume(int dim) { return unit_sphere_area(dim) / dim; }

struct ModelParams {
    double alpha = 1.0;
    int dim = 1;
    double M = 1.0;
    double eps = 0.25;
    double eps0 = 1.0;

    /// Throws PreconditionError unless 0<alpha<2, 1<=dim<=3, M>0, 0<eps<=1, eps0>0.
    void validate() const;
};

} // namespace stabledom
