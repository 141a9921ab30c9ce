#include "stabledom/ball_volume.hpp"

#include "stabledom/errors.hpp"
#include "stabledom/params.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace stabledom {

double ball_intersection_volume(double center_dist, double r1, double r2, int dim) {
    if (!(r1 > 0.0) || !(r2 > 0.0)) throw PreconditionError("ball radii must be positive");
    if (!(center_dist >= 0.0)) throw PreconditionError("center distance must be nonnegative");
    if (dim < 1 || dim > 3) throw PreconditionError("dimension must be 1, 2 or 3");
    const double d = center_dist;
    if (d >= r1 + r2) return 0.0;
    const double rmin = std::min(r1, r2), rmax = std::max(r1, r2);
    if (d + rmin <= rmax) return unit_ball_volume(dim) * std::pow(rmin, dim);

    switch (dim) {
    case 1:
        return std::min(r1, d + r2) - std::max(-r1, d - r2);
    case 2: {
        const double a1 = std::clamp((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1), -1.0, 1.0);
        const double a2 = std::clamp((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2), -1.0, 1.0);
        const double k = (-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2);
        return r1 * r1 * std::acos(a1) + r2 * r2 * std::acos(a2) - 0.5 * std::sqrt(std::max(0.0, k));
    }
    default: {
        const double s = r1 + r2 - d;
        return std::numbers::pi * s * s *
               (d * d + 2.0 * d * r2 - 3.0 * r2 * r2 + 2.0 * d * r1 + 6.0 * r1 * r2 - 3.0 * r1 * r1) / (12.0 * d);
    }
    }
}

VolumeEstimateReport verify_volumeest(int n, int dim, double c_candidate) {
    if (n < 4) throw PreconditionError("verify_volumeest needs n >= 4");
    if (!(c_candidate > 0.0)) throw PreconditionError("c_candidate must be positive");
    VolumeEstimateReport rep;
    rep.n = n;
    rep.dim = dim;
    rep.c_candidate = c_candidate;
    for (int p = 1; p <= n - 1; ++p) {
        for (int k = 1; k <= n - p; ++k) {
            const double v = ball_intersection_volume(n, p + k, n - p, dim);
            const double scale = std::pow(k, 0.5 * (dim + 1)) * std::pow(std::min(p + k, n - p), 0.5 * (dim - 1));
            const double ratio = v / scale;
            ++rep.pairs_checked;
            if (ratio > rep.max_ratio) {
                rep.max_ratio = ratio;
                rep.worst_p = p;
                rep.worst_k = k;
            }
        }
    }
    rep.pass = rep.max_ratio <= c_candidate;
    return rep;
}

} // namespace stabledom
