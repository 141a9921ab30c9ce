#pragma once

#include <string>

namespace stabledom {

/// Volume of B(0, r1) ∩ B(c, r2) with |c| = center_dist, in dimension 1, 2 or 3 (closed forms).
double ball_intersection_volume(double center_dist, double r1, double r2, int dim);

struct VolumeEstimateReport {
    int n = 0;
    int dim = 0;
    double c_candidate = 0.0;
    /// max over admissible (p, k) of V / (k^{(d+1)/2} min(p+k, n-p)^{(d-1)/2}); the tight constant.
    double max_ratio = 0.0;
    int worst_p = 0;
    int worst_k = 0;
    int pairs_checked = 0;
    bool pass = false;
};

/// Checks V(B(x, p+k) ∩ B(y, n-p)) <= c k^{(d+1)/2} min(p+k, n-p)^{(d-1)/2} for |x-y| = n,
/// over all 1 <= p <= n-1 and integer 0 < k <= n-p.
VolumeEstimateReport verify_volumeest(int n, int dim, double c_candidate);

} // namespace stabledom
