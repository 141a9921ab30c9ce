#pragma once

#include "stabledom/grid_kernel.hpp"

#include <memory>
#include <vector>

namespace stabledom {

/// Mass bookkeeping of one level and one source in units of b_bar^n:
/// in_box + leaked should equal 1 - a^n with a = atom_weight(x) / b_bar.
struct MassCertificate {
    int level = 0;
    std::size_t source = 0;
    double in_box = 0.0;
    double leaked = 0.0;
    double expected = 0.0;
    double rel_error = 0.0;
};

/// Rows f_{n,eps}(x, .) for a fixed set of source points, stored as g_n = f_n / b_bar^n so that
/// high levels neither overflow nor underflow. Mass that jumps out of the box is carried as a leak
/// lambda_n, the share of b_bar^n sitting in the absorbing exterior state.
class IteratedKernels {
public:
    /// Sources are grid indices; the default is the point nearest the origin.
    explicit IteratedKernels(std::shared_ptr<const GridKernel> base, std::vector<std::size_t> sources = {});

    const GridKernel& base() const { return *base_; }
    std::shared_ptr<const GridKernel> base_ptr() const { return base_; }
    const std::vector<std::size_t>& sources() const { return sources_; }
    /// Position of a grid index in sources(); throws PreconditionError when absent.
    std::size_t slot_of(std::size_t grid_index) const;

    int levels() const { return static_cast<int>(rows_.size()); }
    /// g_n(y) = f_{n,eps}(x, y) / b_bar^n for the source in the given slot, n >= 1.
    const std::vector<double>& normalized_row(int n, std::size_t slot) const;
    /// lambda_n for the source in the given slot.
    double leak(int n, std::size_t slot) const;
    /// f_{n,eps}(x, y); overflows to inf for large n b_bar.
    double value(int n, std::size_t slot, std::size_t y) const;
    /// a = (b_bar - b_eps(x)) / b_bar for the source in the given slot.
    double atom_ratio(std::size_t slot) const;

    const std::vector<MassCertificate>& certificates() const { return certificates_; }
    double max_certificate_error() const;

    /// Largest number of stored doubles before extend_to refuses to grow.
    void set_memory_budget(std::size_t doubles) { budget_ = doubles; }
    std::size_t memory_budget() const { return budget_; }

    /// Computes levels up to n by the three-term recursion. Throws MassCertificateError when a
    /// certificate is off by more than cert_tol, PreconditionError when the budget would be exceeded.
    void extend_to(int n, double cert_tol = 1e-4);

private:
    std::shared_ptr<const GridKernel> base_;
    std::vector<std::size_t> sources_;
    std::vector<std::vector<std::vector<double>>> rows_;  // [level-1][slot][y]
    std::vector<std::vector<double>> leaks_;               // [level-1][slot]
    std::vector<MassCertificate> certificates_;
    std::size_t budget_ = std::size_t{200} * 1000 * 1000;
};

/// Returns a copy of ik with levels up to `up_to`.
IteratedKernels iterate_kernel(IteratedKernels ik, int up_to, double cert_tol = 1e-4);

/// Gamma^n phi(x) = int phi(z) f_n(x, z) dz + (b_bar - b_eps(x))^n phi(x), with the leaked mass
/// evaluated at the exterior value phi_exterior. x must be one of the sources.
double gamma_power_apply(const IteratedKernels& ik, const std::vector<double>& phi, double phi_exterior, int n,
                         std::size_t x);

/// Same quantity divided by b_bar^n.
double gamma_power_apply_normalized(const IteratedKernels& ik, const std::vector<double>& phi, double phi_exterior,
                                    int n, std::size_t x);

} // namespace stabledom
