#pragma once

#include "stabledom/grid.hpp"
#include "stabledom/kernel.hpp"
#include "stabledom/quadrature.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace stabledom {

namespace detail {
struct FftPlan;
}

/// The truncated kernel f_eps on a lattice. values(x, y) is the mass of f_eps(x, .) over the cell
/// of y divided by h^d. A cell centred within eps of x carries no value; the part of such a cell
/// beyond eps is moved to the nearest lattice point farther out along the same ray.
/// Mass leaving the box is kept in out_of_box(x) and treated as an absorbing exterior state.
class GridKernel {
public:
    const JumpKernel& kernel() const { return kernel_; }
    const Grid& grid() const { return grid_; }
    bool translation_invariant() const { return ti_; }

    double value(std::size_t x, std::size_t y) const;
    /// values(x, .) as a dense vector over the grid.
    std::vector<double> row(std::size_t x) const;

    double b_eps(std::size_t x) const { return b_eps_[x]; }
    double b_bar() const { return b_bar_; }
    double b_low() const { return b_low_; }
    double atom_weight(std::size_t x) const { return b_bar_ - b_eps_[x]; }
    double out_of_box(std::size_t x) const { return out_of_box_[x]; }
    const std::vector<double>& b_eps_values() const { return b_eps_; }
    const std::vector<double>& out_of_box_values() const { return out_of_box_; }

    /// sum_y values(x, y) h^d.
    double row_mass(std::size_t x) const;
    /// max_x |row_mass + out_of_box - b_eps| / b_eps; only independent of the construction in d = 1.
    double max_row_defect() const { return max_row_defect_; }
    /// max over the checked points of out_of_box / b_bar.
    double max_tail_fraction() const { return max_tail_fraction_; }

    /// out(x) = sum_y values(x, y) v(y) h^d.
    void apply(const std::vector<double>& v, std::vector<double>& out) const;
    /// out(y) = sum_x r(x) values(x, y) h^d.
    void apply_transpose(const std::vector<double>& r, std::vector<double>& out) const;

    /// Translation-invariant storage: values on lattice offsets in [-(n_a-1), n_a-1] per axis.
    double offset_value(const std::array<int, 3>& off) const;

    /// Switch between direct summation and FFT convolution for translation-invariant kernels.
    void set_use_fft(bool on) { use_fft_ = on && ti_; }
    bool uses_fft() const { return use_fft_; }

private:
    friend GridKernel build_f_eps(const JumpKernel&, const Grid&, const QuadratureSpec&, double,
                                  const std::vector<std::size_t>&);
    GridKernel(const JumpKernel& k, const Grid& g) : kernel_(k), grid_(g) {}

    std::size_t offset_flat(const std::array<int, 3>& off) const;
    void correlate(const std::vector<double>& v, std::vector<double>& out, bool transpose) const;

    JumpKernel kernel_;
    Grid grid_;
    bool ti_ = false;
    bool use_fft_ = false;
    std::array<int, 3> offset_count_{1, 1, 1};
    std::vector<double> offsets_;
    std::vector<double> dense_;
    std::vector<double> b_eps_;
    std::vector<double> out_of_box_;
    double b_bar_ = 0.0;
    double b_low_ = 0.0;
    double max_row_defect_ = 0.0;
    double max_tail_fraction_ = 0.0;
    std::shared_ptr<detail::FftPlan> fft_;
};

/// Builds f_eps on the grid. The out-of-box share of b_bar at every point in `checked` (default:
/// the point nearest the origin) must stay below tail_cap, otherwise BoxTooSmallError.
/// Requires spacing <= eps/4.
GridKernel build_f_eps(const JumpKernel& kernel, const Grid& grid, const QuadratureSpec& quad = {},
                       double tail_cap = 0.05, const std::vector<std::size_t>& checked = {});

/// Integral of f over the cube of side h centred at c, minus the ball |z| <= eps about the origin.
double cell_integral(const std::function<double(const Point&)>& f, const Point& c, double h, double eps, int dim,
                     const QuadratureSpec& q);

/// Largest grid size accepted for kernels without translation invariance (dense storage).
inline constexpr std::size_t kDenseGridCap = 4096;

} // namespace stabledom
