#pragma once

#include "stabledom/params.hpp"
#include "stabledom/profile.hpp"

#include <functional>
#include <string>
#include <vector>

namespace stabledom {

struct KernelFlags {
    bool translation_invariant = true;
    bool symmetric_in_increment = true;  // f(x, x+h) = f(x, x-h)
    bool symmetric_in_arguments = true;  // f(x, y) = f(y, x)
};

/// Jump intensity f(x, y) on R^d, dominated by M phi(|y-x|) |y-x|^{-alpha-d}.
class JumpKernel {
public:
    using Intensity = std::function<double(const Point& x, const Point& y)>;
    /// Optional radial form g(r) for kernels with f(x, y) = g(|y - x|).
    using Radial = std::function<double(double r)>;

    /// The canonical kernel M phi(|y-x|) |y-x|^{-alpha-d}.
    static JumpKernel saturated(const ModelParams& params, const PhiProfile& phi);

    /// A user intensity. Its symmetry flags are declared, not verified; see check_a2/check_a3.
    static JumpKernel custom(const ModelParams& params, const PhiProfile& phi, Intensity intensity, KernelFlags flags,
                             std::string label, Radial radial = {});

    double operator()(const Point& x, const Point& y) const;

    /// M phi(r) r^{-alpha-d}.
    double dominating(double r) const;
    /// ln of dominating(r); finite where dominating underflows.
    double log_dominating(double r) const;
    /// M r^{-alpha-d}, the pure-stable envelope used for thinning.
    double stable_envelope(double r) const;

    bool saturated_kernel() const { return saturated_; }
    bool has_radial() const { return static_cast<bool>(radial_); }
    double radial(double r) const { return radial_(r); }

    const ModelParams& params() const { return params_; }
    const PhiProfile& phi() const { return phi_; }
    const KernelFlags& flags() const { return flags_; }
    const std::string& label() const { return label_; }

    /// Same intensity with a different truncation level.
    JumpKernel with_eps(double eps) const;

private:
    JumpKernel() = default;

    ModelParams params_;
    PhiProfile phi_;
    Intensity intensity_;
    Radial radial_;
    KernelFlags flags_;
    std::string label_;
    bool saturated_ = false;
};

/// Sampled check of f(x,y) <= M phi(|y-x|) |y-x|^{-alpha-d}; returns the worst ratio f / bound.
double domination_ratio(const JumpKernel& kernel, const std::vector<Point>& xs, const std::vector<Point>& ys);

} // namespace stabledom
