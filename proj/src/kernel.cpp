#include "stabledom/kernel.hpp"

#include "stabledom/errors.hpp"

#include <algorithm>
#include <cmath>

namespace stabledom {

JumpKernel JumpKernel::saturated(const ModelParams& params, const PhiProfile& phi) {
    params.validate();
    validate_profile(phi);
    JumpKernel k;
    k.params_ = params;
    k.phi_ = phi;
    k.saturated_ = true;
    k.flags_ = KernelFlags{true, true, true};
    k.label_ = "saturated " + profile_name(phi);
    const double M = params.M, p = params.alpha + params.dim;
    PhiProfile captured = phi;
    k.radial_ = [M, p, captured](double r) { return M * std::exp(log_phi(captured, r) - p * std::log(r)); };
    k.intensity_ = [radial = k.radial_](const Point& x, const Point& y) { return radial(distance(x, y)); };
    return k;
}

JumpKernel JumpKernel::custom(const ModelParams& params, const PhiProfile& phi, Intensity intensity, KernelFlags flags,
                              std::string label, Radial radial) {
    params.validate();
    validate_profile(phi);
    if (!intensity) throw PreconditionError("custom kernel needs an intensity function");
    JumpKernel k;
    k.params_ = params;
    k.phi_ = phi;
    k.intensity_ = std::move(intensity);
    k.radial_ = std::move(radial);
    k.flags_ = flags;
    k.label_ = std::move(label);
    if (k.radial_ && !flags.translation_invariant) {
        throw PreconditionError("a radial form implies translation invariance");
    }
    return k;
}

double JumpKernel::operator()(const Point& x, const Point& y) const { return intensity_(x, y); }

double JumpKernel::dominating(double r) const { return std::exp(log_dominating(r)); }

double JumpKernel::log_dominating(double r) const {
    return std::log(params_.M) + log_phi(phi_, r) - (params_.alpha + params_.dim) * std::log(r);
}

double JumpKernel::stable_envelope(double r) const { return params_.M * std::pow(r, -params_.alpha - params_.dim); }

JumpKernel JumpKernel::with_eps(double eps) const {
    JumpKernel k = *this;
    k.params_.eps = eps;
    k.params_.validate();
    return k;
}

double domination_ratio(const JumpKernel& kernel, const std::vector<Point>& xs, const std::vector<Point>& ys) {
    double worst = 0.0;
    for (const auto& x : xs) {
        for (const auto& y : ys) {
            const double r = distance(x, y);
            if (r == 0.0) continue;
            const double bound = kernel.dominating(r);
            const double f = kernel(x, y);
            if (bound > 0.0) worst = std::max(worst, f / bound);
            else if (f > 0.0) return INFINITY;
        }
    }
    return worst;
}

} // namespace stabledom
