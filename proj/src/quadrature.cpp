#include "stabledom/quadrature.hpp"

#include "stabledom/errors.hpp"
#include "stabledom/params.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>

namespace stabledom {

void QuadratureSpec::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw PreconditionError("quadrature tolerances must be positive");
    if (max_subdivisions < 1) throw PreconditionError("quadrature subdivision budget must be at least 1");
}

namespace {

struct Panel {
    double a, b, value, error;
    bool splittable;
};

struct WorseFirst {
    bool operator()(const Panel& l, const Panel& r) const {
        if (l.error != r.error) return l.error < r.error;
        return l.a > r.a;
    }
};

Panel kronrod15(const Integrand& f, double a, double b) {
    using K = boost::math::quadrature::gauss_kronrod<double, 15>;
    using G = boost::math::quadrature::gauss<double, 7>;
    static const auto& xk = K::abscissa();
    static const auto& wk = K::weights();
    static const auto& wg = G::weights();

    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const double f0 = f(c);
    double kron = wk[0] * f0, gauss = wg[0] * f0, abs_sum = wk[0] * std::abs(f0);
    double fv[15];
    fv[0] = f0;
    for (std::size_t i = 1; i < xk.size(); ++i) {
        const double fl = f(c - h * xk[i]), fr = f(c + h * xk[i]);
        fv[2 * i - 1] = fl;
        fv[2 * i] = fr;
        kron += wk[i] * (fl + fr);
        abs_sum += wk[i] * (std::abs(fl) + std::abs(fr));
        if (i % 2 == 0) gauss += wg[i / 2] * (fl + fr);
    }
    const double mean = 0.5 * kron;
    double asc = wk[0] * std::abs(f0 - mean);
    for (std::size_t i = 1; i < xk.size(); ++i) asc += wk[i] * (std::abs(fv[2 * i - 1] - mean) + std::abs(fv[2 * i] - mean));

    const double value = kron * h;
    const double resabs = abs_sum * std::abs(h), resasc = asc * std::abs(h);
    double err = std::abs((kron - gauss) * h);
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    const double roundoff = 50.0 * std::numeric_limits<double>::epsilon() * resabs;
    err = std::max(err, roundoff);
    if (!std::isfinite(value)) err = std::numeric_limits<double>::infinity();
    const double mid = 0.5 * (a + b);
    const bool splittable = mid > a && mid < b;
    return {a, b, value, err, splittable};
}

} // namespace

QuadResult gauss_kronrod(const Integrand& f, double a, double b, const QuadratureSpec& spec,
                         const std::vector<double>& breakpoints) {
    QuadResult res;
    if (a == b) return res;
    if (b < a) {
        res = gauss_kronrod(f, b, a, spec, breakpoints);
        res.value = -res.value;
        res.previous_value = -res.previous_value;
        return res;
    }
    std::vector<double> cuts{a};
    for (double p : breakpoints)
        if (p > a && p < b) cuts.push_back(p);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::priority_queue<Panel, std::vector<Panel>, WorseFirst> heap;
    std::vector<Panel> finished;
    double total = 0.0, total_err = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        Panel p = kronrod15(f, cuts[i], cuts[i + 1]);
        total += p.value;
        total_err += p.error;
        heap.push(p);
    }
    res.previous_value = total;
    int subdivisions = 0;
    auto target = [&] { return std::max(spec.abs_tol, spec.rel_tol * std::abs(total)); };
    while (total_err > target() && !heap.empty()) {
        if (subdivisions >= spec.max_subdivisions) break;
        Panel worst = heap.top();
        heap.pop();
        if (!worst.splittable) {
            finished.push_back(worst);
            continue;
        }
        const double mid = 0.5 * (worst.a + worst.b);
        Panel l = kronrod15(f, worst.a, mid), r = kronrod15(f, mid, worst.b);
        res.previous_value = total;
        total += l.value + r.value - worst.value;
        total_err += l.error + r.error - worst.error;
        heap.push(l);
        heap.push(r);
        ++subdivisions;
    }
    // Re-sum from scratch so the reported value does not carry incremental round-off.
    double sum = 0.0, err = 0.0;
    std::vector<Panel> all = finished;
    while (!heap.empty()) {
        all.push_back(heap.top());
        heap.pop();
    }
    std::sort(all.begin(), all.end(), [](const Panel& l, const Panel& r) { return l.a < r.a; });
    for (const auto& p : all) {
        sum += p.value;
        err += p.error;
    }
    res.value = sum;
    res.error = err;
    res.subdivisions = subdivisions;
    res.converged = std::isfinite(sum) && err <= std::max(spec.abs_tol, spec.rel_tol * std::abs(sum));
    return res;
}

double integrate(const Integrand& f, double a, double b, const QuadratureSpec& spec,
                 const std::vector<double>& breakpoints) {
    const QuadResult r = gauss_kronrod(f, a, b, spec, breakpoints);
    if (!r.converged) {
        std::ostringstream os;
        os << "adaptive quadrature on [" << a << ", " << b << "] did not converge: estimate " << r.value
           << ", previous " << r.previous_value << ", error " << r.error;
        throw QuadratureError(os.str(), r.value, r.previous_value);
    }
    return r.value;
}

QuadResult integrate_to_infinity(const Integrand& f, double a, const QuadratureSpec& spec,
                                 std::optional<PowerTail> envelope, const std::vector<double>& breakpoints) {
    if (!(a >= 0.0)) throw DomainError("integration range must start at a nonnegative point");
    constexpr int max_panels = 1100;
    QuadResult res;
    double sum = 0.0, err = 0.0;
    double lo = a;
    if (a == 0.0) lo = 0.0;
    double hi = a > 0.0 ? 2.0 * a : 1.0;
    double prev_panel = std::nan(""), prev_rho = std::nan(""), prev_sum = 0.0;
    int quiet_panels = 0;
    for (int k = 0; k < max_panels; ++k) {
        QuadratureSpec panel_spec = spec;
        panel_spec.abs_tol = 0.05 * std::max(spec.abs_tol, spec.rel_tol * std::abs(sum));
        const QuadResult p = gauss_kronrod(f, lo, hi, panel_spec, breakpoints);
        if (!p.converged) {
            std::ostringstream os;
            os << "panel [" << lo << ", " << hi << "] did not converge (estimate " << p.value << ")";
            throw QuadratureError(os.str(), sum + p.value, prev_sum);
        }
        prev_sum = sum;
        sum += p.value;
        err += p.error;
        res.subdivisions += p.subdivisions;
        const double target = std::max(spec.abs_tol, spec.rel_tol * std::abs(sum));
        if (envelope) {
            const double tail = envelope->coeff * std::pow(hi, -envelope->power) / envelope->power;
            if (tail <= 0.5 * target) {
                res.value = sum;
                res.error = err + tail;
                res.truncation_radius = hi;
                res.previous_value = prev_sum;
                return res;
            }
        } else {
            if (p.value == 0.0) {
                if (++quiet_panels >= 2 && k >= 2) {
                    res.value = sum;
                    res.error = err;
                    res.truncation_radius = hi;
                    res.previous_value = prev_sum;
                    return res;
                }
            } else {
                quiet_panels = 0;
            }
            if (std::isfinite(prev_panel) && prev_panel != 0.0) {
                const double rho = p.value / prev_panel;
                if (rho >= 0.0 && rho < 0.95) {
                    const double tail = p.value * rho / (1.0 - rho);
                    // error of the geometric model, judged by how much the panel ratio still drifts
                    const double drift = std::isfinite(prev_rho) ? std::abs(rho - prev_rho) / (1.0 - rho) : INFINITY;
                    const double tail_err = std::abs(tail) * drift;
                    if (k >= 2 && (std::abs(tail) <= 0.5 * target || tail_err <= 0.5 * target)) {
                        res.value = sum + tail;
                        res.error = err + std::min(std::abs(tail), tail_err);
                        res.truncation_radius = hi;
                        res.previous_value = prev_sum;
                        return res;
                    }
                }
                prev_rho = rho;
            }
        }
        prev_panel = p.value;
        lo = hi;
        hi *= 2.0;
        if (!std::isfinite(hi)) break;
    }
    throw QuadratureError("infinite-range quadrature did not settle within the panel budget", sum, prev_sum);
}

QuadResult integrate_radial_detailed(const Integrand& g, double r_min, double r_max, int dim,
                                     const QuadratureSpec& spec, std::optional<PowerTail> envelope) {
    spec.validate();
    if (!(r_min >= 0.0) || !(r_max >= r_min)) throw DomainError("radial range must satisfy 0 <= r_min <= r_max");
    if (dim < 1 || dim > 3) throw DomainError("dimension must be 1, 2 or 3");
    const double sigma = unit_sphere_area(dim);
    auto weighted = [&g, dim](double r) {
        if (dim == 1) return g(r);
        return g(r) * std::pow(r, dim - 1);
    };
    const std::vector<double> bp{1.0};
    QuadResult res;
    if (std::isfinite(r_max)) {
        res = gauss_kronrod(weighted, r_min, r_max, spec, bp);
        if (!res.converged) {
            std::ostringstream os;
            os << "radial quadrature did not converge: estimate " << res.value << ", previous " << res.previous_value;
            throw QuadratureError(os.str(), sigma * res.value, sigma * res.previous_value);
        }
    } else {
        std::optional<PowerTail> env;
        if (envelope) env = PowerTail{envelope->coeff, envelope->power};
        // finite piece up to 1 first so the geometric panels start at a unit scale
        double head = 0.0;
        double start = r_min;
        if (r_min < 1.0) {
            const QuadResult h = gauss_kronrod(weighted, r_min, 1.0, spec);
            if (!h.converged) throw QuadratureError("radial quadrature near the origin did not converge", sigma * h.value, sigma * h.previous_value);
            head = h.value;
            start = 1.0;
        }
        res = integrate_to_infinity(weighted, start, spec, env, bp);
        res.value += head;
    }
    res.value *= sigma;
    res.error *= sigma;
    res.previous_value *= sigma;
    return res;
}

double integrate_radial(const Integrand& g, double r_min, double r_max, int dim, const QuadratureSpec& spec) {
    return integrate_radial_detailed(g, r_min, r_max, dim, spec, std::nullopt).value;
}

} // namespace stabledom
