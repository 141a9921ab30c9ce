#include "stabledom/profile.hpp"

#include "stabledom/errors.hpp"
#include "stabledom/params.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace stabledom {

void ModelParams::validate() const {
    if (!(alpha > 0.0 && alpha < 2.0)) throw PreconditionError("alpha must lie in (0,2)");
    if (dim < 1 || dim > 3) throw PreconditionError("dim must be 1, 2 or 3");
    if (!(M > 0.0)) throw PreconditionError("M must be positive");
    if (!(eps > 0.0 && eps <= 1.0)) throw PreconditionError("eps must lie in (0,1]");
    if (!(eps0 > 0.0)) throw PreconditionError("eps0 must be positive");
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Segment index and ln-values for a tabulated profile, with (1, 1) prepended.
double tabulated_log(const Tabulated& tab, double s) {
    double r0 = 1.0, l0 = 0.0;
    for (std::size_t i = 0; i < tab.knots.size(); ++i) {
        const double r1 = tab.knots[i].first;
        const double l1 = std::log(tab.knots[i].second);
        if (s <= r1 || i + 1 == tab.knots.size()) {
            return l0 + (l1 - l0) * (s - r0) / (r1 - r0);
        }
        r0 = r1;
        l0 = l1;
    }
    return 0.0;
}

} // namespace

double log_phi(const PhiProfile& phi, double s) {
    if (!(s >= 0.0)) throw DomainError("phi evaluated at a negative radius");
    if (s <= 1.0) return 0.0;
    return std::visit(
        overloaded{
            [](const ConstantOne&) { return 0.0; },
            [s](const ExpPower& p) { return -p.m * std::pow(s, p.beta) + p.gamma * std::log(s); },
            [s](const PolyDecay& p) { return -p.gamma * std::log(s); },
            [s](const LogDecay&) { return -std::log1p(std::log(s)); },
            [s](const LogLogDecay&) { return -std::log(std::log(std::numbers::e + std::log(s))); },
            [s](const Tabulated& t) { return t.knots.empty() ? 0.0 : tabulated_log(t, s); },
        },
        phi);
}

double phi_eval(const PhiProfile& phi, double s) {
    if (!(s >= 0.0)) throw DomainError("phi evaluated at a negative radius");
    if (s <= 1.0) return 1.0;
    return std::exp(log_phi(phi, s));
}

namespace {

// (L', L'') for L = ln phi at a > 1 for the analytic families.
std::pair<double, double> log_derivatives(const PhiProfile& phi, double a) {
    return std::visit(
        overloaded{
            [](const ConstantOne&) { return std::pair{0.0, 0.0}; },
            [a](const ExpPower& p) {
                const double l1 = -p.m * p.beta * std::pow(a, p.beta - 1.0) + p.gamma / a;
                const double l2 = -p.m * p.beta * (p.beta - 1.0) * std::pow(a, p.beta - 2.0) - p.gamma / (a * a);
                return std::pair{l1, l2};
            },
            [a](const PolyDecay& p) { return std::pair{-p.gamma / a, p.gamma / (a * a)}; },
            [a](const LogDecay&) {
                const double u = 1.0 + std::log(a);
                // ln phi = -ln u, u' = 1/a
                return std::pair{-1.0 / (a * u), (1.0 + u) / (a * a * u * u)};
            },
            [a](const LogLogDecay&) {
                const double w = std::numbers::e + std::log(a);
                const double v = std::log(w);
                const double v1 = 1.0 / (a * w);
                const double v2 = -(w + 1.0) / (a * a * w * w);
                return std::pair{-v1 / v, -v2 / v + v1 * v1 / (v * v)};
            },
            [](const Tabulated&) { return std::pair{std::nan(""), std::nan("")}; },
        },
        phi);
}

} // namespace

PhiDerivatives phi_derivatives(const PhiProfile& phi, double a) {
    if (!(a > 1.0)) throw DomainError("derivatives are only taken on (1, inf)");
    if (std::holds_alternative<Tabulated>(phi)) {
        const double h = 1e-4 * std::max(1.0, a);
        const double fp = phi_eval(phi, a + h), f0 = phi_eval(phi, a), fm = phi_eval(phi, std::max(a - h, 1.0 + 1e-15));
        return {(fp - fm) / (2.0 * h), (fp - 2.0 * f0 + fm) / (h * h)};
    }
    const auto [l1, l2] = log_derivatives(phi, a);
    const double f = phi_eval(phi, a);
    return {f * l1, f * (l2 + l1 * l1)};
}

double derivative_ratio(const PhiProfile& phi, double a) {
    if (std::holds_alternative<Tabulated>(phi)) {
        const auto d = phi_derivatives(phi, a);
        return std::max(std::abs(d.d1), std::abs(d.d2)) / phi_eval(phi, a);
    }
    if (!(a > 1.0)) throw DomainError("derivatives are only taken on (1, inf)");
    const auto [l1, l2] = log_derivatives(phi, a);
    return std::max(std::abs(l1), std::abs(l2 + l1 * l1));
}

double profile_sup(const PhiProfile& phi) {
    return std::visit(
        overloaded{
            [](const ExpPower& p) {
                double best = 1.0;
                if (p.gamma > 0.0) {
                    const double s_star = std::pow(p.gamma / (p.m * p.beta), 1.0 / p.beta);
                    if (s_star > 1.0) {
                        best = std::max(best, std::exp(-p.m * std::pow(s_star, p.beta) + p.gamma * std::log(s_star)));
                    }
                }
                return best;
            },
            [](const Tabulated& t) {
                double best = 1.0;
                for (const auto& [r, v] : t.knots) best = std::max(best, v);
                if (t.knots.size() >= 1) {
                    // an increasing last segment is continued upward without bound
                    const double r_prev = t.knots.size() >= 2 ? t.knots[t.knots.size() - 2].first : 1.0;
                    const double v_prev = t.knots.size() >= 2 ? t.knots[t.knots.size() - 2].second : 1.0;
                    if (t.knots.back().second > v_prev && t.knots.back().first > r_prev)
                        best = std::numeric_limits<double>::infinity();
                }
                return best;
            },
            [](const auto&) { return 1.0; },
        },
        phi);
}

void validate_profile(const PhiProfile& phi) {
    std::visit(overloaded{
                   [](const ExpPower& p) {
                       if (!(p.m > 0.0) || !(p.beta > 0.0) || !std::isfinite(p.gamma))
                           throw DomainError("ExpPower needs m > 0, beta > 0 and finite gamma");
                   },
                   [](const PolyDecay& p) {
                       if (!(p.gamma > 0.0)) throw DomainError("PolyDecay needs gamma > 0");
                   },
                   [](const Tabulated& t) {
                       double prev = 1.0;
                       for (const auto& [r, v] : t.knots) {
                           if (!(r > prev)) throw DomainError("tabulated radii must be > 1 and strictly increasing");
                           if (!(v > 0.0)) throw DomainError("tabulated values must be positive");
                           prev = r;
                       }
                   },
                   [](const auto&) {},
               },
               phi);
    if (profile_sup(phi) > 1.0) {
        throw DomainError("profile " + profile_name(phi) + " exceeds 1 somewhere; such profiles are rejected");
    }
}

bool is_nonincreasing(const PhiProfile& phi) {
    return std::visit(overloaded{
                          [](const ExpPower& p) { return p.gamma <= 0.0; },
                          [](const Tabulated& t) {
                              double prev = 1.0;
                              for (const auto& kv : t.knots) {
                                  if (kv.second > prev) return false;
                                  prev = kv.second;
                              }
                              return true;
                          },
                          [](const auto&) { return true; },
                      },
                      phi);
}

std::string profile_name(const PhiProfile& phi) {
    std::ostringstream os;
    std::visit(overloaded{
                   [&](const ConstantOne&) { os << "ConstantOne"; },
                   [&](const ExpPower& p) { os << "ExpPower(m=" << p.m << ",beta=" << p.beta << ",gamma=" << p.gamma << ")"; },
                   [&](const PolyDecay& p) { os << "PolyDecay(gamma=" << p.gamma << ")"; },
                   [&](const LogDecay&) { os << "LogDecay"; },
                   [&](const LogLogDecay&) { os << "LogLogDecay"; },
                   [&](const Tabulated& t) { os << "Tabulated(" << t.knots.size() << " knots)"; },
               },
               phi);
    return os.str();
}

} // namespace stabledom
