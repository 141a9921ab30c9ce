#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace stabledom {

struct ConstantOne {};

/// e^{-m s^beta} s^gamma for s > 1, and 1 on [0, 1]. Jumps down at s = 1.
struct ExpPower {
    double m = 1.0;
    double beta = 1.0;
    double gamma = 0.0;
};

/// (1 v s)^{-gamma}.
struct PolyDecay {
    double gamma = 1.0;
};

/// 1 / (1 + ln s) for s > 1.
struct LogDecay {};

/// 1 / ln(e + ln s) for s > 1.
struct LogLogDecay {};

/// Knots (radius, value) with radius > 1, strictly increasing. The knot (1, 1) is implied.
/// ln(phi) is interpolated linearly in s; beyond the last knot the last segment is continued.
struct Tabulated {
    std::vector<std::pair<double, double>> knots;
};

using PhiProfile = std::variant<ConstantOne, ExpPower, PolyDecay, LogDecay, LogLogDecay, Tabulated>;

/// phi(s); exactly 1 on [0, 1]. Throws DomainError for s < 0.
double phi_eval(const PhiProfile& phi, double s);

/// ln phi(s), finite even where phi itself underflows.
double log_phi(const PhiProfile& phi, double s);

struct PhiDerivatives {
    double d1 = 0.0;
    double d2 = 0.0;
};

/// First and second derivatives at a > 1, analytic for the families and by central
/// differences with step 1e-4 * max(1, a) for tabulated data.
PhiDerivatives phi_derivatives(const PhiProfile& phi, double a);

/// max(|phi'|, |phi''|) / phi at a > 1, computed without forming phi for the analytic families.
double derivative_ratio(const PhiProfile& phi, double a);

/// sup_{s >= 0} phi(s), computed analytically for the families and over knots for tables.
double profile_sup(const PhiProfile& phi);

/// Throws DomainError when the profile leaves (0, 1] or its parameters are invalid.
void validate_profile(const PhiProfile& phi);

/// True when phi is nonincreasing on [0, inf).
bool is_nonincreasing(const PhiProfile& phi);

/// Short human-readable tag, e.g. "ExpPower(m=1,beta=1,gamma=0)".
std::string profile_name(const PhiProfile& phi);

} // namespace stabledom
