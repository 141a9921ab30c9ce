#include "stabledom/assumptions.hpp"
#include "stabledom/errors.hpp"
#include "stabledom/kernel.hpp"
#include "stabledom/profile.hpp"

#include <boost/math/special_functions/expint.hpp>
#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace stabledom;

namespace {

ModelParams params(double alpha, int dim, double eps = 0.25) {
    ModelParams p;
    p.alpha = alpha;
    p.dim = dim;
    p.eps = eps;
    return p;
}

} // namespace

TEST_SUITE("kernels") {

TEST_CASE("profiles equal one on the unit interval and follow their closed forms beyond") {
    const ExpPower ep{1.0, 1.0, 0.0};
    for (double s : {0.0, 0.3, 1.0}) {
        CHECK(phi_eval(ConstantOne{}, s) == 1.0);
        CHECK(phi_eval(ep, s) == 1.0);
        CHECK(phi_eval(PolyDecay{2.0}, s) == 1.0);
        CHECK(phi_eval(LogDecay{}, s) == 1.0);
    }
    CHECK(phi_eval(ep, 2.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
    CHECK(phi_eval(ExpPower{2.0, 0.5, 1.0}, 9.0) == doctest::Approx(std::exp(-6.0) * 9.0).epsilon(1e-14));
    CHECK(phi_eval(PolyDecay{1.5}, 4.0) == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(phi_eval(LogDecay{}, std::exp(1.0)) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(phi_eval(LogLogDecay{}, std::exp(1.0)) == doctest::Approx(1.0 / std::log(std::exp(1.0) + 1.0)).epsilon(1e-15));
    CHECK_THROWS_AS(phi_eval(ep, -0.1), DomainError);
}

TEST_CASE("log_phi stays finite where phi underflows") {
    const ExpPower ep{1.0, 2.0, 0.0};
    CHECK(phi_eval(ep, 40.0) == 0.0);
    CHECK(log_phi(ep, 40.0) == doctest::Approx(-1600.0));
}

TEST_CASE("tabulated profiles interpolate log-linearly") {
    const Tabulated tab{{{2.0, 0.5}, {4.0, 0.125}}};
    CHECK(phi_eval(tab, 2.0) == doctest::Approx(0.5));
    CHECK(phi_eval(tab, 3.0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(phi_eval(tab, 1.5) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
}

TEST_CASE("profiles exceeding one are rejected, not normalized") {
    // e^{-s^{1/4}} s^{0.7} peaks above 1 near s = 60
    CHECK(std::exp(-std::pow(61.5, 0.25)) * std::pow(61.5, 0.7) > 1.0);
    CHECK_THROWS_AS(validate_profile(ExpPower{1.0, 0.25, 0.7}), DomainError);
    CHECK_THROWS_AS(validate_profile(Tabulated{{{2.0, 1.5}}}), DomainError);
    CHECK_NOTHROW(validate_profile(ExpPower{1.0, 1.0, 0.0}));
    CHECK(profile_sup(ExpPower{1.0, 0.25, 0.7}) > 1.0);
}

TEST_CASE("derivative ratio of the exponential profile is one") {
    // phi = e^{-s}: |phi'| / phi = phi'' / phi = 1
    CHECK(derivative_ratio(ExpPower{1.0, 1.0, 0.0}, 3.0) == doctest::Approx(1.0).epsilon(1e-12));
    const auto d = phi_derivatives(ExpPower{1.0, 1.0, 0.0}, 2.0);
    CHECK(d.d1 == doctest::Approx(-std::exp(-2.0)).epsilon(1e-12));
    CHECK(d.d2 == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
}

TEST_CASE("tail mass of the pure stable kernel matches the closed form") {
    const QuadratureSpec q;
    const Point o{0.0, 0.0, 0.0};
    // 2 int_{0.5}^inf h^{-2} dh = 4
    CHECK(tail_mass(JumpKernel::saturated(params(1.0, 1), ConstantOne{}), o, 0.5, q) == doctest::Approx(4.0).epsilon(1e-8));
    // 2 int_1^inf h^{-1.5} dh = 4
    CHECK(tail_mass(JumpKernel::saturated(params(0.5, 1), ConstantOne{}), o, 1.0, q) == doctest::Approx(4.0).epsilon(1e-8));
    // 2 pi int_1^inf r^{-3} r dr = 2 pi
    CHECK(tail_mass(JumpKernel::saturated(params(1.0, 2), ConstantOne{}), o, 1.0, q) ==
          doctest::Approx(2.0 * std::numbers::pi).epsilon(1e-8));
    // 4 pi int_1^inf r^{-3.5} r^2 dr = 8 pi
    CHECK(tail_mass(JumpKernel::saturated(params(0.5, 3), ConstantOne{}), o, 1.0, q) ==
          doctest::Approx(8.0 * std::numbers::pi).epsilon(1e-8));
}

TEST_CASE("tail mass of a tempered kernel matches the exponential integral") {
    const QuadratureSpec q;
    const auto k = JumpKernel::saturated(params(1.0, 1), ExpPower{1.0, 1.0, 0.0});
    // 2 [int_{0.5}^1 h^{-2} dh + int_1^inf e^{-h} h^{-2} dh] = 2 [1 + E_2(1)], E_2(1) = 1/e - E_1(1)
    const double e2 = std::exp(-1.0) - boost::math::expint(1, 1.0);
    CHECK(tail_mass(k, {0.0, 0.0, 0.0}, 0.5, q) == doctest::Approx(2.0 * (1.0 + e2)).epsilon(1e-8));
    // dividing by phi restores the pure stable integrand
    CHECK(tail_mass(k, {3.0, 0.0, 0.0}, 0.5, q, TailWeight::InverseProfile) == doctest::Approx(4.0).epsilon(1e-8));
}

TEST_CASE("tail mass is translation invariant, scales exactly and decreases in the radius") {
    const QuadratureSpec q;
    const auto k = JumpKernel::saturated(params(0.7, 2), ConstantOne{});
    const double b1 = tail_mass(k, {0.0, 0.0, 0.0}, 0.3, q);
    CHECK(tail_mass(k, {5.0, -2.0, 0.0}, 0.3, q) == doctest::Approx(b1).epsilon(1e-12));
    CHECK(tail_mass(k, {0.0, 0.0, 0.0}, 0.6, q) * std::pow(0.6, 0.7) == doctest::Approx(b1 * std::pow(0.3, 0.7)).epsilon(1e-8));
    const auto kt = JumpKernel::saturated(params(0.7, 1), ExpPower{1.0, 1.0, 0.0});
    double prev = tail_mass(kt, {0.0, 0.0, 0.0}, 0.1, q);
    for (double r : {0.2, 0.5, 1.0, 2.0, 5.0, 20.0}) {
        const double b = tail_mass(kt, {0.0, 0.0, 0.0}, r, q);
        CHECK(b < prev);
        prev = b;
    }
    CHECK(prev < 1e-8);
}

TEST_CASE("saturated kernels are dominated with ratio one") {
    const auto k = JumpKernel::saturated(params(1.2, 2), ExpPower{1.0, 1.0, 0.5});
    const std::vector<Point> xs{{0.0, 0.0, 0.0}, {1.0, 2.0, 0.0}};
    const std::vector<Point> ys{{0.5, 0.0, 0.0}, {3.0, -1.0, 0.0}, {10.0, 4.0, 0.0}};
    CHECK(domination_ratio(k, xs, ys) == doctest::Approx(1.0).epsilon(1e-14));
    // M phi(r) r^{-alpha-d} at r = 2
    CHECK(k.dominating(2.0) == doctest::Approx(std::exp(-2.0) * std::sqrt(2.0) * std::pow(2.0, -3.2)).epsilon(1e-14));
}

TEST_CASE("A1a constant for the exponential profile includes the jump at one") {
    const auto r = check_a1a(ExpPower{1.0, 1.0, 0.0}, 20.0, 0.01);
    CHECK(r.verdict == Verdict::Pass);
    // phi(1) / phi(2) = e^2 straddles the jump; for a, b > 1 the sup is e^{|a-b|} <= e
    CHECK(r.constants.at("c1") == doctest::Approx(std::exp(2.0)).epsilon(1e-9));
    CHECK(r.constants.at("c1_tail") == doctest::Approx(std::exp(1.0)).epsilon(1e-9));
}

TEST_CASE("A1a fails for super-exponential decay") {
    const auto r = check_a1a(ExpPower{1.0, 2.0, 0.0}, 20.0, 0.01);
    CHECK(r.verdict == Verdict::Fail);
}

TEST_CASE("A1b bounds the derivative ratio") {
    const auto r = check_a1b(ExpPower{1.0, 1.0, 0.0}, 20.0);
    CHECK(r.verdict == Verdict::Pass);
    CHECK(r.constants.at("c2") == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(check_a1b(ExpPower{1.0, 2.0, 0.0}, 20.0).verdict == Verdict::Fail);
}

TEST_CASE("A1c holds for the pure stable kernel and fails for Gaussian tempering") {
    const QuadratureSpec q;
    const auto stable = check_a1c(JumpKernel::saturated(params(0.5, 1), ConstantOne{}), {4, 8, 16, 32, 64}, q);
    CHECK(stable.verdict == Verdict::Pass);
    CHECK(std::isfinite(stable.worst_ratio));
    const auto gauss = check_a1c(JumpKernel::saturated(params(0.5, 1), ExpPower{1.0, 2.0, 0.0}), {4, 8, 16}, q);
    CHECK(gauss.verdict == Verdict::Fail);
}

TEST_CASE("A2 and A3 detect asymmetric intensities") {
    auto skew = [](const Point& x, const Point& y) {
        const double r = distance(x, y);
        const double w = y[0] > x[0] ? 1.0 : 0.5;
        return w * std::pow(r, -2.5);
    };
    KernelFlags flags;
    flags.symmetric_in_increment = false;
    flags.symmetric_in_arguments = false;
    const std::vector<Point> xs{{0.0, 0.0, 0.0}, {2.0, 0.0, 0.0}};
    const std::vector<Point> hs{{0.5, 0.0, 0.0}, {3.0, 0.0, 0.0}};
    const auto k15 = JumpKernel::custom(params(1.5, 1), ConstantOne{}, skew, flags, "skew");
    const auto k05 = JumpKernel::custom(params(0.5, 1), ConstantOne{}, skew, flags, "skew");
    CHECK(check_a2(k15, xs, hs).verdict == Verdict::Fail);
    CHECK(check_a2(k15, xs, hs).worst_ratio == doctest::Approx(0.5));
    // alpha < 1 licenses asymmetric increments
    CHECK(check_a2(k05, xs, hs).verdict == Verdict::Pass);
    CHECK(check_a3(k05, xs, hs).verdict == Verdict::Fail);
    const auto sym = JumpKernel::saturated(params(1.5, 1), ConstantOne{});
    CHECK(check_a2(sym, xs, hs).verdict == Verdict::Pass);
    CHECK(check_a3(sym, xs, hs).verdict == Verdict::Pass);
}

TEST_CASE("A4 constants of saturated kernels") {
    const QuadratureSpec q;
    const std::vector<Point> xs{{0.0, 0.0, 0.0}, {3.0, 0.0, 0.0}};
    // b_eps = 2 / eps for alpha = 1, so c4 = c5 = 2
    const auto r1 = check_a4(JumpKernel::saturated(params(1.0, 1), ConstantOne{}), {0.05, 0.1, 0.2, 0.5, 1.0}, xs, q);
    CHECK(r1.verdict == Verdict::Pass);
    CHECK(r1.constants.at("c4") == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(r1.constants.at("c5") == doctest::Approx(2.0).epsilon(1e-8));
    const auto r2 = check_a4(JumpKernel::saturated(params(1.0, 1), ExpPower{1.0, 1.0, 0.0}), {0.05, 0.1, 0.5, 1.0}, xs, q);
    CHECK(r2.constants.at("c4") == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("A4 fails for an intensity that vanishes at long range") {
    auto cut = [](const Point& x, const Point& y) {
        const double r = distance(x, y);
        return r < 0.5 ? std::pow(r, -2.0) : 0.0;
    };
    const auto k = JumpKernel::custom(params(1.0, 1), ConstantOne{}, cut, {}, "cut", [](double r) {
        return r < 0.5 ? std::pow(r, -2.0) : 0.0;
    });
    const auto r = check_a4(k, {0.5, 1.0}, {{0.0, 0.0, 0.0}});
    CHECK(r.verdict == Verdict::Fail);
}

} // TEST_SUITE
