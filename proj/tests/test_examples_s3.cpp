#include "stabledom/errors.hpp"
#include "stabledom/tempered.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace stabledom;
using BoostGK = boost::math::quadrature::gauss_kronrod<double, 61>;

namespace {

ParamCell cell(double beta, double gamma, double alpha, int dim) {
    ParamCell c;
    c.beta = beta;
    c.gamma = gamma;
    c.alpha = alpha;
    c.dim = dim;
    return c;
}

} // namespace

TEST_SUITE("examples_s3") {

TEST_CASE("predicted regimes across the parameter plane") {
    const ParamCell c1 = cell(1.0, 0.0, 0.5, 1);
    CHECK(c1.gamma_star() == doctest::Approx(0.5));
    CHECK(c1.predicted() == Regime::Holds);
    CHECK(cell(0.25, -1.0, 1.5, 2).predicted() == Regime::Holds);
    CHECK(cell(1.5, -1.0, 0.5, 1).predicted() == Regime::Fails);
    CHECK(cell(2.0, 0.0, 1.0, 2).predicted() == Regime::Fails);
    CHECK(cell(1.0, 0.5, 0.5, 1).predicted() == Regime::Fails);
    // gamma = gamma* in two dimensions is left open
    CHECK(cell(1.0, 1.0, 0.5, 2).predicted() == Regime::Boundary);
    CHECK(cell(0.5, 1.0, 0.5, 1).predicted() == Regime::Boundary);
    CHECK(cell(1.0, 0.7, 0.5, 1).predicted() == Regime::Boundary);
    CHECK(to_string(Regime::Holds) == "holds");
    CHECK(to_string(Observed::Rejected) == "rejected");
}

TEST_CASE("the log closed form agrees with quadrature") {
    for (double x : {3.0, 5.0, 8.0, 20.0}) {
        const auto v = remark_closed_form(x);
        const double oracle = 2.0 * std::log(x - 1.0) * std::exp(-x) / x;
        CHECK(v.analytic == doctest::Approx(oracle).epsilon(1e-14));
        CHECK(v.numeric == doctest::Approx(oracle).epsilon(1e-9));
        CHECK(v.rel_gap < 1e-9);
    }
    CHECK(remark_closed_form(3.0).numeric == doctest::Approx(0.0230066).epsilon(1e-5));
    CHECK_THROWS_AS(remark_closed_form(2.0), DomainError);
    CHECK_THROWS_AS(remark_closed_form(1.5), DomainError);
}

TEST_CASE("midpoint lower bound in one dimension matches a direct integral") {
    for (const ParamCell& c : {cell(1.0, 0.0, 0.5, 1), cell(2.0, -1.0, 1.0, 1), cell(0.5, 0.3, 1.5, 1)}) {
        auto k = [&](double s) { return std::exp(-c.m * std::pow(s, c.beta)) * std::pow(s, c.gamma - c.alpha - 1.0); };
        for (double lag : {6.0, 12.0}) {
            const double h = 0.5 * lag;
            const double oracle =
                BoostGK::integrate([&](double u) { return k(h + u) * k(h - u); }, -1.0, 1.0, 15, 1e-13) /
                k(lag);
            CHECK(midpoint_lower_bound(c, lag) == doctest::Approx(oracle).epsilon(1e-8));
        }
    }
}

TEST_CASE("midpoint lower bound in two dimensions matches a polar integral") {
    const ParamCell c = cell(1.0, 0.0, 1.0, 2);
    auto k = [&](double s) { return std::exp(-s) * std::pow(s, -3.0); };
    const double lag = 8.0, h = 4.0;
    auto ring = [&](double rho) {
        auto g = [&](double th) {
            const double u = rho * std::cos(th), v = rho * std::sin(th);
            return k(std::hypot(h + u, v)) * k(std::hypot(h - u, v));
        };
        return rho * BoostGK::integrate(g, 0.0, 2.0 * std::numbers::pi, 15, 1e-13);
    };
    const double oracle = BoostGK::integrate(ring, 0.0, 1.0, 15, 1e-12) / k(lag);
    CHECK(midpoint_lower_bound(c, lag) == doctest::Approx(oracle).epsilon(1e-7));
    CHECK_THROWS_AS(midpoint_lower_bound(c, 4.0), DomainError);
}

TEST_CASE("sweep classifies decided cells in line with the prediction") {
    const std::vector<ParamCell> cells{cell(2.0, 0.0, 0.5, 1), cell(0.5, 0.0, 0.5, 1), cell(1.0, 0.5, 0.5, 1),
                                       cell(1.0, -1.0, 1.0, 1), cell(1.0, 5.0, 0.5, 1)};
    const auto rows = sweep_condition_c(cells, default_sweep_lags());
    REQUIRE(rows.size() == cells.size());
    CHECK(rows[0].observed == Observed::Fails);
    CHECK(rows[1].observed == Observed::Holds);
    CHECK(rows[2].observed == Observed::Fails);
    CHECK(rows[3].observed == Observed::Holds);
    // e^{-s} s^5 peaks at 5^5 e^{-5} > 1
    CHECK(rows[4].observed == Observed::Rejected);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(rows[i].matches);
        CHECK(rows[i].ratios.size() == default_sweep_lags().size());
        CHECK(rows[i].growth_factor == doctest::Approx(rows[i].ratios.back() / rows[i].ratios.front()));
    }
    CHECK(rows[0].growth_factor > 10.0);
}

TEST_CASE("sweep lag validation") {
    const std::vector<ParamCell> one{cell(1.0, 0.0, 0.5, 1)};
    CHECK_THROWS_AS(sweep_condition_c(one, {4.0, 8.0}), PreconditionError);
    CHECK_THROWS_AS(sweep_condition_c(one, {4.0, 8.0, 8.0}), PreconditionError);
    CHECK_THROWS_AS(sweep_condition_c(one, {2.0, 8.0, 12.0}), PreconditionError);
    CHECK(default_sweep_cells().size() == 180);
    CHECK(default_sweep_lags().front() == 4.0);
    CHECK(default_sweep_lags().back() == 20.0);
}

} // TEST_SUITE
