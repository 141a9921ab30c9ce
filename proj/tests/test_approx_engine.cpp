#include "stabledom/errors.hpp"
#include "stabledom/generator.hpp"
#include "stabledom/grid_kernel.hpp"
#include "stabledom/iterated.hpp"
#include "stabledom/semigroup.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <memory>

using namespace stabledom;

namespace {

ModelParams params(double alpha, int dim, double eps) {
    ModelParams p;
    p.alpha = alpha;
    p.dim = dim;
    p.eps = eps;
    return p;
}

std::shared_ptr<GridKernel> lattice(const JumpKernel& k, double half_width, int cpe = 4, double tail_cap = 0.05) {
    const Grid g = Grid::aligned(k.params().dim, k.params().eps, half_width, cpe);
    return std::make_shared<GridKernel>(build_f_eps(k, g, {}, tail_cap));
}

// Lattice generator with the exterior as an extra absorbing state (last index).
Eigen::MatrixXd generator_matrix(const GridKernel& gk) {
    const std::size_t n = gk.grid().size();
    const double hd = gk.grid().cell_volume();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + 1, n + 1);
    for (std::size_t x = 0; x < n; ++x) {
        for (std::size_t y = 0; y < n; ++y) A(x, y) = gk.value(x, y) * hd;
        A(x, n) = gk.out_of_box(x);
        A(x, x) -= gk.b_eps(x);
    }
    return A;
}

} // namespace

TEST_SUITE("approx_engine") {

TEST_CASE("aligned lattice puts eps on a cell boundary") {
    const Grid g = Grid::aligned(1, 0.25, 10.0, 4);
    CHECK(g.spacing == doctest::Approx(0.25 / 4.5).epsilon(1e-15));
    CHECK(g.point(g.locate({0.0, 0.0, 0.0}))[0] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(g.upper_edge(0) >= 10.0);
    for (double p : {-3.3, 0.01, 7.77}) CHECK(std::abs(g.point(g.locate({p, 0.0, 0.0}))[0] - p) <= 0.5 * g.spacing + 1e-12);
    CHECK_THROWS_AS(g.locate({1e3, 0.0, 0.0}), PreconditionError);
    const Grid g2 = Grid::aligned(2, 0.2, 3.0, 4);
    CHECK(g2.size() == static_cast<std::size_t>(g2.count[0]) * g2.count[1]);
    CHECK(g2.flat_index(g2.multi_index(17)) == 17);
}

TEST_CASE("one-dimensional lattice kernel equals closed-form cell averages") {
    const double eps = 0.25, alpha = 0.7;
    const auto k = JumpKernel::saturated(params(alpha, 1, eps), ConstantOne{});
    const auto gk = lattice(k, 200.0);
    const double h = gk->grid().spacing;
    const std::size_t o = gk->grid().locate({0.0, 0.0, 0.0});
    for (int j = -4; j <= 4; ++j) CHECK(gk->value(o, o + j) == 0.0);
    for (int j : {5, 6, 9, 40, -5, -17}) {
        const double a = (std::abs(j) - 0.5) * h, b = (std::abs(j) + 0.5) * h;
        const double avg = (std::pow(a, -alpha) - std::pow(b, -alpha)) / (alpha * h);
        CHECK(gk->value(o, o + j) == doctest::Approx(avg).epsilon(1e-9));
    }
    // b_eps = 2 eps^{-alpha} / alpha and the row plus leak carries all of it
    CHECK(gk->b_eps(o) == doctest::Approx(2.0 * std::pow(eps, -alpha) / alpha).epsilon(1e-8));
    CHECK(gk->row_mass(o) + gk->out_of_box(o) == doctest::Approx(gk->b_eps(o)).epsilon(1e-8));
    CHECK(gk->max_row_defect() < 1e-8);
}

TEST_CASE("a box too small for the heavy tail is refused") {
    const auto k = JumpKernel::saturated(params(0.5, 1, 0.25), ConstantOne{});
    CHECK_THROWS_AS(lattice(k, 5.0), BoxTooSmallError);
}

TEST_CASE("FFT and direct application agree") {
    const auto k = JumpKernel::saturated(params(1.0, 2, 0.3), ExpPower{1.0, 1.0, 0.0});
    auto gk = lattice(k, 3.0, 4, 0.5);
    std::vector<double> v(gk->grid().size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sin(0.37 * static_cast<double>(i)) + 1.0;
    gk->set_use_fft(false);
    std::vector<double> direct, direct_t, fft, fft_t;
    gk->apply(v, direct);
    gk->apply_transpose(v, direct_t);
    gk->set_use_fft(true);
    REQUIRE(gk->uses_fft());
    gk->apply(v, fft);
    gk->apply_transpose(v, fft_t);
    for (std::size_t i = 0; i < v.size(); ++i) {
        CHECK(fft[i] == doctest::Approx(direct[i]).epsilon(1e-10));
        CHECK(fft_t[i] == doctest::Approx(direct_t[i]).epsilon(1e-10));
    }
}

TEST_CASE("iterated kernels match dense matrix powers") {
    const auto k = JumpKernel::saturated(params(1.0, 1, 0.5), ExpPower{1.0, 1.0, 0.0});
    const auto gk = lattice(k, 8.0, 4, 0.5);
    const std::size_t n = gk->grid().size();
    const std::size_t src = gk->grid().locate({1.0, 0.0, 0.0});
    IteratedKernels ik(gk, {src});
    ik.extend_to(4);
    const double hd = gk->grid().cell_volume();
    Eigen::MatrixXd F(n, n);
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = 0; y < n; ++y) F(x, y) = gk->value(x, y);
    Eigen::RowVectorXd row = F.row(static_cast<Eigen::Index>(src));
    for (int level = 1; level <= 4; ++level) {
        for (std::size_t y = 0; y < n; y += 3)
            CHECK(ik.value(level, 0, y) == doctest::Approx(row(static_cast<Eigen::Index>(y))).epsilon(1e-10).scale(1e-300));
        row = row * F * hd;
    }
}

TEST_CASE("lattice mass of f_n equals b_bar^n - (b_bar - b)^n") {
    const double eps = 0.25, alpha = 1.0;
    const auto k = JumpKernel::saturated(params(alpha, 1, eps), ConstantOne{});
    const auto gk = lattice(k, 200.0);
    IteratedKernels ik(gk);
    ik.extend_to(5);
    const double bbar = 2.0 * std::pow(eps, -alpha) / alpha;
    for (const auto& c : ik.certificates()) {
        // certificates are kept in units of the lattice b_bar^n
        const double mass = (c.in_box + c.leaked) * std::pow(gk->b_bar(), c.level);
        CHECK(mass == doctest::Approx(std::pow(bbar, c.level)).epsilon(1e-7));
    }
    CHECK(ik.atom_ratio(0) == doctest::Approx(0.0).scale(1e-9));
}

TEST_CASE("iteration refuses to outgrow its memory budget") {
    const auto k = JumpKernel::saturated(params(1.0, 1, 0.25), ConstantOne{});
    IteratedKernels ik(lattice(k, 200.0));
    ik.set_memory_budget(100);
    CHECK_THROWS_AS(ik.extend_to(3), PreconditionError);
}

TEST_CASE("Poisson helpers agree with direct sums") {
    const double rate = 3.7;
    const auto w = poisson_weights(rate, 40);
    for (int k = 0; k <= 40; ++k) {
        const double direct = std::exp(-rate + k * std::log(rate) - std::lgamma(k + 1.0));
        CHECK(w[k] == doctest::Approx(direct).epsilon(1e-12));
    }
    for (int k = 0; k <= 20; ++k) {
        double tail = 0.0;
        for (int j = 200; j > k; --j) tail += std::exp(-rate + j * std::log(rate) - std::lgamma(j + 1.0));
        CHECK(poisson_tail(rate, k) == doctest::Approx(tail).epsilon(1e-10));
    }
    const int N = poisson_truncation(50.0, 2.0, 1e-10);
    CHECK(poisson_tail(50.0, N) * 2.0 <= 1e-10);
    CHECK(poisson_tail(50.0, N - 1) * 2.0 > 1e-10);
    // large rates stay finite in log form
    const auto big = poisson_weights(2000.0, 2100);
    CHECK(big[2000] == doctest::Approx(1.0 / std::sqrt(2.0 * 3.141592653589793 * 2000.0)).epsilon(1e-3));
}

TEST_CASE("uniformized semigroup equals the matrix exponential of the lattice generator") {
    const auto k = JumpKernel::saturated(params(0.8, 1, 0.5), ExpPower{1.0, 1.0, 0.0});
    const auto gk = lattice(k, 6.0, 4, 0.5);
    const std::size_t n = gk->grid().size();
    GridFunction phi;
    phi.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) phi.values[i] = std::exp(-std::abs(gk->grid().point(i)[0]));
    phi.exterior = 0.25;
    const double t = 0.3;
    const auto res = expm_apply(*gk, phi, t, 1e-13);
    Eigen::VectorXd v(n + 1);
    for (std::size_t i = 0; i < n; ++i) v(static_cast<Eigen::Index>(i)) = phi.values[i];
    v(static_cast<Eigen::Index>(n)) = phi.exterior;
    const Eigen::MatrixXd E = (t * generator_matrix(*gk)).exp();
    const Eigen::VectorXd oracle = E * v;
    for (std::size_t i = 0; i < n; ++i) CHECK(res.value.values[i] == doctest::Approx(oracle(static_cast<Eigen::Index>(i))).epsilon(1e-10));
    CHECK(res.value.exterior == doctest::Approx(phi.exterior));
}

TEST_CASE("the truncated semigroup is conservative") {
    const auto k = JumpKernel::saturated(params(1.0, 1, 0.2), ConstantOne{});
    const auto gk = lattice(k, 100.0);
    GridFunction one{std::vector<double>(gk->grid().size(), 1.0), 1.0};
    for (double tb : {1.0, 10.0}) {
        const auto r = expm_apply(*gk, one, tb / gk->b_bar(), 1e-10);
        // each application can lose the relative row defect of the cell quadrature
        const double slack = r.truncation_bound + tb * gk->max_row_defect() + 1e-12;
        for (double v : r.value.values) CHECK(std::abs(v - 1.0) <= slack);
    }
}

TEST_CASE("density at the source: atom, nonnegativity, symmetry and total mass") {
    const auto k = JumpKernel::saturated(params(1.0, 1, 0.25), ConstantOne{});
    const auto gk = lattice(k, 100.0);
    IteratedKernels ik(gk);
    const double t = 0.4;
    const auto d = density_p_eps(ik, t, ik.sources().front(), 1e-10);
    CHECK(d.atom == doctest::Approx(std::exp(-t * 8.0)).epsilon(1e-8));
    CHECK(d.total_mass() == doctest::Approx(1.0).epsilon(1e-7));
    const std::size_t o = d.source;
    for (std::size_t j = 1; j < 200; j += 7) {
        CHECK(d.q[o + j] >= 0.0);
        CHECK(d.q[o + j] == doctest::Approx(d.q[o - j]).epsilon(1e-12));
    }
    CHECK(d.truncation_bound <= 1e-10);
}

TEST_CASE("smooth bump shape") {
    const auto b = smooth_bump({1.0, 0.0, 0.0}, 2.0);
    CHECK(b({1.0, 0.0, 0.0}) == doctest::Approx(1.0));
    CHECK(b({3.5, 0.0, 0.0}) == 0.0);
    CHECK(b({2.0, 0.0, 0.0}) == doctest::Approx(std::exp(1.0 - 1.0 / 0.75)).epsilon(1e-14));
}

TEST_CASE("generator outside the support is the plain jump integral") {
    const auto k = JumpKernel::saturated(params(0.5, 1, 0.1), ConstantOne{});
    const auto bump = smooth_bump({0.0, 0.0, 0.0}, 1.0);
    const double x = 5.0;
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    const double oracle = GK::integrate([&](double u) { return bump({u, 0.0, 0.0}) * std::pow(x - u, -1.5); }, -1.0, 1.0, 15, 1e-13);
    CHECK(generator_apply(k, bump, {x, 0.0, 0.0}, 0.0) == doctest::Approx(oracle).epsilon(1e-7));
    CHECK(generator_apply(k, bump, {x, 0.0, 0.0}, 0.5) == doctest::Approx(oracle).epsilon(1e-7));
}

TEST_CASE("generator at the bump centre matches a symmetric principal value") {
    const double alpha = 1.2;
    const auto k = JumpKernel::saturated(params(alpha, 1, 0.1), ConstantOne{});
    const auto bump = smooth_bump({0.0, 0.0, 0.0}, 1.0);
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    // 2 int_0^inf (phi(h) - 1) h^{-1-alpha} dh with phi even
    auto g = [&](double h) { return (bump({h, 0.0, 0.0}) - 1.0) * std::pow(h, -1.0 - alpha); };
    const double near = GK::integrate(g, 0.0, 1.0, 20, 1e-12);
    const double far = -std::pow(1.0, -alpha) / alpha;
    CHECK(generator_apply(k, bump, {0.0, 0.0, 0.0}, 0.0) == doctest::Approx(2.0 * (near + far)).epsilon(1e-6));
}

TEST_CASE("generator gaps shrink under eps halving") {
    const auto k = JumpKernel::saturated(params(0.5, 1, 0.1), ConstantOne{});
    const auto bump = smooth_bump({0.0, 0.0, 0.0}, 1.0);
    std::vector<Point> probes;
    for (int i = -6; i <= 6; ++i) probes.push_back({0.2 * i, 0.0, 0.0});
    const auto r = generator_convergence(k, bump, {0.4, 0.2, 0.1, 0.05}, probes);
    CHECK(r.monotone);
    CHECK(r.verdict == Verdict::Pass);
    // near the centre the gap is (phi''(x)/2) int_{|h|<eps} h^2 |h|^{-1.5} dh ~ eps^{1.5}
    CHECK(r.ratios.back() == doctest::Approx(std::pow(0.5, 1.5)).epsilon(0.1));
}

TEST_CASE("asymmetric increments with alpha >= 1 are refused by the generator") {
    auto skew = [](const Point& x, const Point& y) { return (y[0] > x[0] ? 1.0 : 0.5) * std::pow(distance(x, y), -2.5); };
    KernelFlags flags;
    flags.symmetric_in_increment = false;
    const auto k = JumpKernel::custom(params(1.5, 1, 0.1), ConstantOne{}, skew, flags, "skew");
    CHECK_THROWS_AS(generator_apply(k, smooth_bump({0.0, 0.0, 0.0}, 1.0), {0.0, 0.0, 0.0}, 0.0), PreconditionError);
}

} // TEST_SUITE
