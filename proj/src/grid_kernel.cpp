#include "stabledom/grid_kernel.hpp"

#include "parallel.hpp"
#include "stabledom/assumptions.hpp"
#include "stabledom/errors.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <mutex>
#include <sstream>

namespace stabledom {

namespace detail {

/// FFT convolution with the offset array; spectra of the kernel and its reflection are cached.
struct FftPlan {
    std::array<int, 3> padded{1, 1, 1};
    std::size_t real_size = 1;
    std::size_t complex_size = 1;
    std::vector<std::complex<double>> kernel_hat;     // kappa(j) at j mod P
    std::vector<std::complex<double>> reflected_hat;  // kappa(-j) at j mod P
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;

    ~FftPlan() {
        if (forward) fftw_destroy_plan(forward);
        if (backward) fftw_destroy_plan(backward);
    }
};

} // namespace detail

namespace {

std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

using PointFn = std::function<double(const Point&)>;

// Integral over [a, b] minus the open hole (-w, w); w <= 0 means no hole.
double integrate_minus_hole(const Integrand& f, double a, double b, double w, const std::vector<double>& bp,
                            const QuadratureSpec& q) {
    if (w <= 0.0) return gauss_kronrod(f, a, b, q, bp).value;
    double acc = 0.0;
    if (a < -w) acc += gauss_kronrod(f, a, std::min(b, -w), q, bp).value;
    if (b > w) acc += gauss_kronrod(f, std::max(a, w), b, q, bp).value;
    return acc;
}

std::vector<double> symmetric_points(double r) {
    if (!(r > 0.0)) return {};
    return {-r, r};
}

double safe_sqrt(double v) { return v > 0.0 ? std::sqrt(v) : 0.0; }

} // namespace

double cell_integral(const std::function<double(const Point&)>& f, const Point& c, double h, double eps, int dim,
                     const QuadratureSpec& q) {
    double dmin2 = 0.0, dmax2 = 0.0;
    for (int a = 0; a < dim; ++a) {
        const double lo = std::abs(c[a]) - 0.5 * h, hi = std::abs(c[a]) + 0.5 * h;
        dmin2 += lo > 0.0 ? lo * lo : 0.0;
        dmax2 += hi * hi;
    }
    const double dmin = std::sqrt(dmin2), dmax = std::sqrt(dmax2);
    if (dmax <= eps) return 0.0;
    const bool crosses_unit = dmin < 1.0 && dmax > 1.0;

    if (dim > 1 && dmin > eps && dmin >= 2.0 * h && !crosses_unit) {
        using GL = boost::math::quadrature::gauss<double, 5>;
        static const auto& x = GL::abscissa();
        static const auto& w = GL::weights();
        // expand the half-rule into full nodes
        std::array<double, 5> nodes{}, weights{};
        nodes[0] = x[0];
        weights[0] = w[0];
        for (int i = 1; i < 3; ++i) {
            nodes[2 * i - 1] = -x[i];
            nodes[2 * i] = x[i];
            weights[2 * i - 1] = weights[2 * i] = w[i];
        }
        const double half = 0.5 * h;
        double acc = 0.0;
        if (dim == 2) {
            for (int i = 0; i < 5; ++i)
                for (int j = 0; j < 5; ++j)
                    acc += weights[i] * weights[j] * f({c[0] + half * nodes[i], c[1] + half * nodes[j], 0.0});
            return acc * half * half;
        }
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j)
                for (int k = 0; k < 5; ++k)
                    acc += weights[i] * weights[j] * weights[k] *
                           f({c[0] + half * nodes[i], c[1] + half * nodes[j], c[2] + half * nodes[k]});
        return acc * half * half * half;
    }

    const double h2 = 0.5 * h;
    if (dim == 1) {
        auto g = [&](double z) { return f({z, 0.0, 0.0}); };
        return integrate_minus_hole(g, c[0] - h2, c[0] + h2, eps, {-1.0, 1.0}, q);
    }
    QuadratureSpec inner = q;
    inner.rel_tol = q.rel_tol * 0.1;
    if (dim == 2) {
        auto outer = [&](double z0) {
            auto g = [&](double z1) { return f({z0, z1, 0.0}); };
            const double w = safe_sqrt(eps * eps - z0 * z0);
            return integrate_minus_hole(g, c[1] - h2, c[1] + h2, w, symmetric_points(safe_sqrt(1.0 - z0 * z0)), inner);
        };
        return gauss_kronrod(outer, c[0] - h2, c[0] + h2, q, {-eps, eps, -1.0, 1.0}).value;
    }
    QuadratureSpec innermost = inner;
    innermost.rel_tol = inner.rel_tol * 0.1;
    auto outer = [&](double z0) {
        auto middle = [&](double z1) {
            auto g = [&](double z2) { return f({z0, z1, z2}); };
            const double w = safe_sqrt(eps * eps - z0 * z0 - z1 * z1);
            return integrate_minus_hole(g, c[2] - h2, c[2] + h2, w,
                                        symmetric_points(safe_sqrt(1.0 - z0 * z0 - z1 * z1)), innermost);
        };
        std::vector<double> bp = symmetric_points(safe_sqrt(eps * eps - z0 * z0));
        for (double v : symmetric_points(safe_sqrt(1.0 - z0 * z0))) bp.push_back(v);
        return gauss_kronrod(middle, c[1] - h2, c[1] + h2, inner, bp).value;
    };
    return gauss_kronrod(outer, c[0] - h2, c[0] + h2, q, {-eps, eps, -1.0, 1.0}).value;
}

namespace {

/// Lattice offset (in cells) of the first point beyond eps on the ray through `off`.
std::array<int, 3> push_target(const std::array<int, 3>& off, double h, double eps, int dim) {
    double len = 0.0;
    for (int a = 0; a < dim; ++a) len += static_cast<double>(off[a]) * off[a];
    len = std::sqrt(len);
    for (int s = 1; s < 64; ++s) {
        const double scale = (len + 0.5 * s) / len;
        std::array<int, 3> cand{0, 0, 0};
        double r2 = 0.0;
        for (int a = 0; a < dim; ++a) {
            cand[a] = static_cast<int>(std::lround(off[a] * scale));
            r2 += static_cast<double>(cand[a]) * cand[a];
        }
        if (std::sqrt(r2) * h > eps) return cand;
    }
    throw InternalError("push target search did not leave the truncation ball");
}

bool inside_eps(const std::array<int, 3>& off, double h, double eps, int dim) {
    double r2 = 0.0;
    for (int a = 0; a < dim; ++a) r2 += static_cast<double>(off[a]) * off[a];
    return std::sqrt(r2) * h <= eps;
}

} // namespace

std::size_t GridKernel::offset_flat(const std::array<int, 3>& off) const {
    std::size_t idx = 0, stride = 1;
    for (int a = 0; a < 3; ++a) {
        const int shift = (offset_count_[a] - 1) / 2;
        idx += stride * static_cast<std::size_t>(off[a] + shift);
        stride *= offset_count_[a];
    }
    return idx;
}

double GridKernel::offset_value(const std::array<int, 3>& off) const {
    for (int a = 0; a < 3; ++a) {
        const int shift = (offset_count_[a] - 1) / 2;
        if (off[a] < -shift || off[a] > shift) return 0.0;
    }
    return offsets_[offset_flat(off)];
}

double GridKernel::value(std::size_t x, std::size_t y) const {
    if (!ti_) return dense_[x * grid_.size() + y];
    const auto mx = grid_.multi_index(x), my = grid_.multi_index(y);
    return offset_value({my[0] - mx[0], my[1] - mx[1], my[2] - mx[2]});
}

std::vector<double> GridKernel::row(std::size_t x) const {
    const std::size_t n = grid_.size();
    std::vector<double> out(n);
    if (!ti_) {
        std::copy(dense_.begin() + x * n, dense_.begin() + (x + 1) * n, out.begin());
        return out;
    }
    for (std::size_t y = 0; y < n; ++y) out[y] = value(x, y);
    return out;
}

double GridKernel::row_mass(std::size_t x) const {
    const auto r = row(x);
    double s = 0.0;
    for (double v : r) s += v;
    return s * grid_.cell_volume();
}

void GridKernel::correlate(const std::vector<double>& v, std::vector<double>& out, bool transpose) const {
    const std::size_t n = grid_.size();
    const double vol = grid_.cell_volume();
    out.assign(n, 0.0);
    if (!ti_) {
        if (!transpose) {
            detail::parallel_for(n, [&](std::size_t x) {
                const double* rowp = dense_.data() + x * n;
                double s = 0.0;
                for (std::size_t y = 0; y < n; ++y) s += rowp[y] * v[y];
                out[x] = s * vol;
            }, 16);
        } else {
            detail::parallel_for(n, [&](std::size_t y) {
                double s = 0.0;
                for (std::size_t x = 0; x < n; ++x) s += v[x] * dense_[x * n + y];
                out[y] = s * vol;
            }, 16);
        }
        return;
    }
    if (use_fft_ && fft_) {
        auto& plan = *fft_;
        // FFTW's new-array execute interface is thread-safe; buffers are per call
        std::vector<double> buf(plan.real_size, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto m = grid_.multi_index(i);
            buf[m[0] + static_cast<std::size_t>(plan.padded[0]) * (m[1] + static_cast<std::size_t>(plan.padded[1]) * m[2])] = v[i];
        }
        std::vector<std::complex<double>> spec(plan.complex_size);
        fftw_execute_dft_r2c(plan.forward, buf.data(), reinterpret_cast<fftw_complex*>(spec.data()));
        const auto& kh = transpose ? plan.kernel_hat : plan.reflected_hat;
        for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= kh[i];
        fftw_execute_dft_c2r(plan.backward, reinterpret_cast<fftw_complex*>(spec.data()), buf.data());
        const double norm = vol / static_cast<double>(plan.real_size);
        for (std::size_t i = 0; i < n; ++i) {
            const auto m = grid_.multi_index(i);
            out[i] = norm * buf[m[0] + static_cast<std::size_t>(plan.padded[0]) * (m[1] + static_cast<std::size_t>(plan.padded[1]) * m[2])];
        }
        return;
    }
    const auto cnt = grid_.count;
    const int sign = transpose ? -1 : 1;
    detail::parallel_for(n, [&](std::size_t x) {
        const auto mx = grid_.multi_index(x);
        double s = 0.0;
        for (int k2 = 0; k2 < cnt[2]; ++k2) {
            for (int k1 = 0; k1 < cnt[1]; ++k1) {
                const std::size_t base = grid_.flat_index({0, k1, k2});
                const int o1 = sign * (k1 - mx[1]), o2 = sign * (k2 - mx[2]);
                if (!transpose) {
                    // offsets y - x run contiguously over k0
                    const double* kp = offsets_.data() + offset_flat({-mx[0], o1, o2});
                    const double* vp = v.data() + base;
                    for (int k0 = 0; k0 < cnt[0]; ++k0) s += kp[k0] * vp[k0];
                } else {
                    // offsets x - z decrease along k0
                    const double* kp = offsets_.data() + offset_flat({mx[0], o1, o2});
                    const double* vp = v.data() + base;
                    for (int k0 = 0; k0 < cnt[0]; ++k0) s += kp[-k0] * vp[k0];
                }
            }
        }
        out[x] = s * vol;
    }, 32);
}

void GridKernel::apply(const std::vector<double>& v, std::vector<double>& out) const { correlate(v, out, false); }

void GridKernel::apply_transpose(const std::vector<double>& r, std::vector<double>& out) const { correlate(r, out, true); }

GridKernel build_f_eps(const JumpKernel& kernel, const Grid& grid, const QuadratureSpec& quad, double tail_cap,
                       const std::vector<std::size_t>& checked_in) {
    const ModelParams& prm = kernel.params();
    const double eps = prm.eps, h = grid.spacing;
    const int dim = prm.dim;
    if (grid.dim != dim) throw PreconditionError("grid and kernel dimensions differ");
    if (h > 0.25 * eps * (1.0 + 1e-12)) throw PreconditionError("grid spacing must not exceed eps/4");
    for (int a = 0; a < dim; ++a) {
        if ((grid.count[a] - 1) * h <= eps + h) throw BoxTooSmallError("grid box does not extend beyond eps");
    }

    GridKernel gk(kernel, grid);
    gk.ti_ = kernel.flags().translation_invariant;
    const std::size_t n = grid.size();
    const double vol = grid.cell_volume();
    QuadratureSpec cell_q = quad;
    cell_q.abs_tol = std::numeric_limits<double>::min();
    cell_q.max_subdivisions = std::min(quad.max_subdivisions, 200);

    std::vector<std::size_t> checked = checked_in;
    if (checked.empty()) checked.push_back(grid.locate({0.0, 0.0, 0.0}));

    if (gk.ti_) {
        for (int a = 0; a < 3; ++a) gk.offset_count_[a] = a < dim ? 2 * grid.count[a] - 1 : 1;
        const std::size_t total = static_cast<std::size_t>(gk.offset_count_[0]) * gk.offset_count_[1] * gk.offset_count_[2];
        gk.offsets_.assign(total, 0.0);
        const Point origin{0.0, 0.0, 0.0};
        PointFn f = [&](const Point& z) { return kernel(origin, z); };
        const bool iso = kernel.has_radial();
        if (iso) {
            f = [&](const Point& z) { return kernel.radial(norm(z)); };
        }
        const std::array<int, 3> half{(gk.offset_count_[0] - 1) / 2, (gk.offset_count_[1] - 1) / 2, (gk.offset_count_[2] - 1) / 2};
        std::vector<std::array<int, 3>> offs;
        offs.reserve(total);
        for (int j2 = -half[2]; j2 <= half[2]; ++j2)
            for (int j1 = -half[1]; j1 <= half[1]; ++j1)
                for (int j0 = -half[0]; j0 <= half[0]; ++j0) {
                    // isotropic kernels: compute one representative per symmetry orbit
                    if (iso && !(j0 >= 0 && j1 >= 0 && j2 >= 0 && (dim < 2 || j0 >= j1) && (dim < 3 || j1 >= j2))) continue;
                    offs.push_back({j0, j1, j2});
                }
        std::vector<double> masses(offs.size());
        detail::parallel_for(offs.size(), [&](std::size_t i) {
            const Point c{offs[i][0] * h, offs[i][1] * h, offs[i][2] * h};
            masses[i] = cell_integral(f, c, h, eps, dim, cell_q) / vol;
        }, 16);
        std::vector<double> raw(total, 0.0);
        for (std::size_t i = 0; i < offs.size(); ++i) {
            const auto& o = offs[i];
            if (!iso) {
                raw[gk.offset_flat(o)] = masses[i];
                continue;
            }
            // spread over sign flips and coordinate permutations
            std::array<int, 3> p{o[0], o[1], o[2]};
            std::sort(p.begin(), p.begin() + dim);
            do {
                for (int sgn = 0; sgn < (1 << dim); ++sgn) {
                    std::array<int, 3> q{0, 0, 0};
                    for (int a = 0; a < dim; ++a) q[a] = (sgn >> a & 1) ? -p[a] : p[a];
                    raw[gk.offset_flat(q)] = masses[i];
                }
            } while (std::next_permutation(p.begin(), p.begin() + dim));
        }
        gk.offsets_ = raw;
        for (int j2 = -half[2]; j2 <= half[2]; ++j2)
            for (int j1 = -half[1]; j1 <= half[1]; ++j1)
                for (int j0 = -half[0]; j0 <= half[0]; ++j0) {
                    const std::array<int, 3> o{j0, j1, j2};
                    if (!inside_eps(o, h, eps, dim)) continue;
                    const double m = raw[gk.offset_flat(o)];
                    if (m == 0.0) continue;
                    const auto t = push_target(o, h, eps, dim);
                    for (int a = 0; a < dim; ++a)
                        if (std::abs(t[a]) > half[a]) throw BoxTooSmallError("grid box too small to hold the push-out target");
                    gk.offsets_[gk.offset_flat(o)] -= m;
                    gk.offsets_[gk.offset_flat(t)] += m;
                }

        const double b = tail_mass(kernel, origin, eps, quad);
        double offsets_mass = 0.0;
        for (double v : gk.offsets_) offsets_mass += v;
        offsets_mass *= vol;
        double far_tail;
        if (dim == 1) {
            const double a = (grid.count[0] - 0.5) * h;
            const PowerTail env{prm.M, prm.alpha};
            auto right = [&](double r) { return iso ? kernel.radial(r) : kernel(origin, {r, 0.0, 0.0}); };
            auto left = [&](double r) { return iso ? kernel.radial(r) : kernel(origin, {-r, 0.0, 0.0}); };
            far_tail = integrate_to_infinity(right, a, quad, env, {1.0}).value +
                       integrate_to_infinity(left, a, quad, env, {1.0}).value;
        } else {
            far_tail = std::max(0.0, b - offsets_mass);
        }

        // in-box row sums through a summed-area table over the offset array
        const auto oc = gk.offset_count_;
        std::vector<double> sat(total, 0.0);
        for (int j2 = 0; j2 < oc[2]; ++j2)
            for (int j1 = 0; j1 < oc[1]; ++j1)
                for (int j0 = 0; j0 < oc[0]; ++j0) {
                    const std::size_t i = j0 + static_cast<std::size_t>(oc[0]) * (j1 + static_cast<std::size_t>(oc[1]) * j2);
                    sat[i] = gk.offsets_[i];
                }
        auto at = [&](int a0, int a1, int a2) -> double& {
            return sat[a0 + static_cast<std::size_t>(oc[0]) * (a1 + static_cast<std::size_t>(oc[1]) * a2)];
        };
        for (int j2 = 0; j2 < oc[2]; ++j2)
            for (int j1 = 0; j1 < oc[1]; ++j1)
                for (int j0 = 1; j0 < oc[0]; ++j0) at(j0, j1, j2) += at(j0 - 1, j1, j2);
        for (int j2 = 0; j2 < oc[2]; ++j2)
            for (int j1 = 1; j1 < oc[1]; ++j1)
                for (int j0 = 0; j0 < oc[0]; ++j0) at(j0, j1, j2) += at(j0, j1 - 1, j2);
        for (int j2 = 1; j2 < oc[2]; ++j2)
            for (int j1 = 0; j1 < oc[1]; ++j1)
                for (int j0 = 0; j0 < oc[0]; ++j0) at(j0, j1, j2) += at(j0, j1, j2 - 1);
        auto prefix = [&](int a0, int a1, int a2) -> double {
            if (a0 < 0 || a1 < 0 || a2 < 0) return 0.0;
            return at(a0, a1, a2);
        };
        auto box_sum = [&](std::array<int, 3> lo, std::array<int, 3> hi) {
            double s = 0.0;
            for (int c = 0; c < 8; ++c) {
                const int i0 = (c & 1) ? lo[0] - 1 : hi[0];
                const int i1 = (c & 2) ? lo[1] - 1 : hi[1];
                const int i2 = (c & 4) ? lo[2] - 1 : hi[2];
                const int parity = ((c & 1) + ((c >> 1) & 1) + ((c >> 2) & 1)) % 2;
                s += (parity ? -1.0 : 1.0) * prefix(i0, i1, i2);
            }
            return s;
        };

        gk.b_eps_.assign(n, b);
        gk.out_of_box_.assign(n, 0.0);
        for (std::size_t x = 0; x < n; ++x) {
            const auto m = grid.multi_index(x);
            std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
            for (int a = 0; a < 3; ++a) {
                const int shift = (oc[a] - 1) / 2;
                // offsets y - x with y in the box, shifted to array indices
                lo[a] = -m[a] + shift;
                hi[a] = grid.count[a] - 1 - m[a] + shift;
            }
            const double in_box = box_sum(lo, hi) * vol;
            gk.out_of_box_[x] = std::max(0.0, offsets_mass - in_box) + far_tail;
        }
        gk.max_row_defect_ = std::abs(offsets_mass + far_tail - b) / b;
        gk.b_bar_ = gk.b_low_ = b;

        const bool want_fft = (dim >= 2 && n > 4096) || (dim == 1 && n > 20000);
        if (want_fft) {
            auto plan = std::make_shared<detail::FftPlan>();
            plan->real_size = 1;
            for (int a = 0; a < 3; ++a) {
                plan->padded[a] = a < dim ? 3 * grid.count[a] - 2 : 1;
                plan->real_size *= plan->padded[a];
            }
            plan->complex_size = plan->real_size / plan->padded[dim - 1] * (plan->padded[dim - 1] / 2 + 1);
            std::vector<double> kbuf(plan->real_size, 0.0), rbuf(plan->real_size, 0.0);
            const auto P = plan->padded;
            for (int j2 = -half[2]; j2 <= half[2]; ++j2)
                for (int j1 = -half[1]; j1 <= half[1]; ++j1)
                    for (int j0 = -half[0]; j0 <= half[0]; ++j0) {
                        const double v = gk.offsets_[gk.offset_flat({j0, j1, j2})];
                        auto wrap = [](int j, int p) { return static_cast<std::size_t>(((j % p) + p) % p); };
                        // FFTW expects row-major with the last listed dimension fastest; we list axes reversed
                        kbuf[wrap(j0, P[0]) + P[0] * (wrap(j1, P[1]) + P[1] * wrap(j2, P[2]))] = v;
                        rbuf[wrap(-j0, P[0]) + P[0] * (wrap(-j1, P[1]) + P[1] * wrap(-j2, P[2]))] = v;
                    }
            // dims in FFTW order: slowest first; our layout has axis 0 fastest
            int dims[3];
            for (int a = 0; a < dim; ++a) dims[a] = P[dim - 1 - a];
            plan->complex_size = plan->real_size / P[0] * (P[0] / 2 + 1);
            plan->kernel_hat.resize(plan->complex_size);
            plan->reflected_hat.resize(plan->complex_size);
            {
                std::lock_guard<std::mutex> lock(fftw_planner_mutex());
                std::vector<double> tmp(plan->real_size);
                std::vector<std::complex<double>> ctmp(plan->complex_size);
                plan->forward = fftw_plan_dft_r2c(dim, dims, tmp.data(), reinterpret_cast<fftw_complex*>(ctmp.data()), FFTW_ESTIMATE);
                plan->backward = fftw_plan_dft_c2r(dim, dims, reinterpret_cast<fftw_complex*>(ctmp.data()), tmp.data(), FFTW_ESTIMATE);
            }
            fftw_execute_dft_r2c(plan->forward, kbuf.data(), reinterpret_cast<fftw_complex*>(plan->kernel_hat.data()));
            fftw_execute_dft_r2c(plan->forward, rbuf.data(), reinterpret_cast<fftw_complex*>(plan->reflected_hat.data()));
            gk.fft_ = plan;
            gk.use_fft_ = true;
        }
    } else {
        if (n > kDenseGridCap) {
            std::ostringstream os;
            os << "kernels without translation invariance are stored densely; grid has " << n
               << " points, cap is " << kDenseGridCap;
            throw PreconditionError(os.str());
        }
        gk.dense_.assign(n * n, 0.0);
        gk.b_eps_.assign(n, 0.0);
        gk.out_of_box_.assign(n, 0.0);
        std::vector<double> defects(n, 0.0);
        detail::parallel_for(n, [&](std::size_t xi) {
            const Point x = grid.point(xi);
            const auto mx = grid.multi_index(xi);
            PointFn f = [&](const Point& z) { return kernel(x, x + z); };
            double* rowp = gk.dense_.data() + xi * n;
            double pushed_out = 0.0;
            for (std::size_t yi = 0; yi < n; ++yi) {
                const Point c = grid.point(yi) - x;
                rowp[yi] = cell_integral(f, c, h, eps, dim, cell_q) / vol;
            }
            for (std::size_t yi = 0; yi < n; ++yi) {
                const auto my = grid.multi_index(yi);
                const std::array<int, 3> o{my[0] - mx[0], my[1] - mx[1], my[2] - mx[2]};
                if (rowp[yi] == 0.0 || !inside_eps(o, h, eps, dim)) continue;
                const auto t = push_target(o, h, eps, dim);
                std::array<int, 3> mt{mx[0] + t[0], mx[1] + t[1], mx[2] + t[2]};
                bool inside = true;
                for (int a = 0; a < dim; ++a) inside = inside && mt[a] >= 0 && mt[a] < grid.count[a];
                if (inside) rowp[grid.flat_index(mt)] += rowp[yi];
                else pushed_out += rowp[yi] * vol;
                rowp[yi] = 0.0;
            }
            double in_box = 0.0;
            for (std::size_t yi = 0; yi < n; ++yi) in_box += rowp[yi];
            in_box *= vol;
            const double b = tail_mass(kernel, x, eps, quad);
            gk.b_eps_[xi] = b;
            double out;
            if (dim == 1) {
                const PowerTail env{prm.M, prm.alpha};
                auto right = [&](double r) { return kernel(x, {grid.upper_edge(0) + r, 0.0, 0.0}); };
                auto left = [&](double r) { return kernel(x, {grid.lower_edge(0) - r, 0.0, 0.0}); };
                // distances from x to the edges are at least h/2, so the envelope tail stays valid
                const double dr = grid.upper_edge(0) - x[0], dl = x[0] - grid.lower_edge(0);
                auto right_r = [&](double r) { return right(r - dr); };
                auto left_r = [&](double r) { return left(r - dl); };
                out = integrate_to_infinity(right_r, std::max(dr, eps), quad, env, {1.0}).value +
                      integrate_to_infinity(left_r, std::max(dl, eps), quad, env, {1.0}).value + pushed_out;
                defects[xi] = std::abs(in_box + out - b) / b;
            } else {
                out = std::max(0.0, b - in_box);
            }
            gk.out_of_box_[xi] = out;
        }, 1);
        gk.b_bar_ = *std::max_element(gk.b_eps_.begin(), gk.b_eps_.end());
        gk.b_low_ = *std::min_element(gk.b_eps_.begin(), gk.b_eps_.end());
        gk.max_row_defect_ = *std::max_element(defects.begin(), defects.end());
    }

    for (std::size_t c : checked) {
        if (c >= n) throw PreconditionError("checked point index outside the grid");
        gk.max_tail_fraction_ = std::max(gk.max_tail_fraction_, gk.out_of_box_[c] / gk.b_bar_);
    }
    if (gk.max_tail_fraction_ > tail_cap) {
        std::ostringstream os;
        os << "box too small: " << 100.0 * gk.max_tail_fraction_ << "% of b_bar leaves the box from an evaluation point"
           << " (cap " << 100.0 * tail_cap << "%); enlarge the box";
        throw BoxTooSmallError(os.str());
    }
    if (gk.max_row_defect_ > 1e-6) {
        std::ostringstream os;
        os << "row mass defect " << gk.max_row_defect_ << " exceeds 1e-6; cell quadrature too coarse";
        throw InternalError(os.str());
    }
    return gk;
}

} // namespace stabledom
