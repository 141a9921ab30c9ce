#include "stabledom/iterated.hpp"

#include "parallel.hpp"
#include "stabledom/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace stabledom {

IteratedKernels::IteratedKernels(std::shared_ptr<const GridKernel> base, std::vector<std::size_t> sources)
    : base_(std::move(base)), sources_(std::move(sources)) {
    if (!base_) throw PreconditionError("iterated kernels need a base kernel");
    if (sources_.empty()) sources_.push_back(base_->grid().locate({0.0, 0.0, 0.0}));
    for (std::size_t s : sources_)
        if (s >= base_->grid().size()) throw PreconditionError("source index outside the grid");
}

std::size_t IteratedKernels::slot_of(std::size_t grid_index) const {
    const auto it = std::find(sources_.begin(), sources_.end(), grid_index);
    if (it == sources_.end()) throw PreconditionError("point is not among the iterated sources");
    return static_cast<std::size_t>(it - sources_.begin());
}

const std::vector<double>& IteratedKernels::normalized_row(int n, std::size_t slot) const {
    if (n < 1 || n > levels()) throw PreconditionError("level not available");
    return rows_[n - 1].at(slot);
}

double IteratedKernels::leak(int n, std::size_t slot) const {
    if (n < 1 || n > levels()) throw PreconditionError("level not available");
    return leaks_[n - 1].at(slot);
}

double IteratedKernels::value(int n, std::size_t slot, std::size_t y) const {
    return normalized_row(n, slot)[y] * std::pow(base_->b_bar(), n);
}

double IteratedKernels::atom_ratio(std::size_t slot) const {
    return base_->atom_weight(sources_.at(slot)) / base_->b_bar();
}

double IteratedKernels::max_certificate_error() const {
    double m = 0.0;
    for (const auto& c : certificates_) m = std::max(m, c.rel_error);
    return m;
}

void IteratedKernels::extend_to(int n, double cert_tol) {
    if (n < 1) throw PreconditionError("number of levels must be at least 1");
    const GridKernel& gk = *base_;
    const std::size_t size = gk.grid().size();
    const double vol = gk.grid().cell_volume();
    const double bbar = gk.b_bar();
    if (static_cast<std::size_t>(n) * sources_.size() * size > budget_) {
        std::ostringstream os;
        os << n << " levels on " << size << " points for " << sources_.size()
           << " sources exceed the memory budget of " << budget_ << " values";
        throw PreconditionError(os.str());
    }
    // (b_bar - b(y)) / b_bar, the diagonal weight of the recursion
    std::vector<double> diag(size);
    for (std::size_t y = 0; y < size; ++y) diag[y] = gk.atom_weight(y) / bbar;
    std::vector<double> out_ratio(size);
    for (std::size_t y = 0; y < size; ++y) out_ratio[y] = gk.out_of_box(y) / bbar;

    auto certify = [&](int level, std::size_t slot) {
        const auto& g = rows_[level - 1][slot];
        double s = 0.0;
        for (double v : g) s += v;
        MassCertificate c;
        c.level = level;
        c.source = sources_[slot];
        c.in_box = s * vol;
        c.leaked = leaks_[level - 1][slot];
        c.expected = 1.0 - std::pow(atom_ratio(slot), level);
        c.rel_error = c.expected > 0.0 ? std::abs(c.in_box + c.leaked - c.expected) / c.expected
                                       : std::abs(c.in_box + c.leaked);
        certificates_.push_back(c);
        if (c.rel_error > cert_tol) {
            std::ostringstream os;
            os << "mass certificate at level " << level << " off by " << c.rel_error << " (tolerance " << cert_tol
               << "); refine the grid or enlarge the box";
            throw MassCertificateError(os.str());
        }
    };

    while (levels() < n) {
        const int cur = levels();
        std::vector<std::vector<double>> next(sources_.size());
        std::vector<double> next_leak(sources_.size());
        for (std::size_t slot = 0; slot < sources_.size(); ++slot) {
            const std::size_t s = sources_[slot];
            std::vector<double> base_row = gk.row(s);
            for (double& v : base_row) v /= bbar;
            if (cur == 0) {
                next[slot] = std::move(base_row);
                next_leak[slot] = out_ratio[s];
                continue;
            }
            const auto& g = rows_[cur - 1][slot];
            const double an = std::pow(atom_ratio(slot), cur);
            std::vector<double> conv;
            gk.apply_transpose(g, conv);
            std::vector<double>& row = next[slot];
            row.resize(size);
            for (std::size_t y = 0; y < size; ++y) {
                const double v = conv[y] / bbar + diag[y] * g[y] + an * base_row[y];
                // FFT round-off can leave tiny negatives where the row is zero
                row[y] = v > 0.0 ? v : 0.0;
            }
            double leak_step = 0.0;
            for (std::size_t z = 0; z < size; ++z) leak_step += g[z] * out_ratio[z];
            next_leak[slot] = leaks_[cur - 1][slot] + leak_step * vol + an * out_ratio[s];
        }
        rows_.push_back(std::move(next));
        leaks_.push_back(std::move(next_leak));
        for (std::size_t slot = 0; slot < sources_.size(); ++slot) certify(levels(), slot);
    }
}

IteratedKernels iterate_kernel(IteratedKernels ik, int up_to, double cert_tol) {
    ik.extend_to(up_to, cert_tol);
    return ik;
}

double gamma_power_apply_normalized(const IteratedKernels& ik, const std::vector<double>& phi, double phi_exterior,
                                    int n, std::size_t x) {
    const std::size_t slot = ik.slot_of(x);
    if (phi.size() != ik.base().grid().size()) throw PreconditionError("grid function has the wrong size");
    const double a = ik.atom_ratio(slot);
    if (n == 0) return phi[x];
    const auto& g = ik.normalized_row(n, slot);
    double s = 0.0;
    for (std::size_t y = 0; y < g.size(); ++y) s += g[y] * phi[y];
    return s * ik.base().grid().cell_volume() + ik.leak(n, slot) * phi_exterior + std::pow(a, n) * phi[x];
}

double gamma_power_apply(const IteratedKernels& ik, const std::vector<double>& phi, double phi_exterior, int n,
                         std::size_t x) {
    return std::pow(ik.base().b_bar(), n) * gamma_power_apply_normalized(ik, phi, phi_exterior, n, x);
}

} // namespace stabledom
