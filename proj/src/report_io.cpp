#include "stabledom/report_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace stabledom {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    return out;
}

void write_y_header(std::ostream& out, int dim) {
    if (dim == 1) {
        out << "y";
        return;
    }
    for (int k = 0; k < dim; ++k) out << (k ? "," : "") << "y" << k + 1;
}

void write_point(std::ostream& out, const Point& p, int dim) {
    for (int k = 0; k < dim; ++k) out << (k ? "," : "") << format_number(p[k]);
}

Json point_json(const Point& p, int dim) {
    Json a = Json::array();
    for (int k = 0; k < dim; ++k) a.push_back(p[k]);
    return a;
}

template <typename Map>
Json map_json(const Map& m) {
    Json o = Json::object();
    for (const auto& [k, v] : m) o[k] = v;
    return o;
}

} // namespace

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

Json to_json(const AssumptionReport& r) {
    Json j;
    j["condition"] = r.condition;
    j["verdict"] = to_string(r.verdict);
    j["worst_ratio"] = r.worst_ratio;
    j["worst_location"] = r.worst_location;
    j["constants"] = map_json(r.constants);
    j["constants_are"] = "empirical lower witnesses";
    j["samples_checked"] = r.samples_checked;
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

Json to_json(const BoundReport& r) {
    Json j;
    j["target"] = r.target;
    j["verdict"] = to_string(r.verdict);
    j["samples"] = r.samples;
    j["max_ratio"] = r.max_ratio;
    j["fitted"] = map_json(r.fitted);
    j["sup_on_boundary"] = r.sup_on_boundary;
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

Json to_json(const MainTStudy& s) {
    Json j;
    j["verdict"] = to_string(s.verdict);
    j["t"] = s.ts;
    j["sup_base"] = s.sup_base;
    j["sup_half_eps"] = s.sup_half_eps;
    j["sup_fine_grid"] = s.sup_fine_grid;
    j["on_boundary"] = s.on_boundary;
    j["C1"] = s.C1;
    j["C2"] = s.C2;
    j["max_eps_change"] = s.max_eps_change;
    j["max_grid_change"] = s.max_grid_change;
    j["finite"] = s.finite;
    if (!s.note.empty()) j["note"] = s.note;
    return j;
}

Json to_json(const MassCertificate& c) {
    Json j;
    j["level"] = c.level;
    j["source"] = c.source;
    j["in_box"] = c.in_box;
    j["leaked"] = c.leaked;
    j["expected"] = c.expected;
    j["rel_error"] = c.rel_error;
    return j;
}

Json to_json(const GeneratorConvergenceReport& r) {
    Json j;
    j["verdict"] = to_string(r.verdict);
    j["eps"] = r.eps;
    j["gaps"] = r.gaps;
    j["ratios"] = r.ratios;
    j["monotone"] = r.monotone;
    j["worst_ratio"] = r.worst_ratio;
    return j;
}

Json to_json(const SeriesComparison& c) {
    Json j;
    j["verdict"] = to_string(c.verdict);
    j["occupied_bins"] = c.occupied_bins;
    j["fraction_within_3sigma"] = c.fraction_within_3sigma;
    j["max_abs_z"] = c.max_abs_z;
    j["atom_z"] = c.atom_z;
    if (!c.note.empty()) j["note"] = c.note;
    return j;
}

Json to_json(const SweepRow& r) {
    Json j;
    j["m"] = r.cell.m;
    j["beta"] = r.cell.beta;
    j["gamma"] = r.cell.gamma;
    j["alpha"] = r.cell.alpha;
    j["d"] = r.cell.dim;
    j["predicted"] = to_string(r.predicted);
    j["observed"] = to_string(r.observed);
    j["matches"] = r.matches;
    j["max_ratio"] = r.max_ratio;
    j["growth_factor"] = r.growth_factor;
    if (std::isfinite(r.slope_exponent)) j["slope_exponent"] = r.slope_exponent;
    j["lags"] = r.lags;
    j["ratios"] = r.ratios;
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

Json summary_json(const DensityResult& d) {
    Json j;
    j["t"] = d.t;
    j["eps"] = d.eps;
    j["alpha"] = d.alpha;
    j["x"] = point_json(d.x, d.grid.dim);
    j["grid_points"] = d.grid.size();
    j["spacing"] = d.grid.spacing;
    j["atom"] = d.atom;
    j["b_source"] = d.b_source;
    j["exterior_mass"] = d.exterior_mass;
    j["total_mass"] = d.total_mass();
    j["truncation_N"] = d.truncation_N;
    j["truncation_bound"] = d.truncation_bound;
    return j;
}

Json summary_json(const EmpiricalDensity& e) {
    Json j;
    j["t"] = e.t;
    j["eps"] = e.eps;
    j["x0"] = point_json(e.x0, e.dim);
    j["n_paths"] = e.n_paths;
    j["bins"] = e.bins.size();
    j["atom_estimate"] = e.atom_estimate;
    j["atom_std_error"] = e.atom_std_error;
    j["outside_mass"] = e.outside_mass;
    j["overflow_paths"] = e.overflow_paths;
    j["proposals"] = e.proposals;
    j["accepted"] = e.accepted;
    j["total_mass"] = e.total_mass();
    return j;
}

void write_json(const std::string& path, const Json& j) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
}

void write_density_csv(const std::string& path, const DensityResult& d, const PhiProfile& phi) {
    auto out = open_out(path);
    const int dim = d.grid.dim;
    write_y_header(out, dim);
    out << ",q,bound,ratio\n";
    for (std::size_t i = 0; i < d.grid.size(); ++i) {
        const Point y = d.grid.point(i);
        const double bound = maint_envelope(d.t, distance(y, d.x), d.alpha, dim, phi);
        write_point(out, y, dim);
        out << ',' << format_number(d.q[i]) << ',' << format_number(bound) << ',' << format_number(d.q[i] / bound)
            << '\n';
    }
}

void write_empirical_csv(const std::string& path, const EmpiricalDensity& e, double alpha, const PhiProfile& phi) {
    auto out = open_out(path);
    write_y_header(out, e.dim);
    out << ",q,bound,ratio\n";
    for (const auto& b : e.bins) {
        const double q = b.mass / b.volume;
        const double bound = maint_envelope(e.t, distance(b.center, e.x0), alpha, e.dim, phi);
        write_point(out, b.center, e.dim);
        out << ',' << format_number(q) << ',' << format_number(bound) << ',' << format_number(q / bound) << '\n';
    }
}

void write_comparison_csv(const std::string& path, const EmpiricalDensity& e, const SeriesComparison& c) {
    auto out = open_out(path);
    write_y_header(out, e.dim);
    out << ",empirical,series,z\n";
    // z-scores are stored for occupied bins only, in bin order
    std::size_t zi = 0;
    for (std::size_t i = 0; i < e.bins.size(); ++i) {
        const auto& b = e.bins[i];
        const double series = i < c.expected_mass.size() ? c.expected_mass[i] : std::nan("");
        write_point(out, b.center, e.dim);
        out << ',' << format_number(b.mass) << ',' << format_number(series) << ',';
        if (b.count > 0 && zi < c.z_scores.size()) out << format_number(c.z_scores[zi++]);
        out << '\n';
    }
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
    auto out = open_out(path);
    out << "m,beta,gamma,alpha,d,predicted,observed,max_ratio,growth_factor\n";
    for (const auto& r : rows) {
        out << format_number(r.cell.m) << ',' << format_number(r.cell.beta) << ',' << format_number(r.cell.gamma) << ','
            << format_number(r.cell.alpha) << ',' << r.cell.dim << ',' << to_string(r.predicted) << ','
            << to_string(r.observed) << ',' << format_number(r.max_ratio) << ',' << format_number(r.growth_factor)
            << '\n';
    }
}

void write_certificates_csv(const std::string& path, const std::vector<MassCertificate>& certs) {
    auto out = open_out(path);
    out << "level,source,in_box,leaked,expected,rel_error\n";
    for (const auto& c : certs) {
        out << c.level << ',' << c.source << ',' << format_number(c.in_box) << ',' << format_number(c.leaked) << ','
            << format_number(c.expected) << ',' << format_number(c.rel_error) << '\n';
    }
}

void write_table_csv(const std::string& path, const std::vector<std::string>& columns,
                     const std::vector<std::vector<double>>& table) {
    auto out = open_out(path);
    for (std::size_t k = 0; k < columns.size(); ++k) out << (k ? "," : "") << columns[k];
    out << '\n';
    for (const auto& row : table) {
        for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << format_number(row[k]);
        out << '\n';
    }
}

} // namespace stabledom
