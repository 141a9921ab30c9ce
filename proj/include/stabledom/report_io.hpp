#pragma once

#include "stabledom/assumptions.hpp"
#include "stabledom/bounds.hpp"
#include "stabledom/generator.hpp"
#include "stabledom/iterated.hpp"
#include "stabledom/semigroup.hpp"
#include "stabledom/simulator.hpp"
#include "stabledom/tempered.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace stabledom {

using Json = nlohmann::ordered_json;

/// Shortest decimal that round-trips; "nan", "inf" and "-inf" for non-finite values.
std::string format_number(double v);

Json to_json(const AssumptionReport& r);
Json to_json(const BoundReport& r);
Json to_json(const MainTStudy& s);
Json to_json(const MassCertificate& c);
Json to_json(const GeneratorConvergenceReport& r);
Json to_json(const SeriesComparison& c);
Json to_json(const SweepRow& r);
/// Scalars of a density (no per-point values).
Json summary_json(const DensityResult& d);
Json summary_json(const EmpiricalDensity& e);

/// Pretty-printed with a trailing newline. Throws std::runtime_error when the file cannot be written.
void write_json(const std::string& path, const Json& j);

/// One row per lattice point: y, q, bound, ratio, with bound the heat kernel envelope about the
/// source. In d >= 2 the y column splits into y1..yd.
void write_density_csv(const std::string& path, const DensityResult& d, const PhiProfile& phi);

/// Same schema as write_density_csv with q the empirical bin density (mass / volume) at bin centres.
void write_empirical_csv(const std::string& path, const EmpiricalDensity& e, double alpha, const PhiProfile& phi);

/// y, empirical, series, z per histogram bin; z is empty for unoccupied bins.
void write_comparison_csv(const std::string& path, const EmpiricalDensity& e, const SeriesComparison& c);

/// Columns m, beta, gamma, alpha, d, predicted, observed, max_ratio, growth_factor.
void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);

void write_certificates_csv(const std::string& path, const std::vector<MassCertificate>& certs);

/// The columns and table of a BoundReport.
void write_table_csv(const std::string& path, const std::vector<std::string>& columns,
                     const std::vector<std::vector<double>>& table);

} // namespace stabledom
