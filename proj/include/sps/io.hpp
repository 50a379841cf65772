#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sps/energy.hpp"
#include "sps/scaling.hpp"
#include "sps/solvers.hpp"

namespace sps {

using Json = nlohmann::ordered_json;

Json to_json(const EnergyBreakdown& e);
Json to_json(const IdentityResiduals& r);
Json to_json(const SolveReport& r);
Json to_json(const AxiomReport& r);
Json to_json(const FamilyReport& r);
Json to_json(const Classification& c);
Json to_json(const SolverConfig& c);
Json grid_to_json(const Grid& g);

EnergyBreakdown energy_from_json(const Json& j);
IdentityResiduals residuals_from_json(const Json& j);
/// The grid is rebuilt from the embedded {n, r_max, stretch}.
SolveReport report_from_json(const Json& j);
AxiomReport axiom_report_from_json(const Json& j);
FamilyReport family_report_from_json(const Json& j);
Grid grid_from_json(const Json& j);

/// One row of sweep.csv.
struct SweepRow {
  double param{};
  std::optional<double> energy;
  std::optional<double> lambda;
  std::optional<double> grad_norm;
  std::optional<double> pohozaev_rel;
  bool converged{};
  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

inline constexpr const char* sweep_header = "param,energy,lambda,grad_norm,pohozaev_rel,converged";

/// Empty fields stand for values a failed run could not produce.
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);
/// Throws ShapeError on a malformed table.
std::vector<SweepRow> read_sweep_csv(std::istream& is);

} // namespace sps
