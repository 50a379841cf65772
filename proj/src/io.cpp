#include "sps/io.hpp"

#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "format.hpp"
#include "sps/error.hpp"

namespace sps {

using detail::format_double;
using detail::parse_double;

namespace {

// Non-finite values are written as null by the JSON layer; read them back as NaN.
double num(const Json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!j.is_number()) throw ShapeError("json: expected a number, got " + j.dump());
  return j.get<double>();
}

const Json& at(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ShapeError(std::string("json: missing field '") + key + "'");
  return j.at(key);
}

std::vector<std::string> strings(const Json& j) {
  std::vector<std::string> out;
  for (const auto& s : j) out.push_back(s.get<std::string>());
  return out;
}

} // namespace

Json grid_to_json(const Grid& g) {
  return Json{{"n", g.size()}, {"r_max", g.r_max()}, {"stretch", g.stretch()}};
}

Grid grid_from_json(const Json& j) {
  return Grid::make(at(j, "n").get<std::size_t>(), num(at(j, "r_max")), num(at(j, "stretch")));
}

Json to_json(const EnergyBreakdown& e) {
  return Json{{"dirichlet", e.dirichlet}, {"coulomb", e.coulomb}, {"nonlinear", e.nonlinear}, {"total", e.total}};
}

EnergyBreakdown energy_from_json(const Json& j) {
  return {num(at(j, "dirichlet")), num(at(j, "coulomb")), num(at(j, "nonlinear")), num(at(j, "total"))};
}

Json to_json(const IdentityResiduals& r) {
  Json j{{"tested", r.tested}, {"tested_rel", r.tested_rel}, {"pohozaev", r.pohozaev}, {"pohozaev_rel", r.pohozaev_rel}};
  if (r.h12) j["h12"] = *r.h12;
  if (r.h12_rel) j["h12_rel"] = *r.h12_rel;
  return j;
}

IdentityResiduals residuals_from_json(const Json& j) {
  IdentityResiduals r;
  r.tested = num(at(j, "tested"));
  r.tested_rel = num(at(j, "tested_rel"));
  r.pohozaev = num(at(j, "pohozaev"));
  r.pohozaev_rel = num(at(j, "pohozaev_rel"));
  if (j.contains("h12")) r.h12 = num(j.at("h12"));
  if (j.contains("h12_rel")) r.h12_rel = num(j.at("h12_rel"));
  return r;
}

Json to_json(const SolveReport& r) {
  Json j;
  j["method"] = r.method;
  j["converged"] = r.converged;
  j["trivial"] = r.trivial;
  j["iters"] = r.iters;
  j["lambda"] = r.lambda ? Json(*r.lambda) : Json(nullptr);
  j["grad_sup_norm"] = r.grad_sup_norm;
  j["energy"] = to_json(r.energy);
  j["residuals"] = to_json(r.residuals);
  j["warnings"] = r.warnings;
  Json diag = Json::object();
  for (const auto& [k, v] : r.diagnostics) diag[k] = v;
  j["diagnostics"] = diag;
  j["energy_history"] = r.energy_history;
  j["grid"] = grid_to_json(r.solution.grid);
  j["solution"] = r.solution.values;
  return j;
}

SolveReport report_from_json(const Json& j) {
  const Grid g = grid_from_json(at(j, "grid"));
  SolveReport r{RadialFn(g), {}, std::nullopt, 0.0, {}, 0, false, false, {}, "", {}, {}};
  r.method = at(j, "method").get<std::string>();
  r.converged = at(j, "converged").get<bool>();
  r.trivial = at(j, "trivial").get<bool>();
  r.iters = at(j, "iters").get<std::size_t>();
  if (!at(j, "lambda").is_null()) r.lambda = num(j.at("lambda"));
  r.grad_sup_norm = num(at(j, "grad_sup_norm"));
  r.energy = energy_from_json(at(j, "energy"));
  r.residuals = residuals_from_json(at(j, "residuals"));
  r.warnings = strings(at(j, "warnings"));
  for (const auto& [k, v] : at(j, "diagnostics").items()) r.diagnostics[k] = num(v);
  for (const auto& v : at(j, "energy_history")) r.energy_history.push_back(num(v));
  std::vector<double> vals;
  for (const auto& v : at(j, "solution")) vals.push_back(num(v));
  r.solution = RadialFn(g, std::move(vals));
  return r;
}

Json to_json(const AxiomReport& r) {
  Json checks = Json::array();
  for (const auto& c : r.checks)
    checks.push_back(Json{{"name", c.name},
                          {"worst_error", c.worst_error},
                          {"tolerance", c.tolerance},
                          {"passed", c.passed},
                          {"worst_case", c.worst_case}});
  return Json{{"all_passed", r.all_passed()}, {"checks", checks}, {"warnings", r.warnings}, {"failures", r.failures}};
}

AxiomReport axiom_report_from_json(const Json& j) {
  AxiomReport r;
  for (const auto& c : at(j, "checks"))
    r.checks.push_back({at(c, "name").get<std::string>(), num(at(c, "worst_error")), num(at(c, "tolerance")),
                        at(c, "passed").get<bool>(), at(c, "worst_case").get<std::string>()});
  r.warnings = strings(at(j, "warnings"));
  r.failures = strings(at(j, "failures"));
  return r;
}

Json to_json(const FamilyReport& r) {
  Json entries = Json::array();
  for (const auto& e : r.entries)
    entries.push_back(Json{{"t", e.t},
                           {"evaluated", e.evaluated},
                           {"grad_sup_norm", e.grad_sup_norm},
                           {"bound", e.bound},
                           {"i_s_rel_error", e.i_s_rel_error},
                           {"lost_fraction", e.lost_fraction},
                           {"passed", e.passed}});
  return Json{{"all_passed", r.all_passed()}, {"entries", entries}, {"warnings", r.warnings}};
}

FamilyReport family_report_from_json(const Json& j) {
  FamilyReport r;
  for (const auto& e : at(j, "entries"))
    r.entries.push_back({num(at(e, "t")), at(e, "evaluated").get<bool>(), num(at(e, "grad_sup_norm")),
                         num(at(e, "bound")), num(at(e, "i_s_rel_error")), num(at(e, "lost_fraction")),
                         at(e, "passed").get<bool>()});
  r.warnings = strings(at(j, "warnings"));
  return r;
}

Json to_json(const Classification& c) {
  return Json{{"regime", to_string(c.regime)},
              {"lambda", c.lambda},
              {"leading_exponent", c.leading_exponent},
              {"flagged", c.flagged}};
}

Json to_json(const SolverConfig& c) {
  return Json{{"max_iters", c.max_iters},
              {"grad_tol", c.grad_tol},
              {"armijo",
               {{"initial_step", c.armijo.initial_step},
                {"shrink", c.armijo.shrink},
                {"sufficient_decrease", c.armijo.sufficient_decrease}}},
              {"seed", c.seed},
              {"path_nodes", c.path_nodes},
              {"deflation", {{"shift", c.deflation.shift}, {"power", c.deflation.power}}}};
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  auto opt = [](const std::optional<double>& v) { return v && std::isfinite(*v) ? format_double(*v) : std::string(); };
  os << sweep_header << '\n';
  for (const auto& r : rows)
    os << format_double(r.param) << ',' << opt(r.energy) << ',' << opt(r.lambda) << ',' << opt(r.grad_norm) << ','
       << opt(r.pohozaev_rel) << ',' << (r.converged ? "true" : "false") << '\n';
}

std::vector<SweepRow> read_sweep_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != sweep_header) throw ShapeError("sweep csv: bad header");
  std::vector<SweepRow> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    if (cells.size() != 6) throw ShapeError("sweep csv: line " + std::to_string(lineno) + " has " +
                                            std::to_string(cells.size()) + " fields");
    auto opt = [](const std::string& s) -> std::optional<double> {
      if (s.empty()) return std::nullopt;
      return parse_double(s);
    };
    SweepRow r;
    r.param = parse_double(cells[0]);
    r.energy = opt(cells[1]);
    r.lambda = opt(cells[2]);
    r.grad_norm = opt(cells[3]);
    r.pohozaev_rel = opt(cells[4]);
    if (cells[5] == "true")
      r.converged = true;
    else if (cells[5] != "false")
      throw ShapeError("sweep csv: line " + std::to_string(lineno) + ": converged must be true or false");
    rows.push_back(r);
  }
  return rows;
}

} // namespace sps
