#include "sps/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <thread>

#include <CLI11.hpp>

#include "format.hpp"
#include "sps/error.hpp"
#include "sps/scaling.hpp"

namespace sps::cli {

namespace fs = std::filesystem;
using detail::format_double;

namespace {

// ---------------------------------------------------------------------------
// strict JSON readers

void only_fields(const Json& j, const char* where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    const bool ok = std::any_of(allowed.begin(), allowed.end(), [&key](const char* a) { return key == a; });
    if (!ok) throw ConfigError(std::string(where) + ": unknown field '" + key + "'");
  }
}

double real(const Json& j, const std::string& what) {
  if (!j.is_number()) throw ConfigError(what + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(what + ": must be finite");
  return v;
}

std::uint64_t count(const Json& j, const std::string& what) {
  if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0))
    throw ConfigError(what + ": expected a non-negative integer");
  return j.get<std::uint64_t>();
}

std::vector<double> reals(const Json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(real(v, what));
  return out;
}

SolverConfig solver_from_json(const Json& j) {
  only_fields(j, "solver", {"max_iters", "grad_tol", "armijo", "seed", "path_nodes", "deflation"});
  SolverConfig c;
  if (j.contains("max_iters")) c.max_iters = count(j["max_iters"], "solver.max_iters");
  if (j.contains("grad_tol")) c.grad_tol = real(j["grad_tol"], "solver.grad_tol");
  if (j.contains("seed")) c.seed = count(j["seed"], "solver.seed");
  if (j.contains("path_nodes")) c.path_nodes = count(j["path_nodes"], "solver.path_nodes");
  if (j.contains("armijo")) {
    const auto& a = j["armijo"];
    only_fields(a, "solver.armijo", {"initial_step", "shrink", "sufficient_decrease"});
    if (a.contains("initial_step")) c.armijo.initial_step = real(a["initial_step"], "solver.armijo.initial_step");
    if (a.contains("shrink")) c.armijo.shrink = real(a["shrink"], "solver.armijo.shrink");
    if (a.contains("sufficient_decrease"))
      c.armijo.sufficient_decrease = real(a["sufficient_decrease"], "solver.armijo.sufficient_decrease");
  }
  if (j.contains("deflation")) {
    const auto& d = j["deflation"];
    only_fields(d, "solver.deflation", {"shift", "power"});
    if (d.contains("shift")) c.deflation.shift = real(d["shift"], "solver.deflation.shift");
    if (d.contains("power")) c.deflation.power = real(d["power"], "solver.deflation.power");
  }
  c.validate();
  return c;
}

Json read_json_file(const fs::path& p) {
  std::ifstream is(p);
  if (!is) throw ConfigError("cannot open config " + p.string());
  try {
    return Json::parse(is);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config " + p.string() + ": " + e.what());
  }
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw Error("cannot open " + p.string() + " for writing");
  os << text;
}

void write_json(const fs::path& p, const Json& j) { write_text(p, j.dump(2) + "\n"); }

// ---------------------------------------------------------------------------
// solve dispatch shared by the solve and sweep commands

struct SolveOutcome {
  Json json;
  std::vector<SolveReport> reports;
  std::optional<double> lambda_1;
  bool ok{};
};

SolveOutcome solve_one(const Nonlinearity& f, const Grid& grid, const SolverConfig& cfg, std::size_t k) {
  SolveOutcome out;
  const auto cls = classify_nonlinearity(f);
  Json warnings = Json::array();
  std::string dispatch;
  DeflationResult res;

  auto run_base = [&](bool mp) {
    if (k > 1) {
      dispatch = "deflated_search";
      res = deflated_search(f, k, grid, cfg);
    } else {
      dispatch = mp ? "mountain_pass" : "minimize_global";
      res.reports.push_back(mp ? mountain_pass(f, grid, cfg) : minimize_global(f, grid, cfg));
      res.distances = {{0.0}};
    }
  };

  switch (cls.regime) {
  case Regime::superscaled:
    run_base(true);
    break;
  case Regime::subscaled:
  case Regime::superscaled_negative:
    if (cls.flagged) warnings.push_back(std::string("classification flagged: ") + to_string(cls.regime));
    run_base(false);
    break;
  case Regime::asymptotically_scaled: {
    const auto eig = minimize_eigen(grid, cfg);
    out.lambda_1 = eig.lambda;
    if (!eig.converged) warnings.push_back("lambda_1 estimate did not converge: " + format_double(*eig.lambda));
    if (cls.lambda < *eig.lambda) {
      run_base(false);
    } else {
      warnings.push_back("asymptotically scaled with lambda " + format_double(cls.lambda) + " >= lambda_1 " +
                         format_double(*eig.lambda) +
                         ": the scaled saddle-point geometry has no implemented algorithm; running deflated search");
      dispatch = "deflated_search";
      res = deflated_search(f, std::max<std::size_t>(k, 1), grid, cfg);
    }
    break;
  }
  }

  out.ok = !res.exhausted;
  Json reps = Json::array();
  for (const auto& r : res.reports) {
    out.ok = out.ok && r.converged;
    reps.push_back(to_json(r));
  }
  if (res.exhausted)
    warnings.push_back("deflated search exhausted: " + std::to_string(res.reports.size()) + " of " +
                       std::to_string(k) + " solutions");
  out.json["nonlinearity"] = f.describe();
  out.json["classification"] = to_json(cls);
  out.json["dispatch"] = dispatch;
  out.json["lambda_1"] = out.lambda_1 ? Json(*out.lambda_1) : Json(nullptr);
  out.json["exhausted"] = res.exhausted;
  out.json["distances"] = res.distances;
  out.json["warnings"] = warnings;
  out.json["reports"] = reps;
  out.reports = std::move(res.reports);
  return out;
}

Json base_json(const char* command, const ExperimentConfig& cfg) {
  Json j;
  j["command"] = command;
  j["config"] = to_json(cfg);
  return j;
}

// ---------------------------------------------------------------------------
// commands

int cmd_eigen(const ExperimentConfig& cfg, const fs::path& out_dir, std::ostream& out) {
  const Grid grid = cfg.grid();
  const std::vector<double> ts = cfg.ts.value_or(std::vector<double>{0.5, 2.0});
  Json j = base_json("eigen", cfg);
  int code = exit_ok;
  try {
    const auto rep = minimize_eigen(grid, cfg.solver);
    const auto fam = eigen_family_check(rep.solution, *rep.lambda, ts);
    j["report"] = to_json(rep);
    j["family"] = to_json(fam);
    write_csv(out_dir / "profile.csv", rep.solution);
    code = rep.converged && fam.all_passed() ? exit_ok : exit_numerical;
    out << "lambda_1 = " << format_double(*rep.lambda) << " (converged " << (rep.converged ? "yes" : "no")
        << ", grad " << format_double(rep.grad_sup_norm) << ", family " << (fam.all_passed() ? "ok" : "FAILED")
        << ")\n";
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    j["error"] = e.what();
    code = exit_numerical;
  }
  write_json(out_dir / "report.json", j);
  return code;
}

int cmd_solve(const ExperimentConfig& cfg, const fs::path& out_dir, std::ostream& out) {
  if (!cfg.nonlinearity) throw ConfigError("solve: config needs a 'nonlinearity'");
  const Grid grid = cfg.grid();
  Json j = base_json("solve", cfg);
  int code = exit_ok;
  try {
    auto res = solve_one(*cfg.nonlinearity, grid, cfg.solver, cfg.k);
    for (const auto& [key, v] : res.json.items()) j[key] = v;
    if (res.reports.size() == 1 && cfg.k == 1) {
      write_csv(out_dir / "profile.csv", res.reports.front().solution);
    } else {
      for (std::size_t i = 0; i < res.reports.size(); ++i)
        write_csv(out_dir / ("profile_" + std::to_string(i) + ".csv"), res.reports[i].solution);
    }
    code = res.ok ? exit_ok : exit_numerical;
    for (std::size_t i = 0; i < res.reports.size(); ++i)
      out << "solution " << i << ": energy " << format_double(res.reports[i].energy.total) << ", converged "
          << (res.reports[i].converged ? "yes" : "no") << "\n";
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    j["error"] = e.what();
    code = exit_numerical;
  }
  write_json(out_dir / "report.json", j);
  return code;
}

int cmd_axioms(const ExperimentConfig& cfg, const fs::path& out_dir, std::ostream& out) {
  const Grid grid = cfg.grid();
  const std::vector<double> ts = cfg.ts.value_or(std::vector<double>{0.5, 0.8, 1.25, 2.0});
  if (ts.empty()) throw ConfigError("axioms: ts must not be empty");
  std::mt19937_64 rng(cfg.solver.seed);
  auto log_uniform = [&rng](double lo, double hi) {
    return std::exp(std::uniform_real_distribution<double>(std::log(lo), std::log(hi))(rng));
  };
  std::vector<RadialFn> seeds;
  for (std::size_t i = 0; i < cfg.seeds.count; ++i) {
    const double l = log_uniform(cfg.seeds.width_min, cfg.seeds.width_max);
    const double a = log_uniform(cfg.seeds.amplitude_min, cfg.seeds.amplitude_max) * (i % 2 ? -1.0 : 1.0);
    seeds.push_back(RadialFn::from(grid, [a, l](double r) { return a * std::exp(-0.5 * r * r / (l * l)); }));
  }
  const auto rep = check_axioms(seeds, ts);
  Json j = base_json("axioms", cfg);
  j["report"] = to_json(rep);
  write_json(out_dir / "report.json", j);
  for (const auto& c : rep.checks)
    out << (c.passed ? "PASS " : "FAIL ") << c.name << " worst " << format_double(c.worst_error) << " (tol "
        << format_double(c.tolerance) << ")\n";
  for (const auto& f : rep.failures) out << "failure: " << f << "\n";
  return rep.all_passed() ? exit_ok : exit_numerical;
}

Nonlinearity sweep_member(const ExperimentConfig& cfg, double value) {
  const auto& sw = *cfg.sweep;
  if (sw.param == "q") return Nonlinearity::power(sw.coef, value);
  const Nonlinearity base = cfg.nonlinearity.value_or(Nonlinearity::scaled(1.0));
  std::vector<PowerTerm> terms = base.terms();
  for (auto& t : terms) t.coef *= value;
  std::optional<double> sat = base.saturating();
  if (sat) *sat *= value;
  return Nonlinearity(std::move(terms), sat);
}

int cmd_sweep(const ExperimentConfig& cfg, const fs::path& out_dir, std::ostream& out, unsigned threads) {
  if (!cfg.sweep) throw ConfigError("sweep: config needs a 'sweep' section");
  const Grid grid = cfg.grid();
  const auto& values = cfg.sweep->values;
  // every member is validated before any solve starts
  std::vector<Nonlinearity> members;
  for (double v : values) members.push_back(sweep_member(cfg, v));

  std::vector<SweepRow> rows(values.size());
  std::vector<Json> details(values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < values.size(); i = next++) {
      SweepRow row;
      row.param = values[i];
      Json d;
      d["param"] = values[i];
      try {
        auto res = solve_one(members[i], grid, cfg.solver, 1);
        const auto& r = res.reports.front();
        row.energy = r.energy.total;
        row.lambda = r.lambda ? r.lambda : res.lambda_1;
        row.grad_norm = r.grad_sup_norm;
        row.pohozaev_rel = r.residuals.pohozaev_rel;
        row.converged = res.ok;
        for (const auto& [key, v] : res.json.items())
          if (key != "reports") d[key] = v;
        Json rj = to_json(r);
        rj.erase("solution");
        rj.erase("energy_history");
        d["report"] = rj;
      } catch (const Error& e) {
        d["error"] = e.what();
      }
      rows[i] = row;
      details[i] = std::move(d);
    }
  };
  const unsigned nthreads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(values.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  std::vector<std::size_t> order(values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<SweepRow> sorted;
  Json runs = Json::array();
  for (auto i : order) {
    sorted.push_back(rows[i]);
    runs.push_back(details[i]);
  }

  std::ofstream os(out_dir / "sweep.csv", std::ios::binary);
  if (!os) throw Error("cannot open sweep.csv for writing");
  write_sweep_csv(os, sorted);
  os.close();
  Json j = base_json("sweep", cfg);
  j["runs"] = runs;
  write_json(out_dir / "report.json", j);

  bool all = true;
  for (const auto& r : sorted) {
    all = all && r.converged;
    out << cfg.sweep->param << "=" << format_double(r.param) << " energy "
        << (r.energy ? format_double(*r.energy) : std::string("n/a")) << (r.converged ? "" : " (not converged)") << "\n";
  }
  return all ? exit_ok : exit_numerical;
}

} // namespace

// ---------------------------------------------------------------------------

Nonlinearity nonlinearity_from_json(const Json& j) {
  only_fields(j, "nonlinearity", {"terms", "saturating", "preset"});
  if (j.contains("preset")) {
    if (j.contains("terms") || j.contains("saturating"))
      throw ConfigError("nonlinearity: 'preset' excludes 'terms' and 'saturating'");
    if (!j["preset"].is_string()) throw ConfigError("nonlinearity.preset: expected a string");
    const auto name = j["preset"].get<std::string>();
    if (name == "tfdw") return Nonlinearity::tfdw();
    throw ConfigError("nonlinearity.preset: unknown preset '" + name + "'");
  }
  std::vector<PowerTerm> terms;
  if (j.contains("terms")) {
    if (!j["terms"].is_array()) throw ConfigError("nonlinearity.terms: expected an array");
    for (const auto& t : j["terms"]) {
      only_fields(t, "nonlinearity.terms[]", {"coef", "exponent"});
      if (!t.contains("coef") || !t.contains("exponent"))
        throw ConfigError("nonlinearity.terms[]: needs 'coef' and 'exponent'");
      terms.push_back({real(t["coef"], "nonlinearity.terms[].coef"), real(t["exponent"], "nonlinearity.terms[].exponent")});
    }
  }
  std::optional<double> sat;
  if (j.contains("saturating") && !j["saturating"].is_null()) sat = real(j["saturating"], "nonlinearity.saturating");
  return Nonlinearity(std::move(terms), sat);
}

Json to_json(const Nonlinearity& f) {
  Json terms = Json::array();
  for (const auto& t : f.terms()) terms.push_back(Json{{"coef", t.coef}, {"exponent", t.exponent}});
  return Json{{"terms", terms}, {"saturating", f.saturating() ? Json(*f.saturating()) : Json(nullptr)}};
}

ExperimentConfig parse_config(const Json& j) {
  only_fields(j, "config", {"grid", "solver", "nonlinearity", "ts", "k", "seeds", "sweep"});
  // null stands for an absent optional section, as written by to_json
  auto given = [&j](const char* key) { return j.contains(key) && !j[key].is_null(); };
  ExperimentConfig c;
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    only_fields(g, "grid", {"n", "r_max", "stretch"});
    if (g.contains("n")) c.n = count(g["n"], "grid.n");
    if (g.contains("r_max")) c.r_max = real(g["r_max"], "grid.r_max");
    if (g.contains("stretch")) c.stretch = real(g["stretch"], "grid.stretch");
  }
  (void)c.grid();  // validates n, r_max, stretch
  if (j.contains("solver")) c.solver = solver_from_json(j["solver"]);
  if (given("nonlinearity")) c.nonlinearity = nonlinearity_from_json(j["nonlinearity"]);
  if (given("ts")) c.ts = reals(j["ts"], "ts");
  if (c.ts)
    for (double t : *c.ts)
      if (!(t > 0.0)) throw ConfigError("ts: scales must be > 0 (got " + format_double(t) + ")");
  if (j.contains("k")) {
    c.k = count(j["k"], "k");
    if (c.k < 1) throw ConfigError("k: must be >= 1");
  }
  if (j.contains("seeds")) {
    const auto& s = j["seeds"];
    only_fields(s, "seeds", {"count", "width_min", "width_max", "amplitude_min", "amplitude_max"});
    if (s.contains("count")) c.seeds.count = count(s["count"], "seeds.count");
    if (s.contains("width_min")) c.seeds.width_min = real(s["width_min"], "seeds.width_min");
    if (s.contains("width_max")) c.seeds.width_max = real(s["width_max"], "seeds.width_max");
    if (s.contains("amplitude_min")) c.seeds.amplitude_min = real(s["amplitude_min"], "seeds.amplitude_min");
    if (s.contains("amplitude_max")) c.seeds.amplitude_max = real(s["amplitude_max"], "seeds.amplitude_max");
  }
  if (c.seeds.count < 1) throw ConfigError("seeds.count: must be >= 1");
  if (!(c.seeds.width_min > 0.0 && c.seeds.width_min <= c.seeds.width_max))
    throw ConfigError("seeds: need 0 < width_min <= width_max");
  if (!(c.seeds.amplitude_min > 0.0 && c.seeds.amplitude_min <= c.seeds.amplitude_max))
    throw ConfigError("seeds: need 0 < amplitude_min <= amplitude_max");
  if (given("sweep")) {
    const auto& s = j["sweep"];
    only_fields(s, "sweep", {"param", "values", "coef"});
    SweepSpec sw;
    if (!s.contains("param") || !s["param"].is_string()) throw ConfigError("sweep.param: expected \"q\" or \"lambda\"");
    sw.param = s["param"].get<std::string>();
    if (sw.param != "q" && sw.param != "lambda") throw ConfigError("sweep.param: expected \"q\" or \"lambda\"");
    if (!s.contains("values")) throw ConfigError("sweep.values: required");
    sw.values = reals(s["values"], "sweep.values");
    if (sw.values.empty()) throw ConfigError("sweep.values: must not be empty");
    if (s.contains("coef")) sw.coef = real(s["coef"], "sweep.coef");
    c.sweep = std::move(sw);
  }
  return c;
}

Json to_json(const ExperimentConfig& c) {
  Json j;
  j["grid"] = Json{{"n", c.n}, {"r_max", c.r_max}, {"stretch", c.stretch}};
  j["solver"] = sps::to_json(c.solver);
  j["nonlinearity"] = c.nonlinearity ? to_json(*c.nonlinearity) : Json(nullptr);
  j["ts"] = c.ts ? Json(*c.ts) : Json(nullptr);
  j["k"] = c.k;
  j["seeds"] = Json{{"count", c.seeds.count},
                    {"width_min", c.seeds.width_min},
                    {"width_max", c.seeds.width_max},
                    {"amplitude_min", c.seeds.amplitude_min},
                    {"amplitude_max", c.seeds.amplitude_max}};
  if (c.sweep)
    j["sweep"] = Json{{"param", c.sweep->param}, {"values", c.sweep->values}, {"coef", c.sweep->coef}};
  else
    j["sweep"] = nullptr;
  return j;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Radial Schroedinger-Poisson-Slater variational lab"};
  app.require_subcommand(1);
  std::string config_path, out_dir = ".";
  std::optional<std::uint64_t> seed;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());

  std::vector<CLI::App*> subs;
  for (const char* name : {"eigen", "solve", "axioms", "sweep"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON experiment config (defaults apply when omitted)");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "RNG seed, overrides solver.seed");
    sub->add_option("--threads", threads, "worker threads for sweep")->check(CLI::PositiveNumber);
    subs.push_back(sub);
  }
  subs[0]->description("first scaled eigenvalue and eigenfunction family check");
  subs[1]->description("solve for the configured nonlinearity (regime-dispatched)");
  subs[2]->description("scaling axiom and homogeneity suite");
  subs[3]->description("parallel solve sweep over q or lambda");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return exit_config;
  }

  try {
    ExperimentConfig cfg = config_path.empty() ? parse_config(Json::object()) : parse_config(read_json_file(config_path));
    if (seed) cfg.solver.seed = *seed;
    fs::create_directories(out_dir);
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "eigen") return cmd_eigen(cfg, out_dir, out);
    if (cmd == "solve") return cmd_solve(cfg, out_dir, out);
    if (cmd == "axioms") return cmd_axioms(cfg, out_dir, out);
    return cmd_sweep(cfg, out_dir, out, threads);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_numerical;
  }
}

} // namespace sps::cli
