// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "sps/energy.hpp"
#include "sps/hartree.hpp"
#include "sps/io.hpp"
#include "sps/scaling.hpp"
#include "sps/solvers.hpp"

using namespace sps;
using std::numbers::pi;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool passed{};
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// 20 Gaussians, widths log-uniform in [1, 2.5], amplitudes in [0.5, 2], alternating sign.
std::vector<RadialFn> seed_family(const Grid& g) {
  std::mt19937_64 rng(20);
  auto lu = [&rng](double lo, double hi) {
    return std::exp(std::uniform_real_distribution<double>(std::log(lo), std::log(hi))(rng));
  };
  std::vector<RadialFn> seeds;
  for (int k = 0; k < 20; ++k) {
    const double l = lu(1.0, 2.5);
    const double a = lu(0.5, 2.0) * (k % 2 ? -1.0 : 1.0);
    seeds.push_back(RadialFn::from(g, [=](double r) { return a * std::exp(-0.5 * r * r / (l * l)); }));
  }
  return seeds;
}

const std::vector<double> axiom_ts{0.5, 0.8, 1.25, 2.0};

double power_integral(const RadialFn& u, double q) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u.grid.weight(i) * std::pow(std::abs(u[i]), q);
  return s;
}

Outcome scaling_laws() {
  const auto g = make_grid(2048, 25.0);
  double worst_s = 0.0, worst_q = 0.0;
  for (const auto& u : seed_family(g)) {
    const double is = i_s(u), js = j_s(u), d = coulomb_energy(u);
    for (double t : axiom_ts) {
      const auto v = scale(u, t);
      const double t3 = t * t * t;
      worst_s = std::max({worst_s, std::abs(i_s(v) - t3 * is) / is, std::abs(j_s(v) - t3 * js) / js,
                          std::abs(coulomb_energy(v) - t3 * d) / d});
      for (double q : {2.7, 3.0, 4.5}) {
        const double base = power_integral(u, q);
        const double law = std::pow(t, 2 * q - 3);
        worst_q = std::max(worst_q, std::abs(power_integral(v, q) - law * base) / base);
      }
    }
  }
  return {worst_s <= 1e-4 && worst_q <= 1e-4,
          fmt("20 seeds x 4 scales, worst t^3 law error %.2e, worst t^(2q-3) law error %.2e (tol 1e-4)", worst_s,
              worst_q)};
}

Outcome axiom_suite() {
  const auto g = make_grid(2048, eigen_default_r_max, eigen_default_stretch);
  const auto seeds = seed_family(g);
  const auto rep = check_axioms(seeds, axiom_ts);
  bool ok = rep.failures.empty();
  std::string detail;
  for (const auto& [name, tol] : {std::pair{"h1_composition", 1e-4}, std::pair{"h2_scalar", 1e-12},
                                  std::pair{"h3_endpoints", 1e-12}, std::pair{"norm_identity", 1e-4},
                                  std::pair{"norm_bound", 1e-4}}) {
    const auto* c = rep.find(name);
    const bool pass = c && c->worst_error <= tol && c->passed;
    ok = ok && pass;
    detail += fmt("%s %.2e%s ", name, c ? c->worst_error : NAN, pass ? "" : " (FAILED)");
  }
  if (!rep.failures.empty()) detail += "first failure: " + rep.failures.front();
  return {ok, detail};
}

Outcome gradient_check() {
  const auto g = make_grid(512, 20.0);
  auto u = RadialFn::from(g, [](double r) { return 1.5 * std::exp(-r * r / 8) + 0.3 / (1 + r * r); });
  u[g.size() - 1] = 0.0;
  const std::vector<std::pair<const char*, Nonlinearity>> kinds{
      {"power", Nonlinearity::power(1.0, 2.7)},
      {"sum", Nonlinearity({{1.0, 3.5}, {-0.5, 4.5}})},
      {"saturating", Nonlinearity::saturating_only(1.5)},
      {"tfdw", Nonlinearity::tfdw()}};
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> node(1, g.size() - 2);
  bool ok = true;
  std::string detail = "200 coordinates per kind, worst relative error:";
  for (const auto& [name, f] : kinds) {
    const auto grad = grad_phi(u, f);
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
      const std::size_t i = node(rng);
      const double h = 2e-2 * std::abs(u[i]);
      auto at = [&](double s) {
        RadialFn v = u;
        v[i] += s;
        return phi(v, f).total;
      };
      const double fd = (8.0 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12.0 * h);
      worst = std::max(worst, std::abs(fd - grad[i]) / std::abs(grad[i]));
    }
    ok = ok && worst <= 1e-6;
    detail += fmt(" %s %.2e", name, worst);
  }
  return {ok, detail + " (tol 1e-6)"};
}

Outcome hartree_oracle() {
  const auto g = make_grid(4096, 25.0);
  const auto u = RadialFn::from(g, [](double r) { return std::exp(-r * r / 2); });
  const double exact = std::sqrt(2.0) * std::pow(pi, 2.5);
  const double rel = std::abs(coulomb_energy(u) / exact - 1.0);

  const auto small = make_grid(64, 6.0);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  std::vector<double> vals(small.size());
  for (auto& x : vals) x = nd(rng);
  const RadialFn v(small, vals);
  const auto fast = newton_potential(v);
  const auto h = small.spacings();
  double worst = 0.0;
  for (std::size_t i = 0; i < small.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 1; j < small.size(); ++j)
      s += small.weight(j) * v[j] * v[j] / std::max(small.node(i), small.node(j));
    const double c = i == 0 ? -h[0] * h[0] / 12.0 : (i + 1 < small.size() ? h[i - 1] * h[i] / 12.0 : 0.0);
    worst = std::max(worst, std::abs(fast[i] - (s / (4.0 * pi) - c * v[i] * v[i])));
  }
  return {rel <= 1e-6 && worst <= 1e-10,
          fmt("gaussian D relative error %.2e (tol 1e-6), O(n) vs O(n^2) potential %.2e (tol 1e-10)", rel, worst)};
}

// Shared by criteria 5 and 6.
struct EigenRuns {
  SolveReport fine_a, fine_b, coarse;
};

const EigenRuns& eigen_runs() {
  static const EigenRuns runs = [] {
    const auto fine = make_grid(2048, eigen_default_r_max, eigen_default_stretch);
    const auto coarse = make_grid(1024, eigen_default_r_max, eigen_default_stretch);
    SolverConfig a, b;
    a.seed = 1;
    b.seed = 2;
    return EigenRuns{minimize_eigen(fine, a), minimize_eigen(fine, b), minimize_eigen(coarse, a)};
  }();
  return runs;
}

Outcome eigenvalue() {
  const auto& r = eigen_runs();
  bool ok = true;
  double worst_grad = 0.0, worst_res = 0.0;
  for (const auto* rep : {&r.fine_a, &r.fine_b, &r.coarse}) {
    ok = ok && rep->converged && rep->lambda && *rep->lambda > 0.0 && rep->grad_sup_norm <= 1e-6;
    worst_grad = std::max(worst_grad, rep->grad_sup_norm);
    for (double x : {rep->residuals.tested_rel, rep->residuals.pohozaev_rel, rep->residuals.h12_rel.value_or(NAN)})
      worst_res = std::max(worst_res, std::isnan(x) ? INFINITY : std::abs(x));
  }
  const double la = r.fine_a.lambda.value_or(NAN), lb = r.fine_b.lambda.value_or(NAN);
  const double lc = r.coarse.lambda.value_or(NAN);
  const double seed_rel = std::abs(la / lb - 1.0);
  const double drift = std::abs(lc / la - 1.0);
  ok = ok && seed_rel <= 1e-4 && drift < 1e-2 && worst_res <= 1e-3;
  return {ok, fmt("lambda_1 = %.9f (n=2048), seeds differ by %.2e (tol 1e-4), n=1024 drift %.2e (tol 1e-2), "
                  "worst grad %.2e (tol 1e-6), worst identity residual %.2e (tol 1e-3)",
                  la, seed_rel, drift, worst_grad, worst_res)};
}

Outcome eigen_family() {
  const auto& rep = eigen_runs().fine_a;
  const std::vector<double> ts{0.5, 2.0};
  const auto fam = eigen_family_check(rep.solution, rep.lambda.value_or(NAN), ts);
  bool ok = fam.entries.size() == 2;
  std::string detail;
  for (const auto& e : fam.entries) {
    ok = ok && e.evaluated && e.passed && e.grad_sup_norm <= 5e-3;
    detail += fmt("t=%g residual %.2e ", e.t, e.grad_sup_norm);
  }
  return {ok, detail + "(tol 5e-3)"};
}

Outcome subscaled() {
  const auto g = make_grid(2048, eigen_default_r_max, eigen_default_stretch);
  const auto rep = minimize_global(Nonlinearity::power(1.0, 2.7), g, SolverConfig{});
  const bool ok = rep.converged && !rep.trivial && rep.energy.total < 0.0;
  return {ok, fmt("q=2.7: Phi = %.6g, grad %.2e, pohozaev_rel %.2e, converged %s", rep.energy.total,
                  rep.grad_sup_norm, rep.residuals.pohozaev_rel, rep.converged ? "yes" : "no")};
}

Outcome superscaled() {
  const auto g = make_grid(2048, eigen_default_r_max, eigen_default_stretch);
  const auto rep = mountain_pass(Nonlinearity::power(1.0, 4.5), g, SolverConfig{});
  const bool ok = rep.converged && !rep.trivial && rep.energy.total > 0.0 &&
                  std::abs(rep.residuals.pohozaev_rel) <= 1e-3;
  return {ok, fmt("q=4.5 mountain pass: Phi = %.6g, grad %.2e, pohozaev_rel %.2e (tol 1e-3)", rep.energy.total,
                  rep.grad_sup_norm, rep.residuals.pohozaev_rel)};
}

Outcome tfdw_multiplicity() {
  const auto g = make_grid(4096, 200.0);
  const auto res = deflated_search(Nonlinearity::tfdw(), 2, g, SolverConfig{});
  bool ok = res.reports.size() >= 2 && !res.exhausted;
  std::string detail = fmt("%zu solutions, energies", res.reports.size());
  for (const auto& r : res.reports) {
    ok = ok && r.converged && !r.trivial && r.energy.total < 0.0;
    detail += fmt(" %.6g", r.energy.total);
  }
  double min_dist = INFINITY;
  for (std::size_t i = 0; i < res.reports.size(); ++i)
    for (std::size_t j = i + 1; j < res.reports.size(); ++j) min_dist = std::min(min_dist, res.distances[i][j]);
  ok = ok && min_dist >= 1e-2;
  return {ok, detail + fmt(", min distance %.3g (tol 1e-2)", min_dist)};
}

Outcome classification() {
  const auto a = classify_nonlinearity(Nonlinearity::power(1.0, 2.7));
  const auto b = classify_nonlinearity(Nonlinearity::scaled(1.7));
  const auto c = classify_nonlinearity(Nonlinearity::power(1.0, 4.5));
  const auto d = classify_nonlinearity(Nonlinearity::saturating_only(1.0));
  const bool ok = a.regime == Regime::subscaled && b.regime == Regime::asymptotically_scaled && b.lambda == 1.7 &&
                  c.regime == Regime::superscaled && d.regime == Regime::subscaled;
  return {ok, fmt("q=2.7 %s, 1.7|t|t %s(%g), q=4.5 %s, saturating %s", to_string(a.regime), to_string(b.regime),
                  b.lambda, to_string(c.regime), to_string(d.regime))};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const auto root = fs::temp_directory_path() / "sps_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const std::vector<std::pair<std::string, std::string>> cases{
      {"eigen", R"({"grid": {"n": 1024}})"},
      {"solve", R"({"grid": {"n": 4096, "r_max": 200, "stretch": 1}, "nonlinearity": {"preset": "tfdw"}, "k": 2})"},
      {"axioms", R"({})"},
      {"sweep", R"({"grid": {"n": 1024, "r_max": 25, "stretch": 1}, "sweep": {"param": "q", "values": [3.5, 4.5]}})"}};
  bool ok = true;
  std::string detail;
  for (const auto& [cmd, cfg] : cases) {
    const auto cfg_path = root / (cmd + ".json");
    std::ofstream(cfg_path) << cfg;
    std::vector<std::string> outs;
    for (const char* run : {"a", "b"}) {
      const auto dir = root / (cmd + "_" + run);
      const std::string line = std::string("\"") + SPS_CLI_PATH + "\" " + cmd + " --config \"" + cfg_path.string() +
                               "\" --out \"" + dir.string() + "\" --seed 7 > /dev/null 2>&1";
      const int status = std::system(line.c_str());
      if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) ok = false;
      std::string all;
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(dir)) files.push_back(e.path());
      std::sort(files.begin(), files.end());
      for (const auto& f : files) all += f.filename().string() + "\n" + slurp(f);
      outs.push_back(std::move(all));
    }
    const bool same = !outs[0].empty() && outs[0] == outs[1];
    ok = ok && same;
    detail += cmd + (same ? " identical " : " DIFFERS ");
  }
  return {ok, detail + "(report.json and CSVs, two runs each)"};
}

} // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"scaling laws", scaling_laws},
      {"axiom suite", axiom_suite},
      {"gradient vs finite differences", gradient_check},
      {"hartree oracle", hartree_oracle},
      {"first eigenvalue", eigenvalue},
      {"eigenfunction family", eigen_family},
      {"subscaled minimizer", subscaled},
      {"superscaled mountain pass", superscaled},
      {"tfdw multiplicity", tfdw_multiplicity},
      {"classification", classification},
      {"determinism", determinism}};
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %2zu %s: %s [%.1fs]\n", o.passed ? "PASS" : "FAIL", k + 1, criteria[k].first, o.detail.c_str(),
                secs);
    std::fflush(stdout);
    failed += !o.passed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
