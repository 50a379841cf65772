#include <doctest.h>

#include <cmath>

#include "sps/energy.hpp"
#include "sps/error.hpp"
#include "sps/scaling.hpp"
#include "sps/solvers.hpp"

using namespace sps;

namespace {

Grid eigen_grid() { return make_grid(1024, eigen_default_r_max, eigen_default_stretch); }

// First eigenvalue on the coarse eigen grid, computed once.
const SolveReport& eigen_ref() {
  static const SolveReport rep = minimize_eigen(eigen_grid(), SolverConfig{});
  return rep;
}

bool nonincreasing(const std::vector<double>& h) {
  for (std::size_t i = 1; i < h.size(); ++i)
    if (h[i] > h[i - 1] + 1e-12 * std::abs(h[i - 1])) return false;
  return true;
}

} // namespace

TEST_CASE("solver config validation") {
  SolverConfig c;
  CHECK_NOTHROW(c.validate());
  c.max_iters = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.grad_tol = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.armijo.shrink = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.path_nodes = 7;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.deflation.power = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("random bumps are reproducible") {
  const auto g = make_grid(128, 10.0);
  CHECK(random_bump(g, 4).values == random_bump(g, 4).values);
  CHECK(random_bump(g, 4).values != random_bump(g, 5).values);
  CHECK(random_bump(g, 4)[g.size() - 1] == 0.0);
}

TEST_CASE("sign-aware distance") {
  const auto g = make_grid(128, 10.0);
  const auto u = random_bump(g, 1);
  CHECK(sign_aware_distance(u, -u) == 0.0);
  CHECK(sign_aware_distance(u, u) == 0.0);
  CHECK(sign_aware_distance(u, RadialFn(g)) == doctest::Approx(l2_norm(u)));
}

TEST_CASE("first eigenvalue") {
  const auto& rep = eigen_ref();
  REQUIRE(rep.lambda.has_value());
  CHECK(rep.converged);
  CHECK(rep.grad_sup_norm <= 1e-6);
  CHECK(*rep.lambda > 0.0);
  CHECK(*rep.lambda == doctest::Approx(2.77322).epsilon(1e-5));
  CHECK(i_s(rep.solution) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(*rep.lambda == doctest::Approx(psi_tilde(rep.solution)).epsilon(1e-12));
  REQUIRE(rep.residuals.h12_rel.has_value());
  CHECK(std::abs(*rep.residuals.h12_rel) <= 1e-3);
  CHECK(std::abs(rep.residuals.tested_rel) <= 1e-3);
  CHECK(std::abs(rep.residuals.pohozaev_rel) <= 1e-3);
  CHECK(nonincreasing(rep.energy_history));
  CHECK(rep.diagnostics.at("sign_changes") == 0.0);
}

TEST_CASE("eigenvalue does not depend on the start") {
  const double ref = *eigen_ref().lambda;
  SolverConfig cfg;
  cfg.seed = 17;
  const auto other = minimize_eigen(eigen_grid(), cfg);
  CHECK(other.converged);
  CHECK(std::abs(*other.lambda / ref - 1.0) <= 1e-4);

  // a start anywhere on the same scaling orbit
  const auto u0 = random_bump(eigen_grid(), 3);
  for (double t : {0.5, 2.0}) {
    const auto r = minimize_eigen(scale(u0, t), SolverConfig{});
    CHECK(r.converged);
    CHECK(std::abs(*r.lambda / ref - 1.0) <= 1e-4);
  }

  const auto gauss = RadialFn::from(eigen_grid(), [](double r) { return r < 79 ? std::exp(-r * r / 2) : 0.0; });
  const auto g = minimize_eigen(gauss, SolverConfig{});
  CHECK(g.converged);
  CHECK(std::abs(*g.residuals.h12) <= 1e-3 * g.energy.i_s());
}

TEST_CASE("eigen solve is odd in the start") {
  const auto u0 = random_bump(eigen_grid(), 8);
  const auto plus = minimize_eigen(u0, SolverConfig{});
  const auto minus = minimize_eigen(-u0, SolverConfig{});
  CHECK(*plus.lambda == *minus.lambda);
  CHECK(plus.energy_history == minus.energy_history);
  for (std::size_t i = 0; i < u0.size(); ++i) CHECK(minus.solution[i] == -plus.solution[i]);
}

TEST_CASE("eigen solve rejects the zero start") {
  CHECK_THROWS_AS(minimize_eigen(RadialFn(eigen_grid()), SolverConfig{}), DegenerateDescentError);
}

TEST_CASE("eigen solve reports non-convergence") {
  SolverConfig cfg;
  cfg.max_iters = 3;
  const auto r = minimize_eigen(eigen_grid(), cfg);
  CHECK_FALSE(r.converged);
  CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("eigenfunction family") {
  const auto& rep = eigen_ref();
  const std::vector<double> ts{1.0, 0.5, 2.0, 8.0};
  const auto fam = eigen_family_check(rep.solution, *rep.lambda, ts);
  REQUIRE(fam.entries.size() == 4);
  CHECK(fam.entries[0].grad_sup_norm == doctest::Approx(rep.grad_sup_norm).epsilon(1e-3));
  for (int i = 0; i < 3; ++i) {
    CAPTURE(fam.entries[i].t);
    CHECK(fam.entries[i].evaluated);
    CHECK(fam.entries[i].passed);
    CHECK(fam.entries[i].grad_sup_norm <= 5e-3);
  }
  CHECK_FALSE(fam.entries[3].evaluated);
  CHECK_FALSE(fam.warnings.empty());
}

TEST_CASE("global minimizer, subscaled power") {
  const auto g = make_grid(2048, eigen_default_r_max, eigen_default_stretch);
  const auto f = Nonlinearity::power(1.0, 2.7);
  const auto rep = minimize_global(f, g, SolverConfig{});
  CHECK(rep.converged);
  CHECK_FALSE(rep.trivial);
  CHECK(rep.energy.total < 0.0);
  CHECK(rep.grad_sup_norm <= 1e-6);
  CHECK(std::abs(rep.residuals.tested_rel) <= 1e-3);
  CHECK(std::abs(rep.residuals.pohozaev_rel) <= 1e-3);
  CHECK(nonincreasing(rep.energy_history));

  SUBCASE("evenness") {
    const auto plus = minimize_global(f, rep.solution, SolverConfig{});
    const auto minus = minimize_global(f, -rep.solution, SolverConfig{});
    CHECK(plus.energy.total == minus.energy.total);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(minus.solution[i] == -plus.solution[i]);
  }
}

TEST_CASE("global minimizer, trivial cases") {
  const auto g = make_grid(512, 25.0);
  const auto neg = minimize_global(Nonlinearity({{-1.0, 3.0}, {-2.0, 4.0}}), g, SolverConfig{});
  CHECK(neg.trivial);
  CHECK(neg.converged);
  CHECK(neg.solution.is_zero());
  CHECK(neg.energy.total == 0.0);

  const double lambda1 = 2.7732;
  const auto below = minimize_global(Nonlinearity::scaled(0.5 * lambda1), g, SolverConfig{});
  CHECK(below.trivial);
  CHECK(below.energy.total == 0.0);
}

TEST_CASE("regime preconditions") {
  const auto g = make_grid(256, 25.0);
  CHECK_THROWS_AS(minimize_global(Nonlinearity::power(1.0, 4.5), g, SolverConfig{}), ClassificationError);
  CHECK_THROWS_AS(mountain_pass(Nonlinearity::power(1.0, 2.7), g, SolverConfig{}), ClassificationError);
  CHECK_THROWS_AS(mountain_pass(Nonlinearity::tfdw(), g, SolverConfig{}), ClassificationError);
  CHECK_THROWS_AS(deflated_search(Nonlinearity::power(1.0, 2.7), 0, g, SolverConfig{}), ConfigError);
}

TEST_CASE("mountain pass, superscaled power") {
  const auto g = make_grid(2048, 25.0);
  const auto rep = mountain_pass(Nonlinearity::power(1.0, 4.5), g, SolverConfig{});
  CHECK(rep.converged);
  CHECK_FALSE(rep.trivial);
  CHECK(rep.energy.total > 0.0);
  CHECK(rep.grad_sup_norm <= 1e-6);
  CHECK(std::abs(rep.residuals.pohozaev_rel) <= 1e-3);
  const auto& d = rep.diagnostics;
  CHECK(d.at("endpoint_energy") < 0.0);
  CHECK(d.at("sphere_level") > 0.0);
  CHECK(d.at("sphere_inf_sampled") > 0.0);
  // the critical level sits between the sphere bound and the initial path maximum
  CHECK(rep.energy.total <= d.at("path_max_initial") * (1 + 1e-9));
  CHECK(rep.energy.total >= d.at("sphere_inf_sampled"));
}

TEST_CASE("mountain pass below the first eigenvalue") {
  const auto g = make_grid(2048, 25.0);
  const double lambda1 = 2.7732;
  const auto rep = mountain_pass(Nonlinearity({{0.5 * lambda1, 3.0}, {1.0, 4.5}}), g, SolverConfig{});
  CHECK(rep.converged);
  CHECK_FALSE(rep.trivial);
  CHECK(rep.energy.total > 0.0);
}

TEST_CASE("deflation with k = 1 is the base solver") {
  const auto g = make_grid(1024, 25.0);
  const auto f = Nonlinearity::power(1.0, 4.5);
  const auto res = deflated_search(f, 1, g, SolverConfig{});
  const auto base = mountain_pass(f, g, SolverConfig{});
  REQUIRE(res.reports.size() == 1);
  CHECK_FALSE(res.exhausted);
  CHECK(res.reports[0].solution.values == base.solution.values);
  CHECK(res.distances == std::vector<std::vector<double>>{{0.0}});
}

TEST_CASE("deflation below the first eigenvalue is exhausted") {
  const auto g = make_grid(512, 25.0);
  const auto res = deflated_search(Nonlinearity::scaled(0.5 * 2.7732), 2, g, SolverConfig{});
  CHECK(res.exhausted);
  REQUIRE(res.reports.size() == 1);
  CHECK(res.reports[0].trivial);
}

TEST_CASE("deflation finds two distinct negative-energy states for tfdw") {
  const auto g = make_grid(2048, 200.0, 1.002);
  const auto res = deflated_search(Nonlinearity::tfdw(), 2, g, SolverConfig{});
  REQUIRE(res.reports.size() == 2);
  CHECK_FALSE(res.exhausted);
  for (const auto& r : res.reports) {
    CHECK(r.converged);
    CHECK(r.energy.total < 0.0);
  }
  CHECK(res.distances[0][1] >= min_solution_distance);
  CHECK(res.distances[0][1] == res.distances[1][0]);
}
