#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "sps/energy.hpp"
#include "sps/error.hpp"
#include "sps/hartree.hpp"

using namespace sps;
using std::numbers::pi;

namespace {

RadialFn gaussian(const Grid& g, double a = 1.0) {
  return RadialFn::from(g, [a](double r) { return a * std::exp(-r * r / 2); });
}

// Five-point derivative of phi along coordinate i; exact for quartics.
double fd_coordinate(const RadialFn& u, const Nonlinearity& f, std::size_t i, double h) {
  auto at = [&](double s) {
    RadialFn v = u;
    v[i] += s;
    return phi(v, f).total;
  };
  return (8.0 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12.0 * h);
}

} // namespace

TEST_CASE("zero function") {
  const auto g = make_grid(64, 5.0);
  const RadialFn z(g);
  const auto e = phi(z, Nonlinearity::tfdw());
  CHECK(e.dirichlet == 0.0);
  CHECK(e.coulomb == 0.0);
  CHECK(e.nonlinear == 0.0);
  CHECK(e.total == 0.0);
  CHECK(i_s(z) == 0.0);
  CHECK(j_s(z) == 0.0);
  CHECK(grad_phi(z, Nonlinearity::power(1.0, 3.0)).is_zero());
  CHECK_THROWS_AS(psi_tilde(z), DegenerateInputError);
}

TEST_CASE("gaussian oracles") {
  const auto g = make_grid(4096, 25.0);
  const auto u = gaussian(g);
  const double dir = 0.75 * std::pow(pi, 1.5);
  const double coul = std::sqrt(2.0) * std::pow(pi, 2.5) / (16.0 * pi);
  CHECK(std::abs(i_s(u) / (dir + coul) - 1.0) <= 1e-4);
  CHECK(i_s(u) == doctest::Approx(4.66856).epsilon(1e-4));
  const double j = std::pow(2.0 * pi / 3.0, 1.5) / 3.0;
  CHECK(std::abs(j_s(u) / j - 1.0) <= 1e-6);
  CHECK(psi_tilde(u) == doctest::Approx(1.0 / j).epsilon(1e-6));

  const auto e = phi(u, Nonlinearity::power(1.0, 3.0));
  CHECK(e.nonlinear == doctest::Approx(j).epsilon(1e-6));
  CHECK(e.total == doctest::Approx(3.65824).epsilon(1e-4));
  CHECK(e.total == e.dirichlet + e.coulomb - e.nonlinear);
  CHECK(e.i_s() == doctest::Approx(i_s(u)));
}

TEST_CASE("dirichlet energy is exact for piecewise-linear profiles") {
  // u = 1 - r/R: |grad u|^2 = 1/R^2, integral over the ball = 4 pi R / 3
  for (double s : {1.0, 1.02}) {
    const auto g = make_grid(100, 3.0, s);
    const auto u = RadialFn::from(g, [](double r) { return 1.0 - r / 3.0; });
    CHECK(dirichlet_energy(u) == doctest::Approx(0.5 * 4.0 * pi * 3.0 / 3.0).epsilon(1e-12));
  }
}

TEST_CASE("gradient matches finite differences for every kind") {
  const auto g = make_grid(512, 20.0);
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> node(1, g.size() - 2);
  const std::vector<Nonlinearity> fs{Nonlinearity::power(1.0, 2.7), Nonlinearity({{1.0, 3.5}, {-0.5, 4.5}}),
                                     Nonlinearity::saturating_only(1.5), Nonlinearity::tfdw()};
  for (const auto& f : fs) {
    CAPTURE(f.describe());
    auto u = RadialFn::from(g, [](double r) { return 1.5 * std::exp(-r * r / 8) + 0.3 / (1 + r * r); });
    u[g.size() - 1] = 0.0;
    const auto grad = grad_phi(u, f);
    for (int k = 0; k < 20; ++k) {
      const std::size_t i = node(rng);
      const double fd = fd_coordinate(u, f, i, 2e-2 * std::abs(u[i]));
      CHECK(std::abs(fd - grad[i]) <= 1e-6 * std::abs(grad[i]));
    }
  }
}

TEST_CASE("hessian matches differences of the gradient") {
  const auto g = make_grid(200, 10.0, 1.01);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd;
  auto u = RadialFn::from(g, [](double r) { return 2.0 * std::exp(-r * r / 3) + 0.3 / (1 + r * r); });
  u[g.size() - 1] = 0.0;
  // relative perturbations keep u + s v away from the kink of |t|^{q-2} t at zero
  std::vector<double> dir(g.size());
  for (std::size_t i = 0; i < dir.size(); ++i) dir[i] = u[i] * nd(rng);
  const RadialFn v(g, dir);
  for (const auto& f : {Nonlinearity::power(1.0, 4.5), Nonlinearity::tfdw(), Nonlinearity::saturating_only(1.0)}) {
    const double h = 1e-4;
    const auto fd = (1.0 / (2 * h)) * (grad_phi(u + h * v, f) - grad_phi(u - h * v, f));
    const auto hv = hessian_apply(u, f, v);
    double scale = hv.sup_norm();
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(fd[i] - hv[i]) <= 1e-6 * scale);
  }
}

TEST_CASE("split gradients") {
  const auto g = make_grid(128, 8.0);
  const auto u = RadialFn::from(g, [](double r) { return std::cos(r) * std::exp(-r * r / 8); });
  const auto f = Nonlinearity::scaled(2.0);
  const auto combined = grad_phi(u, f);
  const auto split = grad_i_s(u) - 2.0 * grad_j_s(u);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(combined[i] == doctest::Approx(split[i]).epsilon(1e-12));
}

TEST_CASE("identity residuals") {
  const auto g = make_grid(512, 12.0);
  const auto u = gaussian(g, 0.8);
  const auto f = Nonlinearity::power(1.0, 3.0);
  const auto e = phi(u, f);
  const auto r = identity_residuals(u, f, 2.0);
  CHECK(r.tested == doctest::Approx(2 * e.dirichlet + 4 * e.coulomb - 3 * e.nonlinear));
  CHECK(r.pohozaev == doctest::Approx(e.dirichlet + 5 * e.coulomb - 3 * e.nonlinear));
  REQUIRE(r.h12.has_value());
  CHECK(*r.h12 == doctest::Approx(e.i_s() - 2.0 * j_s(u)));
  CHECK(std::abs(*r.h12_rel) <= 1.0);
  CHECK_FALSE(identity_residuals(u, f).h12.has_value());
  const auto zero = identity_residuals(RadialFn(g), f);
  CHECK(zero.tested == 0.0);
  CHECK(zero.tested_rel == 0.0);
}

TEST_CASE("energy is even in u") {
  const auto g = make_grid(128, 8.0, 1.01);
  const auto u = RadialFn::from(g, [](double r) { return std::sin(r) * std::exp(-r); });
  const auto f = Nonlinearity({{1.0, 3.3}}, 0.5);
  CHECK(phi(-u, f).total == phi(u, f).total);
  const auto gp = grad_phi(u, f), gm = grad_phi(-u, f);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(gm[i] == -gp[i]);
}

TEST_CASE("functionals are positive on every nonzero profile") {
  const auto g = make_grid(64, 5.0);
  for (std::size_t k = 0; k + 1 < g.size(); ++k) {
    RadialFn u(g);
    u[k] = -0.7;
    CHECK(i_s(u) > 0.0);
    // the origin node carries no volume, so J_s sees nothing there
    if (k > 0) CHECK(j_s(u) > 0.0);
  }
}

TEST_CASE("amplitude homogeneity of the quadratic and quartic blocks") {
  const auto g = make_grid(256, 10.0, 1.01);
  const auto u = RadialFn::from(g, [](double r) { return std::exp(-r * r / 3) - 0.2 * std::exp(-r); });
  const double dir = dirichlet_energy(u);
  CHECK(dirichlet_energy(2.0 * u) == 4.0 * dir);
  CHECK(dirichlet_energy(-0.5 * u) == 0.25 * dir);
  CHECK(dirichlet_energy(3.0 * u) == doctest::Approx(9.0 * dir).epsilon(1e-14));
}
