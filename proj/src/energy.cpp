#include "sps/energy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sps/error.hpp"
#include "sps/hartree.hpp"

namespace sps {

using std::numbers::pi;

namespace {

// K u for the stiffness form 1/2 u^T K u = dirichlet_energy(u).
std::vector<double> stiffness_apply(const Grid& g, const std::vector<double>& u) {
  const auto k = g.stiffness();
  std::vector<double> out(u.size(), 0.0);
  for (std::size_t i = 0; i + 1 < u.size(); ++i) {
    const double flux = k[i] * (u[i + 1] - u[i]);
    out[i] -= flux;
    out[i + 1] += flux;
  }
  return out;
}

std::vector<double> squares(const RadialFn& u) {
  std::vector<double> rho(u.size());
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = u.values[i] * u.values[i];
  return rho;
}

double ratio(double value, std::initializer_list<double> parts) {
  double m = 0.0;
  for (double p : parts) m = std::max(m, std::abs(p));
  return m > 0.0 ? value / m : 0.0;
}

} // namespace

double dirichlet_energy(const RadialFn& u) {
  const auto k = u.grid.stiffness();
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < u.size(); ++i) {
    const double d = u.values[i + 1] - u.values[i];
    s += k[i] * d * d;
  }
  return 0.5 * s;
}

double i_s(const RadialFn& u) { return dirichlet_energy(u) + coulomb_energy(u) / (16.0 * pi); }

double j_s(const RadialFn& u) {
  const auto w = u.grid.weights();
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = std::abs(u.values[i]);
    s += w[i] * a * a * a;
  }
  return s / 3.0;
}

EnergyBreakdown phi(const RadialFn& u, const Nonlinearity& f) {
  EnergyBreakdown e;
  e.dirichlet = dirichlet_energy(u);
  e.coulomb = coulomb_energy(u) / (16.0 * pi);
  const auto w = u.grid.weights();
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += w[i] * f.primitive(u.values[i]);
  e.nonlinear = s;
  e.total = e.dirichlet + e.coulomb - e.nonlinear;
  return e;
}

RadialFn grad_i_s(const RadialFn& u) {
  auto g = stiffness_apply(u.grid, u.values);
  const auto v = detail::density_potential(u.grid, squares(u));
  const auto w = u.grid.weights();
  // d/du_k of (1/16 pi) D = w_k u_k V_k by symmetry of the discrete kernel
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += w[i] * u.values[i] * v[i];
  return RadialFn(u.grid, std::move(g));
}

RadialFn grad_j_s(const RadialFn& u) {
  const auto w = u.grid.weights();
  std::vector<double> g(u.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = w[i] * std::abs(u.values[i]) * u.values[i];
  return RadialFn(u.grid, std::move(g));
}

RadialFn grad_phi(const RadialFn& u, const Nonlinearity& f) {
  auto g = grad_i_s(u);
  const auto w = u.grid.weights();
  for (std::size_t i = 0; i < g.size(); ++i) g.values[i] -= w[i] * f.f(u.values[i]);
  return g;
}

RadialFn hessian_apply(const RadialFn& u, const Nonlinearity& f, const RadialFn& v) {
  detail::require_same_grid(u, v);
  auto out = stiffness_apply(u.grid, v.values);
  const auto w = u.grid.weights();
  const auto pot = detail::density_potential(u.grid, squares(u));
  std::vector<double> cross(u.size());
  for (std::size_t i = 0; i < cross.size(); ++i) cross[i] = u.values[i] * v.values[i];
  const auto pot_cross = detail::density_potential(u.grid, cross);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] += w[i] * (v.values[i] * pot[i] + 2.0 * u.values[i] * pot_cross[i] -
                      f.derivative(u.values[i]) * v.values[i]);
  return RadialFn(u.grid, std::move(out));
}

IdentityResiduals identity_residuals(const RadialFn& u, const Nonlinearity& f,
                                     std::optional<double> lambda) {
  const auto e = phi(u, f);
  const auto w = u.grid.weights();
  double fu = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) fu += w[i] * f.f(u.values[i]) * u.values[i];

  IdentityResiduals r;
  r.tested = 2.0 * e.dirichlet + 4.0 * e.coulomb - fu;
  r.tested_rel = ratio(r.tested, {2.0 * e.dirichlet, 4.0 * e.coulomb, fu});
  r.pohozaev = e.dirichlet + 5.0 * e.coulomb - 3.0 * e.nonlinear;
  r.pohozaev_rel = ratio(r.pohozaev, {e.dirichlet, 5.0 * e.coulomb, 3.0 * e.nonlinear});
  if (lambda) {
    const double is = e.i_s();
    const double lj = *lambda * j_s(u);
    r.h12 = is - lj;
    r.h12_rel = ratio(*r.h12, {is, lj});
  }
  return r;
}

double psi_tilde(const RadialFn& u) {
  const double j = j_s(u);
  if (j == 0.0) throw DegenerateInputError("psi_tilde: J_s(u) = 0");
  return 1.0 / j;
}

} // namespace sps
