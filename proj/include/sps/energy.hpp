#pragma once

#include <optional>

#include "sps/grid.hpp"
#include "sps/nonlinearity.hpp"

namespace sps {

/// Parts of Phi(u) = 1/2 int |grad u|^2 + (1/16 pi) D(u) - int F(u).
struct EnergyBreakdown {
  double dirichlet{};
  double coulomb{};
  double nonlinear{};
  double total{};

  /// I_s(u) = dirichlet + coulomb.
  double i_s() const noexcept { return dirichlet + coulomb; }
};

/// Residuals of the identities every solution satisfies:
///   tested   = int |grad u|^2 + (1/4 pi) D - int f(u) u
///   pohozaev = 1/2 int |grad u|^2 + (5/16 pi) D - 3 int F(u)
///   h12      = I_s(u) - lambda J_s(u)          (eigen solves only)
/// The *_rel fields divide by the largest constituent term in absolute value.
struct IdentityResiduals {
  double tested{};
  double tested_rel{};
  double pohozaev{};
  double pohozaev_rel{};
  std::optional<double> h12;
  std::optional<double> h12_rel;
};

/// Discrete Dirichlet energy 1/2 int |grad u|^2 (P1 stiffness form).
double dirichlet_energy(const RadialFn& u);

/// I_s(u) = 1/2 int |grad u|^2 + (1/16 pi) D(u).
double i_s(const RadialFn& u);

/// J_s(u) = (1/3) int |u|^3.
double j_s(const RadialFn& u);

EnergyBreakdown phi(const RadialFn& u, const Nonlinearity& f);

/// Exact gradient of phi(., f).total with respect to the node values.
RadialFn grad_phi(const RadialFn& u, const Nonlinearity& f);

/// Hessian of the discrete energy applied to v.
RadialFn hessian_apply(const RadialFn& u, const Nonlinearity& f, const RadialFn& v);

/// Gradient of I_s and of J_s separately (for constrained problems on M_s).
RadialFn grad_i_s(const RadialFn& u);
RadialFn grad_j_s(const RadialFn& u);

IdentityResiduals identity_residuals(const RadialFn& u, const Nonlinearity& f,
                                     std::optional<double> lambda = std::nullopt);

/// 1/J_s(u); equals the restricted functional on M_s when I_s(u) = 1.
/// Throws DegenerateInputError when J_s(u) = 0.
double psi_tilde(const RadialFn& u);

} // namespace sps
