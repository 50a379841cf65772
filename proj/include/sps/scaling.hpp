#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sps/grid.hpp"
#include "sps/nonlinearity.hpp"

namespace sps {

/// Homogeneity exponent of the scaling u_t(x) = t^2 u(t x): I_s(u_t) = t^s I_s(u).
inline constexpr double scaling_exponent = 3.0;

/// Lost-mass fraction above which scale() refuses to dilate.
inline constexpr double max_lost_fraction = 1e-3;

/// Scales whose composition the axiom harness validates.
inline constexpr double min_validated_scale = 0.25;
inline constexpr double max_validated_scale = 4.0;

struct ScaleResult {
  RadialFn fn;
  /// Fraction of int u^2 dx pushed beyond r_max by the dilation (t < 1 only).
  double lost_fraction{};
  std::optional<std::string> warning;
};

/// u_t(r) = t^2 u(t r) with the loss bookkeeping; never throws on truncation.
ScaleResult scale_checked(const RadialFn& u, double t);

/// u_t(r) = t^2 u(t r). t = 0 gives the zero function, t = 1 returns u unchanged.
/// Throws DomainError for t < 0 and TruncationError if more than max_lost_fraction of the
/// mass would leave the ball.
RadialFn scale(const RadialFn& u, double t);

/// Smallest radius beyond which |u| <= 1e-12 sup |u|.
double numerical_support(const RadialFn& u);

struct Projection {
  double t{};
  RadialFn u_tilde;
};

/// Projection onto M_s = {I_s = 1} along the scaling orbit: t_u = I_s(u)^{-1/3}, u_tilde = u_{t_u}.
/// Throws DegenerateInputError for u = 0.
Projection project(const RadialFn& u);

struct ScalarNormalization {
  double tau{};
  RadialFn v;
};

/// Unique tau > 0 with I_s(tau u) = level, in closed form (I_s(tau u) = a tau^2 + d tau^4).
/// Throws DegenerateInputError for u = 0.
ScalarNormalization scalar_normalize(const RadialFn& u, double level = 1.0);

/// Closed-form positive root tau of a tau^2 + d tau^4 = level (a > 0, d >= 0).
double normalization_root(double a, double d, double level = 1.0);

/// ||u|| = [int |grad u|^2 + D(u)^{1/2}]^{1/2}.
double energy_norm(const RadialFn& u);

enum class Regime { subscaled, asymptotically_scaled, superscaled, superscaled_negative };

const char* to_string(Regime r) noexcept;

struct Classification {
  Regime regime{};
  /// Limit of f(t)/(|t| t) for the asymptotically scaled case, 0 otherwise.
  double lambda{};
  double leading_exponent{};
  /// Set when the limit falls outside the three classical cases (negative limit).
  bool flagged{};
};

/// Classifies f by the limit of f(t) / (|t| t) as |t| -> infinity.
Classification classify_nonlinearity(const Nonlinearity& f);

struct AxiomCheck {
  std::string name;
  double worst_error{};
  double tolerance{};
  bool passed{};
  /// Seed / scale pair that produced worst_error.
  std::string worst_case;
};

struct AxiomReport {
  std::vector<AxiomCheck> checks;
  std::vector<std::string> warnings;
  /// One line per (seed, t) pair that breached a tolerance or could not be evaluated.
  std::vector<std::string> failures;

  bool all_passed() const noexcept;
  const AxiomCheck* find(std::string_view name) const noexcept;
};

/// Evaluates the scaling axioms and homogeneity laws on every seed and scale.
/// Throws ConfigError for empty inputs or scales outside (0, 4].
AxiomReport check_axioms(std::span<const RadialFn> seeds, std::span<const double> ts);

} // namespace sps
