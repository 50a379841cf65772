#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sps/energy.hpp"
#include "sps/grid.hpp"
#include "sps/nonlinearity.hpp"

namespace sps {

struct ArmijoParams {
  double initial_step = 1.0;
  double shrink = 0.5;
  double sufficient_decrease = 1e-4;
};

/// Deflation multiplier prod_j (1/||u - u_j||^2 + shift)^power.
struct DeflationParams {
  double shift = 1.0;
  double power = 1.0;
};

struct SolverConfig {
  std::size_t max_iters = 20000;
  /// Stopping tolerance on the sup-norm of the nodal gradient over the free nodes.
  double grad_tol = 1e-6;
  ArmijoParams armijo;
  std::uint64_t seed = 0;
  std::size_t path_nodes = 16;
  DeflationParams deflation;

  /// Throws ConfigError naming the first violated invariant.
  void validate() const;
};

struct SolveReport {
  RadialFn solution;
  EnergyBreakdown energy;
  std::optional<double> lambda;
  double grad_sup_norm{};
  IdentityResiduals residuals;
  std::size_t iters{};
  bool converged{};
  /// Set when the solver ended at (or was sent straight to) the zero function.
  bool trivial{};
  std::vector<std::string> warnings;
  /// Which algorithm produced the report, e.g. "lbfgs+newton".
  std::string method;
  /// Objective after every accepted line-search step of the descent phase.
  std::vector<double> energy_history;
  /// Extra scalars (multiplier estimates, path levels, ...). Ordered for stable output.
  std::map<std::string, double> diagnostics;
};

/// Default ball for eigen solves. The eigenfunction tail decays slower than exponentially, and
/// both the multiplier match (1/J_s vs the discrete Lagrange multiplier) and the t = 2 family
/// member need it captured; the geometric stretch keeps the core resolved at that radius.
inline constexpr double eigen_default_r_max = 80.0;
inline constexpr double eigen_default_stretch = 1.002;

/// Random bump A t^2 exp(-(t r)^2 / 2) with t, A drawn from the given ranges (log-uniform).
RadialFn random_bump(const Grid& g, std::uint64_t seed, double t_lo = 0.5, double t_hi = 2.0,
                     double a_lo = 0.5, double a_hi = 2.0);

/// First scaled eigenvalue: minimizes 1/J_s over {I_s = 1}. lambda = 1/J_s(u*).
/// Throws DegenerateDescentError if the iterate collapses to zero.
SolveReport minimize_eigen(const Grid& grid, const SolverConfig& cfg);
SolveReport minimize_eigen(const RadialFn& initial, const SolverConfig& cfg);

struct FamilyEntry {
  double t{};
  bool evaluated{};
  double grad_sup_norm{};
  double bound{};
  /// |I_s(v) - t^3 I_s(u*)| / (t^3 I_s(u*)).
  double i_s_rel_error{};
  double lost_fraction{};
  bool passed{};
};

struct FamilyReport {
  std::vector<FamilyEntry> entries;
  std::vector<std::string> warnings;
  bool all_passed() const noexcept;
};

/// Checks scale(u*, t) against the eigen equation with the same lambda.
/// Scales outside [0.25, 4] are skipped with a warning.
FamilyReport eigen_family_check(const RadialFn& u_star, double lambda, std::span<const double> ts);

/// Global minimizer of Phi for subscaled (or asymptotically scaled, or flagged) f.
/// Throws ClassificationError for superscaled f.
SolveReport minimize_global(const Nonlinearity& f, const Grid& grid, const SolverConfig& cfg);
SolveReport minimize_global(const Nonlinearity& f, const RadialFn& initial, const SolverConfig& cfg);

/// Mountain-pass critical point for superscaled f with positive leading coefficient.
/// Throws ClassificationError for other f and GeometryError if the path collapses.
SolveReport mountain_pass(const Nonlinearity& f, const Grid& grid, const SolverConfig& cfg);

struct DeflationResult {
  std::vector<SolveReport> reports;
  /// Fewer than k distinct solutions were found.
  bool exhausted{};
  /// Symmetric matrix of sign-aware L2 distances min(||u_i - u_j||, ||u_i + u_j||).
  std::vector<std::vector<double>> distances;
};

/// Minimum pairwise distance between accepted representatives.
inline constexpr double min_solution_distance = 1e-2;

/// Base solver followed by deflated Newton runs from a fixed seed family. Throws ConfigError for k = 0.
DeflationResult deflated_search(const Nonlinearity& f, std::size_t k, const Grid& grid, const SolverConfig& cfg);

/// min(||a - b||, ||a + b||) in L2.
double sign_aware_distance(const RadialFn& a, const RadialFn& b);

} // namespace sps
