#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sps/io.hpp"
#include "sps/nonlinearity.hpp"
#include "sps/solvers.hpp"

namespace sps::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_numerical = 1;
inline constexpr int exit_config = 2;

/// Gaussian seeds A exp(-r^2 / (2 l^2)) for the axiom command, alternating in sign.
struct SeedFamily {
  std::size_t count = 20;
  double width_min = 1.0;
  double width_max = 2.5;
  double amplitude_min = 0.5;
  double amplitude_max = 2.0;
};

/// "q": f = coef |t|^{q-2} t per value. "lambda": every coefficient of the configured
/// nonlinearity (default |t| t) multiplied by the value.
struct SweepSpec {
  std::string param;
  std::vector<double> values;
  double coef = 1.0;
};

struct ExperimentConfig {
  std::size_t n = 2048;
  double r_max = eigen_default_r_max;
  double stretch = eigen_default_stretch;
  SolverConfig solver;
  std::optional<Nonlinearity> nonlinearity;
  /// Scales for family checks (eigen) or the axiom suite; per-command default when absent.
  std::optional<std::vector<double>> ts;
  std::size_t k = 1;
  SeedFamily seeds;
  std::optional<SweepSpec> sweep;

  Grid grid() const { return Grid::make(n, r_max, stretch); }
};

/// Strict parse: unknown fields and wrong types raise ConfigError; every sub-invariant is checked.
ExperimentConfig parse_config(const Json& j);
Json to_json(const ExperimentConfig& c);

/// {"terms": [{"coef": a, "exponent": q}, ...], "saturating": lambda} or {"preset": "tfdw"}.
Nonlinearity nonlinearity_from_json(const Json& j);
Json to_json(const Nonlinearity& f);

/// Entry point shared by the executable and the tests. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace sps::cli
