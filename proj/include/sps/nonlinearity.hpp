#pragma once

#include <optional>
#include <string>
#include <vector>

namespace sps {

/// a |t|^{q-2} t, primitive (a/q) |t|^q.
struct PowerTerm {
  double coef{};
  double exponent{};
  friend bool operator==(const PowerTerm&, const PowerTerm&) = default;
};

/// Autonomous odd nonlinearity f(t) = sum_i a_i |t|^{q_i - 2} t  [+ lambda |t| t / (1 + |t|)].
class Nonlinearity {
public:
  /// Lowest admissible exponent (exclusive): the radial Coulomb-Sobolev embedding threshold.
  static constexpr double min_exponent = 18.0 / 7.0;
  static constexpr double max_exponent = 6.0;

  Nonlinearity() = default;
  /// Validates on construction; throws ConfigError.
  Nonlinearity(std::vector<PowerTerm> terms, std::optional<double> saturating = std::nullopt);

  static Nonlinearity power(double coef, double exponent);
  /// lambda |t| t, the right-hand side of the scaled eigenvalue problem.
  static Nonlinearity scaled(double lambda);
  /// lambda |t| t / (1 + |t|).
  static Nonlinearity saturating_only(double lambda);
  /// |t|^{sigma-2} t - |t|^{q-2} t; sigma = 8/3, q = 10/3 is the Thomas-Fermi-Dirac-von Weizsaecker case.
  static Nonlinearity tfdw(double sigma = 8.0 / 3.0, double q = 10.0 / 3.0);

  const std::vector<PowerTerm>& terms() const noexcept { return terms_; }
  const std::optional<double>& saturating() const noexcept { return saturating_; }

  double f(double t) const;
  /// F(t) = int_0^t f.
  double primitive(double t) const;
  /// f'(t).
  double derivative(double t) const;

  /// True if some term (or the saturating part) has a positive coefficient.
  bool has_positive_part() const noexcept;

  std::string describe() const;

  friend bool operator==(const Nonlinearity&, const Nonlinearity&) = default;

private:
  std::vector<PowerTerm> terms_;
  std::optional<double> saturating_;
};

} // namespace sps
