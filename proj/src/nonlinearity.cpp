#include "sps/nonlinearity.hpp"

#include <cmath>
#include <sstream>

#include "format.hpp"
#include "sps/error.hpp"

namespace sps {

namespace {

// t^2/2 - t + log(1 + t) for t >= 0; the series avoids cancellation near 0.
double saturating_primitive(double a) {
  if (a < 0.05) {
    double term = a * a * a;
    double s = 0.0;
    for (int k = 3; k < 14; ++k) {
      s += ((k % 2) ? 1.0 : -1.0) * term / k;
      term *= a;
    }
    return s;
  }
  return 0.5 * a * a - a + std::log1p(a);
}

} // namespace

Nonlinearity::Nonlinearity(std::vector<PowerTerm> terms, std::optional<double> saturating)
    : terms_(std::move(terms)), saturating_(saturating) {
  for (const auto& t : terms_) {
    if (!std::isfinite(t.coef)) throw ConfigError("nonlinearity: non-finite coefficient");
    if (!(t.exponent > min_exponent && t.exponent <= max_exponent))
      throw ConfigError("nonlinearity: exponent " + detail::format_double(t.exponent) +
                        " outside (18/7, 6]");
  }
  if (saturating_ && !std::isfinite(*saturating_))
    throw ConfigError("nonlinearity: non-finite saturating coefficient");
}

Nonlinearity Nonlinearity::power(double coef, double exponent) { return Nonlinearity({{coef, exponent}}); }

Nonlinearity Nonlinearity::scaled(double lambda) { return power(lambda, 3.0); }

Nonlinearity Nonlinearity::saturating_only(double lambda) { return Nonlinearity({}, lambda); }

Nonlinearity Nonlinearity::tfdw(double sigma, double q) { return Nonlinearity({{1.0, sigma}, {-1.0, q}}); }

double Nonlinearity::f(double t) const {
  const double a = std::abs(t);
  double s = 0.0;
  for (const auto& term : terms_) s += term.coef * std::pow(a, term.exponent - 2.0) * t;
  if (saturating_) s += *saturating_ * a * t / (1.0 + a);
  return s;
}

double Nonlinearity::primitive(double t) const {
  const double a = std::abs(t);
  double s = 0.0;
  for (const auto& term : terms_) s += term.coef / term.exponent * std::pow(a, term.exponent);
  if (saturating_) s += *saturating_ * saturating_primitive(a);
  return s;
}

double Nonlinearity::derivative(double t) const {
  const double a = std::abs(t);
  double s = 0.0;
  for (const auto& term : terms_) s += term.coef * (term.exponent - 1.0) * std::pow(a, term.exponent - 2.0);
  if (saturating_) s += *saturating_ * a * (2.0 + a) / ((1.0 + a) * (1.0 + a));
  return s;
}

bool Nonlinearity::has_positive_part() const noexcept {
  for (const auto& t : terms_)
    if (t.coef > 0.0) return true;
  return saturating_ && *saturating_ > 0.0;
}

std::string Nonlinearity::describe() const {
  std::ostringstream os;
  bool first = true;
  for (const auto& t : terms_) {
    os << (first ? "" : " + ") << detail::format_double(t.coef) << "|t|^("
       << detail::format_double(t.exponent) << "-2)t";
    first = false;
  }
  if (saturating_) os << (first ? "" : " + ") << detail::format_double(*saturating_) << "|t|t/(1+|t|)";
  if (first && !saturating_) os << "0";
  return os.str();
}

} // namespace sps
