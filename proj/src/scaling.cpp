#include "sps/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "format.hpp"
#include "sps/energy.hpp"
#include "sps/error.hpp"
#include "sps/hartree.hpp"

namespace sps {

using detail::format_double;

double numerical_support(const RadialFn& u) {
  const double cut = 1e-12 * u.sup_norm();
  const auto r = u.grid.nodes();
  for (std::size_t i = u.size(); i-- > 0;)
    if (std::abs(u.values[i]) > cut) return r[i];
  return 0.0;
}

ScaleResult scale_checked(const RadialFn& u, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("scale: t must be >= 0");
  if (t == 0.0) return {RadialFn(u.grid), 0.0, std::nullopt};
  if (t == 1.0) return {u, 0.0, std::nullopt};

  ScaleResult out{resample(u, t), 0.0, std::nullopt};
  out.fn *= t * t;

  if (t < 1.0) {
    const auto r = u.grid.nodes();
    const auto w = u.grid.weights();
    const double edge = t * u.grid.r_max();
    double total = 0.0, lost = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double m = w[i] * u.values[i] * u.values[i];
      total += m;
      if (r[i] > edge) lost += m;
    }
    out.lost_fraction = total > 0.0 ? lost / total : 0.0;
    const double support = numerical_support(u);
    if (support > edge) {
      out.warning = "scale t=" + format_double(t) + ": support radius " + format_double(support) +
                    " exceeds t*r_max=" + format_double(edge) + ", lost mass fraction " +
                    format_double(out.lost_fraction);
    }
  }
  return out;
}

RadialFn scale(const RadialFn& u, double t) {
  auto res = scale_checked(u, t);
  if (res.lost_fraction > max_lost_fraction)
    throw TruncationError(*res.warning + " (limit " + format_double(max_lost_fraction) + ")");
  return std::move(res.fn);
}

Projection project(const RadialFn& u) {
  const double is = i_s(u);
  if (!(is > 0.0)) throw DegenerateInputError("project: I_s(u) = 0");
  const double t = std::pow(is, -1.0 / scaling_exponent);
  return {t, scale(u, t)};
}

double normalization_root(double a, double d, double level) {
  if (!(a > 0.0) && !(d > 0.0)) throw DegenerateInputError("scalar_normalize: I_s(u) = 0");
  // tau^2 = (-a + sqrt(a^2 + 4 d L)) / (2 d), written without cancellation
  const double tau2 = 2.0 * level / (a + std::sqrt(a * a + 4.0 * d * level));
  return std::sqrt(tau2);
}

ScalarNormalization scalar_normalize(const RadialFn& u, double level) {
  if (u.is_zero()) throw DegenerateInputError("scalar_normalize: u = 0");
  const double a = dirichlet_energy(u);
  const double d = i_s(u) - a;
  const double tau = normalization_root(a, d, level);
  return {tau, tau * u};
}

double energy_norm(const RadialFn& u) {
  return std::sqrt(2.0 * dirichlet_energy(u) + std::sqrt(coulomb_energy(u)));
}

const char* to_string(Regime r) noexcept {
  switch (r) {
  case Regime::subscaled: return "subscaled";
  case Regime::asymptotically_scaled: return "asymptotically_scaled";
  case Regime::superscaled: return "superscaled";
  case Regime::superscaled_negative: return "superscaled_negative";
  }
  return "unknown";
}

Classification classify_nonlinearity(const Nonlinearity& f) {
  std::map<double, double> combined;
  for (const auto& t : f.terms()) combined[t.exponent] += t.coef;

  // The saturating part grows like |t| and never affects the limit.
  Classification c{Regime::subscaled, 0.0, 2.0, false};
  for (auto it = combined.rbegin(); it != combined.rend(); ++it) {
    if (it->second == 0.0) continue;
    c.leading_exponent = it->first;
    if (it->first < 3.0) {
      c.regime = Regime::subscaled;
    } else if (it->first == 3.0) {
      c.regime = Regime::asymptotically_scaled;
      c.lambda = it->second;
      c.flagged = it->second < 0.0;
    } else if (it->second > 0.0) {
      c.regime = Regime::superscaled;
    } else {
      c.regime = Regime::superscaled_negative;
      c.flagged = true;
    }
    break;
  }
  return c;
}

bool AxiomReport::all_passed() const noexcept {
  return failures.empty() &&
         std::all_of(checks.begin(), checks.end(), [](const AxiomCheck& c) { return c.passed; });
}

const AxiomCheck* AxiomReport::find(std::string_view name) const noexcept {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

namespace {

double rel_diff(const RadialFn& a, const RadialFn& b) {
  double num = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) num = std::max(num, std::abs(a.values[i] - b.values[i]));
  const double den = b.sup_norm();
  if (den == 0.0) return num;
  return num / den;
}

double power_integral(const RadialFn& u, double q) {
  const auto w = u.grid.weights();
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += w[i] * std::pow(std::abs(u.values[i]), q);
  return s;
}

class Tracker {
public:
  Tracker(std::string name, double tol) : check_{std::move(name), 0.0, tol, true, ""} {}

  void record(double err, const std::string& where, AxiomReport& rep) {
    if (!std::isfinite(err)) err = std::numeric_limits<double>::infinity();
    if (err > check_.worst_error || check_.worst_case.empty()) {
      check_.worst_error = std::max(check_.worst_error, err);
      if (err >= check_.worst_error) check_.worst_case = where;
    }
    if (!(err <= check_.tolerance)) {
      check_.passed = false;
      rep.failures.push_back(check_.name + " " + where + ": error " + format_double(err) + " > " +
                             format_double(check_.tolerance));
    }
  }

  void fail(const std::string& where, const std::string& why, AxiomReport& rep) {
    check_.passed = false;
    check_.worst_error = std::numeric_limits<double>::infinity();
    check_.worst_case = where;
    rep.failures.push_back(check_.name + " " + where + ": " + why);
  }

  AxiomCheck take() { return std::move(check_); }

private:
  AxiomCheck check_;
};

std::string where(std::size_t seed, double t) { return "seed " + std::to_string(seed) + " t=" + format_double(t); }

std::string where(std::size_t seed, double t1, double t2) {
  return "seed " + std::to_string(seed) + " t1=" + format_double(t1) + " t2=" + format_double(t2);
}

} // namespace

AxiomReport check_axioms(std::span<const RadialFn> seeds, std::span<const double> ts) {
  if (seeds.empty()) throw ConfigError("check_axioms: no seed functions");
  if (ts.empty()) throw ConfigError("check_axioms: no scales");
  for (double t : ts)
    if (!(t > 0.0 && t <= max_validated_scale))
      throw ConfigError("check_axioms: scale " + format_double(t) + " outside (0, 4]");

  constexpr double interp_tol = 1e-4;
  constexpr double exact_tol = 1e-12;
  const double s = scaling_exponent;
  const double power_qs[] = {2.7, 3.0, 4.5};

  AxiomReport rep;
  Tracker h1("h1_composition", interp_tol);
  Tracker h2("h2_scalar", exact_tol);
  Tracker h3("h3_endpoints", exact_tol);
  Tracker norm_id("norm_identity", interp_tol);
  Tracker norm_bd("norm_bound", interp_tol);
  Tracker is_law("i_s_homogeneity", interp_tol);
  Tracker js_law("j_s_homogeneity", interp_tol);
  Tracker d_law("coulomb_homogeneity", interp_tol);
  std::vector<Tracker> pw_law;
  for (double q : power_qs) pw_law.emplace_back("power_law_q" + format_double(q), interp_tol);

  auto note = [&rep](const std::optional<std::string>& w, const std::string& ctx) {
    if (w) rep.warnings.push_back(ctx + ": " + *w);
  };

  for (std::size_t k = 0; k < seeds.size(); ++k) {
    const RadialFn& u = seeds[k];
    if (u.is_zero()) throw ConfigError("check_axioms: seed " + std::to_string(k) + " is zero");

    // (H3)
    {
      const auto u0 = scale_checked(u, 0.0).fn;
      const auto u1 = scale_checked(u, 1.0).fn;
      const double e = std::max(u0.sup_norm() / u.sup_norm(), rel_diff(u1, u));
      h3.record(e, "seed " + std::to_string(k), rep);
    }

    const double is_u = i_s(u);
    const double js_u = j_s(u);
    const double d_u = coulomb_energy(u);
    const double dir_u = dirichlet_energy(u);
    const double norm_u = energy_norm(u);
    std::vector<double> pw_u;
    for (double q : power_qs) pw_u.push_back(power_integral(u, q));

    for (double t : ts) {
      const auto sc = scale_checked(u, t);
      note(sc.warning, where(k, t));
      if (sc.lost_fraction > max_lost_fraction) {
        const std::string why = "truncation lost mass fraction " + format_double(sc.lost_fraction);
        for (Tracker* tr : {&h2, &norm_id, &norm_bd, &is_law, &js_law, &d_law}) tr->fail(where(k, t), why, rep);
        for (auto& tr : pw_law) tr.fail(where(k, t), why, rep);
        continue;
      }
      const RadialFn& ut = sc.fn;

      // (H2) for positive, negative and fractional multipliers
      for (double tau : {-1.0, 2.5, -0.3}) {
        const auto lhs = scale_checked(tau * u, t).fn;
        const auto rhs = tau * ut;
        h2.record(rel_diff(lhs, rhs), where(k, t) + " tau=" + format_double(tau), rep);
      }

      const double t_s = std::pow(t, s);
      is_law.record(std::abs(i_s(ut) - t_s * is_u) / (t_s * is_u), where(k, t), rep);
      js_law.record(std::abs(j_s(ut) - t_s * js_u) / (t_s * js_u), where(k, t), rep);
      d_law.record(std::abs(coulomb_energy(ut) - t_s * d_u) / (t_s * d_u), where(k, t), rep);
      for (std::size_t j = 0; j < pw_law.size(); ++j) {
        const double law = std::pow(t, 2.0 * power_qs[j] - 3.0);
        pw_law[j].record(std::abs(power_integral(ut, power_qs[j]) - law * pw_u[j]) / (law * pw_u[j]),
                         where(k, t), rep);
      }

      // norm scaling: ||u_t||^2 = t^3 int|grad u|^2 + t^{3/2} D^{1/2} <= max(t^{3/2}, t^{3/4})^2 ||u||^2
      const double predicted = std::sqrt(t * t * t * 2.0 * dir_u + std::pow(t, 1.5) * std::sqrt(d_u));
      const double actual = energy_norm(ut);
      norm_id.record(std::abs(actual - predicted) / predicted, where(k, t), rep);
      const double bound = std::max(std::pow(t, 1.5), std::pow(t, 0.75)) * norm_u;
      norm_bd.record(std::max(0.0, actual / bound - 1.0), where(k, t), rep);

      // (H1) over validated compositions
      for (double t2 : ts) {
        const double t12 = t * t2;
        if (t12 < min_validated_scale || t12 > max_validated_scale) {
          rep.warnings.push_back(where(k, t, t2) + ": composed scale " + format_double(t12) +
                                 " out of validated range [0.25, 4], skipped");
          continue;
        }
        const auto inner = scale_checked(ut, t2);
        const auto direct = scale_checked(u, t12);
        note(inner.warning, where(k, t, t2));
        if (inner.lost_fraction > max_lost_fraction || direct.lost_fraction > max_lost_fraction) {
          h1.fail(where(k, t, t2),
                  "truncation lost mass fraction " +
                      format_double(std::max(inner.lost_fraction, direct.lost_fraction)),
                  rep);
          continue;
        }
        h1.record(rel_diff(inner.fn, direct.fn), where(k, t, t2), rep);
      }
    }
  }

  rep.checks.push_back(h1.take());
  rep.checks.push_back(h2.take());
  rep.checks.push_back(h3.take());
  rep.checks.push_back(norm_id.take());
  rep.checks.push_back(norm_bd.take());
  rep.checks.push_back(is_law.take());
  rep.checks.push_back(js_law.take());
  rep.checks.push_back(d_law.take());
  for (auto& tr : pw_law) rep.checks.push_back(tr.take());
  return rep;
}

} // namespace sps
