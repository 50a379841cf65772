#include "sps/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <numbers>
#include <random>

#include <boost/math/tools/minima.hpp>

#include "format.hpp"
#include "linalg.hpp"
#include "sps/error.hpp"
#include "sps/scaling.hpp"

namespace sps {

using detail::dot;
using detail::format_double;
using detail::Preconditioner;
using detail::Vec;

void SolverConfig::validate() const {
  if (max_iters < 1) throw ConfigError("solver: max_iters must be >= 1");
  if (!(grad_tol > 0.0) || !std::isfinite(grad_tol)) throw ConfigError("solver: grad_tol must be > 0");
  if (!(armijo.shrink > 0.0 && armijo.shrink < 1.0)) throw ConfigError("solver: armijo shrink must lie in (0, 1)");
  if (!(armijo.initial_step > 0.0) || !std::isfinite(armijo.initial_step))
    throw ConfigError("solver: armijo initial_step must be > 0");
  if (!(armijo.sufficient_decrease > 0.0 && armijo.sufficient_decrease < 1.0))
    throw ConfigError("solver: armijo sufficient_decrease must lie in (0, 1)");
  if (path_nodes < 8) throw ConfigError("solver: path_nodes must be >= 8");
  if (!(deflation.shift >= 0.0) || !std::isfinite(deflation.shift))
    throw ConfigError("solver: deflation shift must be >= 0");
  if (!(deflation.power > 0.0) || !std::isfinite(deflation.power))
    throw ConfigError("solver: deflation power must be > 0");
}

namespace {

constexpr double min_armijo_step = 1e-14;
constexpr std::size_t lbfgs_memory = 10;
constexpr std::size_t newton_max_iters = 60;
constexpr double minres_rtol = 1e-10;
constexpr double identity_tol = 1e-3;

bool all_finite(const Vec& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Zeroes the pinned outer node.
Vec& pin(Vec& v) {
  v.back() = 0.0;
  return v;
}

Vec free_grad_phi(const RadialFn& u, const Nonlinearity& f) {
  auto g = grad_phi(u, f).values;
  return pin(g);
}

Vec stiffness_apply(const Grid& g, const Vec& u) {
  const auto k = g.stiffness();
  Vec out(u.size(), 0.0);
  for (std::size_t i = 0; i + 1 < u.size(); ++i) {
    const double flux = k[i] * (u[i + 1] - u[i]);
    out[i] -= flux;
    out[i + 1] += flux;
  }
  return out;
}

double phi_total(const RadialFn& u, const Nonlinearity& f) {
  if (!all_finite(u.values)) return std::numeric_limits<double>::infinity();
  const double v = phi(u, f).total;
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------
// L-BFGS with Armijo backtracking and the tridiagonal preconditioner as H0.

enum class Exit { converged, stagnated, max_iters };

struct Problem {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  std::function<bool(const Vec&, const Vec&)> done;
  std::function<void(Vec&)> after_step;
};

struct LbfgsOut {
  Vec x;
  std::size_t iters{};
  Exit exit{};
};

LbfgsOut lbfgs(Vec x, const Problem& pb, const Preconditioner& prec, const SolverConfig& cfg,
               std::vector<double>& history) {
  std::deque<Vec> ss, ys;
  std::deque<double> rhos;
  double fx = pb.value(x);
  Vec gx = pb.gradient(x);
  history.push_back(fx);
  std::size_t flat = 0;

  for (std::size_t it = 0; it < cfg.max_iters; ++it) {
    if (pb.done(x, gx)) return {std::move(x), it, Exit::converged};

    // two-loop recursion
    Vec q = gx;
    std::vector<double> alpha(ss.size());
    for (std::size_t j = ss.size(); j-- > 0;) {
      alpha[j] = rhos[j] * dot(ss[j], q);
      detail::axpy(-alpha[j], ys[j], q);
    }
    Vec z = prec.apply(pin(q));
    for (std::size_t j = 0; j < ss.size(); ++j) {
      const double b = rhos[j] * dot(ys[j], z);
      detail::axpy(alpha[j] - b, ss[j], z);
    }
    Vec d(z.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = -z[i];
    pin(d);
    double slope = dot(gx, d);
    if (!(slope < 0.0)) {
      ss.clear();
      ys.clear();
      rhos.clear();
      Vec g0 = gx;
      d = prec.apply(pin(g0));
      for (double& v : d) v = -v;
      pin(d);
      slope = dot(gx, d);
      if (!(slope < 0.0)) return {std::move(x), it, Exit::stagnated};
    }

    double step = cfg.armijo.initial_step;
    Vec xn(x.size());
    double fn = 0.0;
    for (;;) {
      for (std::size_t i = 0; i < x.size(); ++i) xn[i] = x[i] + step * d[i];
      fn = pb.value(xn);
      if (fn <= fx + cfg.armijo.sufficient_decrease * step * slope) break;
      step *= cfg.armijo.shrink;
      if (step < min_armijo_step) return {std::move(x), it, Exit::stagnated};
    }
    if (pb.after_step) pb.after_step(xn);
    Vec gn = pb.gradient(xn);

    Vec s(x.size()), y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      s[i] = xn[i] - x[i];
      y[i] = gn[i] - gx[i];
    }
    const double sy = dot(s, y);
    if (sy > 1e-16 * dot(y, y)) {
      ss.push_back(std::move(s));
      ys.push_back(std::move(y));
      rhos.push_back(1.0 / sy);
      if (ss.size() > lbfgs_memory) {
        ss.pop_front();
        ys.pop_front();
        rhos.pop_front();
      }
    }
    // Decrease at the rounding level for many steps in a row counts as stagnation.
    flat = (fx - fn <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(fx)) ? flat + 1 : 0;
    x.swap(xn);
    gx.swap(gn);
    fx = fn;
    history.push_back(fx);
    if (flat >= 50) return {std::move(x), it + 1, Exit::stagnated};
  }
  const Exit exit = pb.done(x, gx) ? Exit::converged : Exit::max_iters;
  return {std::move(x), cfg.max_iters, exit};
}

// ---------------------------------------------------------------------------
// Deflation multiplier around known solutions (both signs) and the zero function.

class Deflator {
public:
  Deflator(Grid g, DeflationParams p) : grid_(std::move(g)), p_(p) {}

  void add(const Vec& u) { centers_.push_back(u); }

  // log m and grad log m
  std::pair<double, Vec> log_multiplier(const Vec& u) const {
    const auto w = grid_.weights();
    double logm = 0.0;
    Vec grad(u.size(), 0.0);
    auto term = [&](const Vec* c, double sign) {
      Vec d(u.size());
      for (std::size_t i = 0; i < u.size(); ++i) d[i] = u[i] - (c ? sign * (*c)[i] : 0.0);
      const double nn = detail::weighted_dot(grid_, d, d);
      const double inner = 1.0 / nn + p_.shift;
      logm += p_.power * std::log(inner);
      const double c0 = p_.power * (-2.0 / (nn * nn)) / inner;
      for (std::size_t i = 0; i < u.size(); ++i) grad[i] += c0 * w[i] * d[i];
    };
    term(nullptr, 1.0);
    for (const auto& c : centers_) {
      term(&c, 1.0);
      term(&c, -1.0);
    }
    return {logm, std::move(grad)};
  }

private:
  Grid grid_;
  DeflationParams p_;
  std::vector<Vec> centers_;
};

// ---------------------------------------------------------------------------
// Newton-MINRES on grad Phi = 0 with a residual merit line search.

struct NewtonOut {
  RadialFn u;
  std::size_t iters{};
  bool converged{};
  std::size_t minres_iters{};
};

NewtonOut newton(RadialFn u, const Nonlinearity& f, const SolverConfig& cfg, const Preconditioner& prec,
                 const Deflator* defl, std::size_t max_iters) {
  const std::size_t n = u.size();
  auto m_inv = [&prec](const Vec& x) {
    Vec y = x;
    return prec.apply(y);
  };
  auto merit = [&](const RadialFn& x) {
    if (!all_finite(x.values)) return std::numeric_limits<double>::infinity();
    Vec g = free_grad_phi(x, f);
    const Vec pg = prec.apply(g);
    double m = dot(g, pg);
    if (defl) m *= std::exp(2.0 * defl->log_multiplier(x.values).first);
    return std::isfinite(m) ? m : std::numeric_limits<double>::infinity();
  };

  NewtonOut out{std::move(u), 0, false, 0};
  for (std::size_t it = 0; it < max_iters; ++it) {
    Vec g = free_grad_phi(out.u, f);
    if (detail::sup_norm(g) <= cfg.grad_tol) {
      out.converged = true;
      return out;
    }
    const RadialFn& cur = out.u;
    auto op = [&cur, &f, n](const Vec& v) {
      RadialFn vv(cur.grid);
      vv.values = v;
      vv.values[n - 1] = 0.0;
      Vec hv = hessian_apply(cur, f, vv).values;
      hv[n - 1] = v[n - 1];
      return hv;
    };
    Vec rhs = g;
    for (double& x : rhs) x = -x;
    auto sol = detail::minres(op, rhs, m_inv, minres_rtol, 4 * n);
    out.minres_iters += sol.iters;
    Vec d = std::move(sol.x);
    pin(d);
    if (defl) {
      const auto [logm, glogm] = defl->log_multiplier(out.u.values);
      const double denom = 1.0 - dot(glogm, d);
      if (denom != 0.0 && std::isfinite(denom)) {
        const double tau = 1.0 / denom;
        for (double& x : d) x *= tau;
      }
    }

    const double m0 = merit(out.u);
    double step = 1.0;
    RadialFn trial(out.u.grid);
    for (;;) {
      for (std::size_t i = 0; i < n; ++i) trial.values[i] = out.u.values[i] + step * d[i];
      if (merit(trial) <= (1.0 - 1e-4 * step) * m0) break;
      step *= 0.5;
      if (step < 1e-10) {
        out.iters = it;
        return out;
      }
    }
    out.u.values.swap(trial.values);
    out.iters = it + 1;
  }
  out.converged = detail::sup_norm(free_grad_phi(out.u, f)) <= cfg.grad_tol;
  return out;
}

bool certified(const IdentityResiduals& r) {
  return std::abs(r.tested_rel) <= identity_tol && std::abs(r.pohozaev_rel) <= identity_tol &&
         (!r.h12_rel || std::abs(*r.h12_rel) <= identity_tol);
}

// Fills energy, residuals and gradient. A gradient-converged report whose identities fail is
// downgraded: the discrete critical point is then an artifact of the truncated ball.
void finalize(SolveReport& rep, const Nonlinearity& f, std::optional<double> lambda) {
  rep.energy = phi(rep.solution, f);
  rep.residuals = identity_residuals(rep.solution, f, lambda);
  rep.grad_sup_norm = detail::sup_norm(free_grad_phi(rep.solution, f));
  rep.lambda = lambda;
  if (!std::isfinite(rep.energy.total)) throw DegenerateDescentError("solver: non-finite energy");
  if (rep.converged && !certified(rep.residuals)) {
    rep.converged = false;
    rep.warnings.push_back("truncation: gradient converged but identity residuals (tested " +
                           format_double(rep.residuals.tested_rel) + ", pohozaev " +
                           format_double(rep.residuals.pohozaev_rel) + ") exceed " + format_double(identity_tol) +
                           "; numerical support " + format_double(numerical_support(rep.solution)) +
                           " vs r_max " + format_double(rep.solution.grid.r_max()));
  }
}

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(std::log(lo), std::log(hi));
  return std::exp(d(rng));
}

RadialFn bump(const Grid& g, double t, double amp) {
  auto u = RadialFn::from(g, [t, amp](double r) { return amp * t * t * std::exp(-0.5 * (t * r) * (t * r)); });
  u.values.back() = 0.0;
  return u;
}

// Radius at which |u| first drops below half its maximum.
double half_width(const RadialFn& u) {
  const double top = u.sup_norm();
  const auto r = u.grid.nodes();
  std::size_t peak = 0;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (std::abs(u.values[i]) == top) {
      peak = i;
      break;
    }
  for (std::size_t i = peak; i < u.size(); ++i)
    if (std::abs(u.values[i]) <= 0.5 * top) return std::max(r[i], r[1]);
  return u.grid.r_max();
}

// ---------------------------------------------------------------------------
// Eigen objective: 1/J_s(tau(u) u) with tau the closed-form normalization root.

struct EigenParts {
  double a{}, d{}, tau{}, j{};
};

EigenParts eigen_parts(const RadialFn& u) {
  EigenParts p;
  p.a = dirichlet_energy(u);
  p.d = i_s(u) - p.a;
  p.tau = normalization_root(p.a, p.d);
  p.j = j_s(u);
  return p;
}

Vec eigen_residual(const RadialFn& u, double lambda) {
  auto gi = grad_i_s(u).values;
  const auto gj = grad_j_s(u).values;
  for (std::size_t i = 0; i < gi.size(); ++i) gi[i] -= lambda * gj[i];
  return pin(gi);
}

void normalize_in_place(RadialFn& u) {
  const auto p = eigen_parts(u);
  u *= p.tau;
}

} // namespace

RadialFn random_bump(const Grid& g, std::uint64_t seed, double t_lo, double t_hi, double a_lo, double a_hi) {
  std::mt19937_64 rng(seed);
  const double t = log_uniform(rng, t_lo, t_hi);
  const double a = log_uniform(rng, a_lo, a_hi);
  return bump(g, t, a);
}

double sign_aware_distance(const RadialFn& a, const RadialFn& b) {
  detail::require_same_grid(a, b);
  return std::min(l2_norm(a - b), l2_norm(a + b));
}

// ---------------------------------------------------------------------------

SolveReport minimize_eigen(const Grid& grid, const SolverConfig& cfg) {
  return minimize_eigen(random_bump(grid, cfg.seed), cfg);
}

SolveReport minimize_eigen(const RadialFn& initial, const SolverConfig& cfg) {
  cfg.validate();
  const Grid& grid = initial.grid;
  const std::size_t n = grid.size();
  RadialFn u = initial;
  u.values.back() = 0.0;
  if (u.is_zero()) throw DegenerateDescentError("minimize_eigen: initial guess is zero");
  normalize_in_place(u);
  const Preconditioner prec(grid);

  SolveReport rep{RadialFn(grid), {}, std::nullopt, 0.0, {}, 0, false, false, {}, "lbfgs", {}, {}};
  RadialFn work(grid);
  auto load = [&work](const Vec& x) -> const RadialFn& {
    work.values = x;
    return work;
  };
  auto tol_for = [&cfg](const Vec&) { return cfg.grad_tol; };

  Problem pb;
  pb.value = [&](const Vec& x) {
    if (!all_finite(x)) return std::numeric_limits<double>::infinity();
    const auto& w = load(x);
    const auto p = eigen_parts(w);
    const double v = 1.0 / (p.tau * p.tau * p.tau * p.j);
    return std::isfinite(v) && p.j > 0.0 ? v : std::numeric_limits<double>::infinity();
  };
  pb.gradient = [&](const Vec& x) {
    const auto& w = load(x);
    const auto p = eigen_parts(w);
    const Vec ga = stiffness_apply(grid, x);
    Vec gd = grad_i_s(w).values;
    const Vec gj = grad_j_s(w).values;
    const double fv = 1.0 / (p.tau * p.tau * p.tau * p.j);
    const double den = 2.0 * p.tau * p.a + 4.0 * p.tau * p.tau * p.tau * p.d;
    Vec g(n);
    for (std::size_t i = 0; i < n; ++i) {
      gd[i] -= ga[i];
      const double gt = -(p.tau * p.tau * ga[i] + std::pow(p.tau, 4) * gd[i]) / den;
      g[i] = -fv * (3.0 * gt / p.tau + gj[i] / p.j);
    }
    return pin(g);
  };
  pb.done = [&](const Vec& x, const Vec&) {
    const auto& w = load(x);
    const double lambda = 1.0 / j_s(w);
    return detail::sup_norm(eigen_residual(w, lambda)) <= tol_for(x);
  };
  pb.after_step = [&](Vec& x) {
    auto& w = work;
    w.values = x;
    normalize_in_place(w);
    x = w.values;
  };

  auto out = lbfgs(u.values, pb, prec, cfg, rep.energy_history);
  u.values = std::move(out.x);
  if (u.sup_norm() == 0.0 || !all_finite(u.values) || !(j_s(u) > 0.0))
    throw DegenerateDescentError("minimize_eigen: iterate collapsed to zero");
  rep.iters = out.iters;

  if (out.exit == Exit::stagnated) {
    // Bordered Newton on (grad I_s - lambda grad J_s, I_s - 1) with lambda as an unknown.
    rep.method = "lbfgs+bordered_newton";
    double best = detail::sup_norm(eigen_residual(u, 1.0 / j_s(u)));
    RadialFn best_u = u;
    std::size_t polish = 0;
    for (; polish < newton_max_iters && best > cfg.grad_tol; ++polish) {
      const double is = i_s(u), j = j_s(u), lambda = is / j;
      Vec gj = grad_j_s(u).values;
      pin(gj);
      const Vec gr = eigen_residual(u, lambda);
      const auto f = Nonlinearity::scaled(lambda);
      auto op = [&](const Vec& z) {
        RadialFn v(grid);
        std::copy(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(n), v.values.begin());
        v.values[n - 1] = 0.0;
        Vec hv = hessian_apply(u, f, v).values;
        pin(hv);
        for (std::size_t i = 0; i < n; ++i) hv[i] -= gj[i] * z[n];
        hv[n - 1] = z[n - 1];
        hv.push_back(-dot(gj, v.values));
        return hv;
      };
      auto m_inv = [&](const Vec& z) {
        Vec head(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(n));
        Vec y = prec.apply(head);
        y.push_back(z[n]);
        return y;
      };
      Vec rhs(n + 1);
      for (std::size_t i = 0; i < n; ++i) rhs[i] = -gr[i];
      rhs[n] = (1.0 - is) / lambda;
      const auto sol = detail::minres(op, rhs, m_inv, minres_rtol, 4 * n);
      for (std::size_t i = 0; i + 1 < n; ++i) u.values[i] += sol.x[i];
      if (!all_finite(u.values)) break;
      normalize_in_place(u);
      const double res = detail::sup_norm(eigen_residual(u, 1.0 / j_s(u)));
      if (res < best) {
        best = res;
        best_u = u;
      } else if (res > 10.0 * best) {
        break;
      }
    }
    u = best_u;
    rep.iters += polish;
  }

  const double lambda = 1.0 / j_s(u);
  rep.solution = u;
  rep.converged = detail::sup_norm(eigen_residual(u, lambda)) <= cfg.grad_tol;
  finalize(rep, Nonlinearity::scaled(lambda), lambda);

  Vec gi = grad_i_s(u).values, gj = grad_j_s(u).values;
  pin(gi);
  pin(gj);
  rep.diagnostics["multiplier"] = dot(gi, gj) / dot(gj, gj);
  rep.diagnostics["i_s"] = i_s(u);
  rep.diagnostics["sup_abs"] = u.sup_norm();
  rep.diagnostics["sign_changes"] = [&u] {
    double c = 0.0;
    for (std::size_t i = 0; i + 2 < u.size(); ++i)
      if (u.values[i] * u.values[i + 1] < 0.0) c += 1.0;
    return c;
  }();
  if (rep.grad_sup_norm > cfg.grad_tol) {
    if (out.exit == Exit::max_iters)
      rep.warnings.push_back("max_iters reached before the gradient tolerance");
    else
      rep.warnings.push_back("stagnation: gradient " + format_double(rep.grad_sup_norm) + " above tolerance " +
                             format_double(cfg.grad_tol) + " after Newton polish");
  }
  return rep;
}

bool FamilyReport::all_passed() const noexcept {
  return std::all_of(entries.begin(), entries.end(), [](const FamilyEntry& e) { return e.passed; });
}

FamilyReport eigen_family_check(const RadialFn& u_star, double lambda, std::span<const double> ts) {
  FamilyReport rep;
  const double is_u = i_s(u_star);
  for (double t : ts) {
    FamilyEntry e;
    e.t = t;
    if (!(t >= min_validated_scale && t <= max_validated_scale)) {
      e.passed = true;
      rep.warnings.push_back("t=" + format_double(t) + " outside validated range [0.25, 4], skipped");
      rep.entries.push_back(e);
      continue;
    }
    const auto sc = scale_checked(u_star, t);
    if (sc.warning) rep.warnings.push_back("t=" + format_double(t) + ": " + *sc.warning);
    e.evaluated = true;
    e.lost_fraction = sc.lost_fraction;
    e.grad_sup_norm = detail::sup_norm(eigen_residual(sc.fn, lambda));
    e.bound = 5e-3 * std::max(1.0, sc.fn.sup_norm());
    const double expect = t * t * t * is_u;
    e.i_s_rel_error = std::abs(i_s(sc.fn) - expect) / expect;
    e.passed = e.grad_sup_norm <= e.bound && e.i_s_rel_error <= 1e-4 && e.lost_fraction <= max_lost_fraction;
    rep.entries.push_back(e);
  }
  return rep;
}

// ---------------------------------------------------------------------------

SolveReport minimize_global(const Nonlinearity& f, const Grid& grid, const SolverConfig& cfg) {
  // Lowest-energy bump among a deterministic candidate family; wide bumps are needed when
  // the zero function is a local minimum.
  std::mt19937_64 rng(cfg.seed);
  RadialFn best(grid);
  double best_phi = std::numeric_limits<double>::infinity();
  for (int c = 0; c < 32; ++c) {
    const double t = log_uniform(rng, 2.0 / grid.r_max(), 2.0);
    const double a = log_uniform(rng, 0.1, 20.0);
    auto u = bump(grid, t, a);
    const double v = phi_total(u, f);
    if (v < best_phi) {
      best_phi = v;
      best = std::move(u);
    }
  }
  return minimize_global(f, best, cfg);
}

SolveReport minimize_global(const Nonlinearity& f, const RadialFn& initial, const SolverConfig& cfg) {
  cfg.validate();
  const auto cls = classify_nonlinearity(f);
  if (cls.regime == Regime::superscaled)
    throw ClassificationError("minimize_global: superscaled nonlinearity (" + f.describe() +
                              ") has no global minimizer; use mountain_pass");
  const Grid& grid = initial.grid;
  SolveReport rep{RadialFn(grid), {}, std::nullopt, 0.0, {}, 0, false, false, {}, "lbfgs", {}, {}};
  if (cls.flagged)
    rep.warnings.push_back(std::string("nonlinearity classified ") + to_string(cls.regime) +
                           " (negative leading coefficient)");

  if (!f.has_positive_part()) {
    rep.method = "trivial";
    rep.trivial = true;
    rep.converged = true;
    rep.warnings.push_back("no positive term: the zero function is the global minimizer");
    finalize(rep, f, std::nullopt);
    return rep;
  }

  const Preconditioner prec(grid);
  RadialFn work(grid);
  Problem pb;
  pb.value = [&](const Vec& x) {
    work.values = x;
    return phi_total(work, f);
  };
  pb.gradient = [&](const Vec& x) {
    work.values = x;
    return free_grad_phi(work, f);
  };
  pb.done = [&](const Vec&, const Vec& g) { return detail::sup_norm(g) <= cfg.grad_tol; };

  Vec x0 = initial.values;
  pin(x0);
  const double start_sup = detail::sup_norm(x0);
  auto out = lbfgs(std::move(x0), pb, prec, cfg, rep.energy_history);
  RadialFn u(grid);
  u.values = std::move(out.x);
  rep.iters = out.iters;
  bool converged = out.exit == Exit::converged;

  if (out.exit == Exit::stagnated) {
    rep.method = "lbfgs+newton";
    auto nt = newton(u, f, cfg, prec, nullptr, newton_max_iters);
    rep.iters += nt.iters;
    rep.diagnostics["minres_iters"] = static_cast<double>(nt.minres_iters);
    // Polishing may not raise the energy noticeably above the descent result.
    const double before = phi_total(u, f);
    const double after = phi_total(nt.u, f);
    if (nt.converged && after <= before + 1e-10 * std::max(1.0, std::abs(before))) {
      u = std::move(nt.u);
      converged = true;
    }
  }

  rep.diagnostics["descent_end_sup"] = u.sup_norm();
  rep.diagnostics["initial_sup"] = start_sup;
  if (phi_total(u, f) >= 0.0) {
    // Phi(0) = 0 is not beaten: the minimizer is the zero function, an exact critical point.
    rep.trivial = true;
    rep.warnings.push_back("descent reached the zero function (final sup " + format_double(u.sup_norm()) + ")");
    rep.solution = RadialFn(grid);
    rep.converged = true;
    finalize(rep, f, std::nullopt);
    return rep;
  }

  rep.solution = u;
  rep.converged = converged;
  finalize(rep, f, std::nullopt);
  if (!converged)
    rep.warnings.push_back(out.exit == Exit::max_iters
                               ? "max_iters reached before the gradient tolerance"
                               : "stagnation: Armijo step below 1e-14 and Newton polish failed");
  return rep;
}

// ---------------------------------------------------------------------------

SolveReport mountain_pass(const Nonlinearity& f, const Grid& grid, const SolverConfig& cfg) {
  cfg.validate();
  const auto cls = classify_nonlinearity(f);
  if (cls.regime != Regime::superscaled)
    throw ClassificationError(std::string("mountain_pass: nonlinearity is ") + to_string(cls.regime) +
                              ", superscaled with positive leading coefficient required");
  const std::size_t n = grid.size();
  const std::size_t nodes = cfg.path_nodes;
  SolveReport rep{RadialFn(grid), {}, std::nullopt, 0.0, {}, 0, false, false, {}, "path_peak+newton", {}, {}};

  // (1) endpoint with negative energy along the scaling orbit of a bump
  const RadialFn base = random_bump(grid, cfg.seed);
  double t = 1.0;
  RadialFn e = base;
  while (phi_total(e, f) >= 0.0) {
    t *= 1.5;
    if (t > 1e3) throw GeometryError("mountain_pass: no negative-energy endpoint along the scaling orbit");
    e = scale_checked(base, t).fn;
    e.values.back() = 0.0;
  }
  rep.diagnostics["endpoint_scale"] = t;
  rep.diagnostics["endpoint_energy"] = phi_total(e, f);

  // (2) straight path 0 -> e
  std::vector<Vec> path(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    path[i] = e.values;
    const double s = static_cast<double>(i) / static_cast<double>(nodes - 1);
    for (double& x : path[i]) x *= s;
  }
  RadialFn work(grid);
  auto energy = [&](const Vec& x) {
    work.values = x;
    return phi_total(work, f);
  };
  auto path_max = [&] {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& p : path) m = std::max(m, energy(p));
    return m;
  };
  rep.diagnostics["path_max_initial"] = path_max();
  rep.diagnostics["sphere_level"] = [&] {
    work.values = path[1];
    return i_s(work);
  }();

  // (3) path-peak descent with Brent refinement of the maximum on the adjacent segments
  const Preconditioner prec(grid);
  const std::size_t path_iters = std::min<std::size_t>(cfg.max_iters, 300);
  Vec peak;
  double peak_val = -std::numeric_limits<double>::infinity();
  double best_seen = std::numeric_limits<double>::infinity();
  std::size_t no_progress = 0, it = 0;
  for (; it < path_iters; ++it) {
    std::vector<double> vals(nodes);
    for (std::size_t i = 0; i < nodes; ++i) vals[i] = energy(path[i]);
    const auto k = static_cast<std::size_t>(std::max_element(vals.begin(), vals.end()) - vals.begin());
    if (k == 0 || k + 1 == nodes || vals[k] <= 0.0)
      throw GeometryError("mountain_pass: path collapse (maximum at node " + std::to_string(k) + ")");

    peak = path[k];
    peak_val = vals[k];
    for (std::size_t seg = k - 1; seg <= k; ++seg) {
      const Vec& a = path[seg];
      const Vec& b = path[seg + 1];
      Vec x(n);
      auto neg = [&](double s) {
        for (std::size_t i = 0; i < n; ++i) x[i] = (1.0 - s) * a[i] + s * b[i];
        return -energy(x);
      };
      const auto [s_best, v_best] = boost::math::tools::brent_find_minima(neg, 0.0, 1.0, 20);
      if (-v_best > peak_val) {
        peak_val = -v_best;
        neg(s_best);
        peak = x;
      }
    }
    work.values = peak;
    Vec g = free_grad_phi(work, f);
    if (detail::sup_norm(g) <= 1e-3 * std::max(1.0, detail::sup_norm(peak))) break;
    if (peak_val < best_seen - 1e-10 * std::abs(best_seen)) {
      best_seen = peak_val;
      no_progress = 0;
    } else if (++no_progress >= 25) {
      break;
    }

    Vec d = prec.apply(g);
    for (double& v : d) v = -v;
    pin(d);
    const double slope = dot(g, d);
    double step = cfg.armijo.initial_step;
    Vec trial(n);
    for (;;) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = peak[i] + step * d[i];
      if (energy(trial) <= peak_val + cfg.armijo.sufficient_decrease * step * slope) break;
      step *= cfg.armijo.shrink;
      if (step < min_armijo_step) break;
    }
    path[k] = trial;

    // re-interpolate at equal Euclidean arclength, endpoints fixed
    std::vector<double> arc(nodes, 0.0);
    for (std::size_t i = 1; i < nodes; ++i) {
      double s2 = 0.0;
      for (std::size_t j = 0; j < n; ++j) s2 += (path[i][j] - path[i - 1][j]) * (path[i][j] - path[i - 1][j]);
      arc[i] = arc[i - 1] + std::sqrt(s2);
    }
    std::vector<Vec> fresh(nodes);
    fresh.front() = path.front();
    fresh.back() = path.back();
    for (std::size_t i = 1; i + 1 < nodes; ++i) {
      const double target = arc.back() * static_cast<double>(i) / static_cast<double>(nodes - 1);
      std::size_t j = static_cast<std::size_t>(std::upper_bound(arc.begin(), arc.end(), target) - arc.begin());
      j = std::clamp<std::size_t>(j, 1, nodes - 1) - 1;
      const double len = arc[j + 1] - arc[j];
      const double a = len > 0.0 ? (target - arc[j]) / len : 0.0;
      fresh[i].resize(n);
      for (std::size_t q = 0; q < n; ++q) fresh[i][q] = (1.0 - a) * path[j][q] + a * path[j + 1][q];
    }
    path.swap(fresh);
  }
  rep.diagnostics["path_iters"] = static_cast<double>(it);
  rep.diagnostics["path_peak"] = peak_val;

  // (4) Newton polish of the peak
  RadialFn u(grid);
  u.values = peak;
  auto nt = newton(u, f, cfg, prec, nullptr, newton_max_iters);
  rep.iters = it + nt.iters;
  rep.diagnostics["minres_iters"] = static_cast<double>(nt.minres_iters);
  rep.solution = nt.u;
  rep.converged = nt.converged;
  finalize(rep, f, std::nullopt);
  if (rep.solution.sup_norm() <= 1e-8 * detail::sup_norm(peak))
    throw GeometryError("mountain_pass: polish collapsed to the zero solution");

  // sampled lower sphere {I_s = rho^3}: any path from 0 to e crosses it, so its infimum
  // bounds the minimax level from below
  const double level = rep.diagnostics["sphere_level"];
  double sphere_inf = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  for (int c = 0; c < 64; ++c) {
    const double tt = log_uniform(rng, 0.25, 4.0);
    auto v = scalar_normalize(bump(grid, tt, 1.0), level).v;
    sphere_inf = std::min(sphere_inf, phi_total(v, f));
  }
  rep.diagnostics["sphere_inf_sampled"] = sphere_inf;
  if (!(sphere_inf > 0.0))
    rep.warnings.push_back("sampled sphere infimum " + format_double(sphere_inf) + " is not positive");
  if (rep.grad_sup_norm > cfg.grad_tol)
    rep.warnings.push_back("stagnation: Newton polish of the path peak did not reach the gradient tolerance");
  return rep;
}

// ---------------------------------------------------------------------------

DeflationResult deflated_search(const Nonlinearity& f, std::size_t k, const Grid& grid, const SolverConfig& cfg) {
  if (k == 0) throw ConfigError("deflated_search: k must be >= 1");
  cfg.validate();
  const auto cls = classify_nonlinearity(f);
  DeflationResult res;
  res.reports.push_back(cls.regime == Regime::superscaled ? mountain_pass(f, grid, cfg)
                                                          : minimize_global(f, grid, cfg));

  if (k > 1) {
    const RadialFn& first = res.reports.front().solution;
    const bool have = !res.reports.front().trivial && res.reports.front().converged;
    const double amp = have ? first.sup_norm() : 1.0;
    const double len = have ? half_width(first) : 1.0;

    Deflator defl(grid, cfg.deflation);
    std::vector<const RadialFn*> known;
    if (have) {
      defl.add(first.values);
      known.push_back(&first);
    }

    // Seed family: one-node and plain bumps around the first solution's scale, then random bumps.
    std::vector<RadialFn> seeds;
    auto shaped = [&](double a, double c, double w) {
      auto u = RadialFn::from(grid, [=](double r) {
        return a * (c > 0.0 ? 1.0 - (r * r) / (c * c) : 1.0) * std::exp(-0.5 * (r * r) / (w * w));
      });
      u.values.back() = 0.0;
      seeds.push_back(std::move(u));
    };
    for (double c : {1.0, 1.5, 0.7, 2.0}) shaped(amp, c * len, 0.8 * c * len);
    for (double w : {0.5, 2.0, 3.0}) shaped(amp, 0.0, w * len);
    for (double c : {1.0, 2.0}) shaped(2.0 * amp, c * len, 1.5 * c * len);
    std::mt19937_64 rng(cfg.seed + 1);
    for (int c = 0; c < 8; ++c) {
      const double w = log_uniform(rng, 0.3 * len, 3.0 * len);
      const double a = log_uniform(rng, 0.3 * amp, 3.0 * amp);
      const double z = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < 0.5 ? 0.0 : w * 1.2;
      shaped(a, z, w);
    }

    const Preconditioner prec(grid);
    for (const auto& s : seeds) {
      if (res.reports.size() >= k) break;
      auto nt = newton(s, f, cfg, prec, &defl, newton_max_iters);
      if (!nt.converged || nt.u.sup_norm() <= 1e-6 * amp) continue;
      bool distinct = nt.u.sup_norm() > 0.0;
      for (const auto* kf : known) distinct = distinct && sign_aware_distance(nt.u, *kf) >= min_solution_distance;
      if (!distinct) continue;

      SolveReport rep{nt.u, {}, std::nullopt, 0.0, {}, nt.iters, true, false, {}, "deflated_newton", {}, {}};
      finalize(rep, f, std::nullopt);
      if (!rep.converged) continue;
      rep.diagnostics["seed_index"] = static_cast<double>(&s - seeds.data());
      rep.diagnostics["minres_iters"] = static_cast<double>(nt.minres_iters);
      res.reports.push_back(std::move(rep));
      defl.add(res.reports.back().solution.values);
      known.clear();
      for (const auto& r : res.reports)
        if (!r.trivial) known.push_back(&r.solution);
    }
  }

  res.exhausted = res.reports.size() < k;
  const std::size_t m = res.reports.size();
  res.distances.assign(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      res.distances[i][j] = res.distances[j][i] =
          sign_aware_distance(res.reports[i].solution, res.reports[j].solution);
  return res;
}

} // namespace sps
