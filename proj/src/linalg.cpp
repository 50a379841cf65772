#include "linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sps::detail {

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double sup_norm(const Vec& a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

void axpy(double a, const Vec& x, Vec& y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

double weighted_dot(const Grid& g, const Vec& a, const Vec& b) {
  const auto w = g.weights();
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += w[i] * a[i] * b[i];
  return s;
}

Preconditioner::Preconditioner(const Grid& g, double shift) {
  const std::size_t n = g.size();
  const auto k = g.stiffness();
  const auto w = g.weights();
  Vec diag(n, 0.0), upper(n, 0.0);
  lower_.assign(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    diag[i] += k[i];
    diag[i + 1] += k[i];
    upper[i] = -k[i];
    lower_[i + 1] = -k[i];
  }
  for (std::size_t i = 0; i < n; ++i) diag[i] += shift * w[i];
  diag[n - 1] = 1.0;
  lower_[n - 1] = 0.0;
  upper[n - 2] = 0.0;

  pivot_.assign(n, 0.0);
  c_prime_.assign(n, 0.0);
  pivot_[0] = diag[0];
  for (std::size_t i = 1; i < n; ++i) {
    c_prime_[i - 1] = upper[i - 1] / pivot_[i - 1];
    pivot_[i] = diag[i] - lower_[i] * c_prime_[i - 1];
  }
}

Vec Preconditioner::apply(const Vec& x) const {
  const std::size_t n = x.size();
  Vec y(n);
  y[0] = x[0] / pivot_[0];
  for (std::size_t i = 1; i < n; ++i) y[i] = (x[i] - lower_[i] * y[i - 1]) / pivot_[i];
  for (std::size_t i = n - 1; i-- > 0;) y[i] -= c_prime_[i] * y[i + 1];
  return y;
}

MinresResult minres(const LinearOp& a, const Vec& b, const LinearOp& m_inv, double rtol, std::size_t max_iters) {
  const std::size_t n = b.size();
  MinresResult res{Vec(n, 0.0), 0, 0.0};
  Vec r1 = b;
  Vec y = m_inv(r1);
  const double beta1 = std::sqrt(std::max(0.0, dot(r1, y)));
  if (beta1 == 0.0) return res;

  Vec r2 = r1, w(n, 0.0), w1(n, 0.0), w2(n, 0.0), v(n);
  double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1;
  double cs = -1.0, sn = 0.0;
  constexpr double tiny = std::numeric_limits<double>::epsilon();

  for (std::size_t it = 1; it <= max_iters; ++it) {
    const double s = 1.0 / beta;
    for (std::size_t i = 0; i < n; ++i) v[i] = s * y[i];
    y = a(v);
    if (it >= 2) axpy(-beta / oldb, r1, y);
    const double alfa = dot(v, y);
    axpy(-alfa / beta, r2, y);
    r1.swap(r2);
    r2 = y;
    y = m_inv(r2);
    oldb = beta;
    beta = std::sqrt(std::max(0.0, dot(r2, y)));
    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    const double gamma = std::max(std::hypot(gbar, beta), tiny);
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;

    w1.swap(w2);
    w2.swap(w);
    for (std::size_t i = 0; i < n; ++i) w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma;
    axpy(phi, w, res.x);

    res.iters = it;
    res.rel_residual = phibar / beta1;
    if (res.rel_residual <= rtol || beta == 0.0) break;
  }
  return res;
}

} // namespace sps::detail
