#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "sps/grid.hpp"

namespace sps::detail {

using Vec = std::vector<double>;
using LinearOp = std::function<Vec(const Vec&)>;

double dot(const Vec& a, const Vec& b);
double sup_norm(const Vec& a);
/// y += a x
void axpy(double a, const Vec& x, Vec& y);

/// sum_i w_i a_i b_i, the discrete L2 product.
double weighted_dot(const Grid& g, const Vec& a, const Vec& b);

/// Solves (K + shift diag(w)) y = x on the free nodes; the last node is pinned (identity row).
class Preconditioner {
public:
  explicit Preconditioner(const Grid& g, double shift = 1.0);
  Vec apply(const Vec& x) const;

private:
  // Thomas factorization: c_prime and the pivots of the eliminated system.
  Vec lower_, pivot_, c_prime_;
};

struct MinresResult {
  Vec x;
  std::size_t iters{};
  /// Preconditioned residual norm relative to the right-hand side.
  double rel_residual{};
};

/// Preconditioned MINRES for symmetric (possibly indefinite) A with SPD preconditioner M^{-1}.
MinresResult minres(const LinearOp& a, const Vec& b, const LinearOp& m_inv, double rtol, std::size_t max_iters);

} // namespace sps::detail
