#include "sps/hartree.hpp"

#include <numbers>

#include "sps/error.hpp"

namespace sps {

using std::numbers::pi;

double detail::self_cell(const Grid& grid, std::size_t i) {
  const auto h = grid.spacings();
  const std::size_t n = grid.size();
  if (i == 0) return -h[0] * h[0] / 12.0; // outer sum only; w_0 = 0 keeps it out of D
  if (i + 1 >= n) return 0.0;
  return h[i - 1] * h[i] / 12.0;
}

std::vector<double> detail::density_potential(const Grid& grid, std::span<const double> density) {
  const std::size_t n = grid.size();
  if (density.size() != n) throw ShapeError("density_potential: length mismatch");
  const auto r = grid.nodes();
  const auto w = grid.weights();

  std::vector<double> v(n, 0.0);
  // outer tail: sum_{j > i} w_j rho_j / r_j
  double tail = 0.0;
  for (std::size_t i = n; i-- > 1;) {
    v[i] = tail;
    tail += w[i] * density[i] / r[i];
  }
  v[0] = tail;
  double inner = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    inner += w[i] * density[i];
    v[i] += inner / r[i];
  }
  for (std::size_t i = 0; i < n; ++i) v[i] = v[i] / (4.0 * pi) - self_cell(grid, i) * density[i];
  return v;
}

RadialFn newton_potential(const RadialFn& u) {
  std::vector<double> rho(u.size());
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = u.values[i] * u.values[i];
  return RadialFn(u.grid, detail::density_potential(u.grid, rho));
}

double coulomb_energy(const RadialFn& u) {
  const auto v = newton_potential(u);
  const auto w = u.grid.weights();
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += w[i] * u.values[i] * u.values[i] * v.values[i];
  return 4.0 * pi * s;
}

} // namespace sps
