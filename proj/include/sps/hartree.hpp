#pragma once

#include <span>
#include <vector>

#include "sps/grid.hpp"

namespace sps {

/// Newton potential V = (1/(4 pi |x|)) * u^2 of a radial density, by Newton's theorem:
///   V(r) = (1/r) int_0^r u^2 s^2 ds + int_r^{r_max} u^2 s ds.
///
/// Both partial integrals are cumulative sums sharing the grid weights, so that
///   V_i = sum_j (w_j / 4 pi) u_j^2 / max(r_i, r_j) - c_i u_i^2.
/// The self-cell term c_i = h_{i-1} h_i / 12 is the combined Euler-Maclaurin endpoint
/// correction of the two cumulative sums; it lifts the potential (and the Coulomb energy)
/// from second to fourth order on uniform grids without breaking the symmetry of the kernel.
RadialFn newton_potential(const RadialFn& u);

/// D(u) = int int u^2(x) u^2(y) / |x - y| dx dy = 4 pi int u^2 V dx. Nonnegative.
double coulomb_energy(const RadialFn& u);

namespace detail {
/// Potential of an arbitrary (signed) density sampled on the grid; O(n).
std::vector<double> density_potential(const Grid& grid, std::span<const double> density);
/// Diagonal self-cell coefficient c_i of the discrete kernel (see newton_potential).
double self_cell(const Grid& grid, std::size_t i);
} // namespace detail

} // namespace sps
