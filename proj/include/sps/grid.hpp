#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

namespace sps {

/// Radial discretization of integrals over R^3 for radially symmetric functions.
///
/// Nodes run from r_0 = 0 to r_{n-1} = r_max. The quadrature weights satisfy
/// sum_i w_i g(r_i) ~ 4 pi int_0^{r_max} g(r) r^2 dr and are obtained by writing
/// r^2 g = r * (r g), interpolating r g linearly on each cell and integrating the
/// remaining factor r exactly. On uniform grids the interior weights coincide with
/// the composite trapezoid rule; the rule is exact for g = const on any node
/// distribution, exact for g = 1/r outside the first cell, and w_0 = 0.
///
/// Grid is a cheap handle: copies share the same immutable node data.
class Grid {
public:
  /// Builds a grid of n nodes on [0, r_max]. stretch = 1 gives uniform spacing,
  /// stretch > 1 geometric spacing h_{i+1} = stretch * h_i (fine near the origin).
  /// Requires n >= 16, r_max > 0 and stretch in [1, 1.1]; throws ConfigError otherwise.
  static Grid make(std::size_t n, double r_max, double stretch = 1.0);

  std::size_t size() const noexcept { return data_->nodes.size(); }
  double r_max() const noexcept { return data_->r_max; }
  double stretch() const noexcept { return data_->stretch; }

  std::span<const double> nodes() const noexcept { return data_->nodes; }
  std::span<const double> weights() const noexcept { return data_->weights; }
  /// h_i = r_{i+1} - r_i, size n - 1.
  std::span<const double> spacings() const noexcept { return data_->spacings; }
  /// Coefficients k_i of the P1 stiffness form: sum_i k_i (u_{i+1} - u_i)^2 = int |grad u|^2 dx
  /// for the piecewise-linear interpolant of u. Size n - 1.
  std::span<const double> stiffness() const noexcept { return data_->stiffness; }

  double node(std::size_t i) const { return data_->nodes[i]; }
  double weight(std::size_t i) const { return data_->weights[i]; }

  bool same_as(const Grid& other) const noexcept { return data_ == other.data_; }
  friend bool operator==(const Grid& a, const Grid& b);

private:
  struct Data {
    double r_max{};
    double stretch{};
    std::vector<double> nodes;
    std::vector<double> weights;
    std::vector<double> spacings;
    std::vector<double> stiffness;
  };
  explicit Grid(std::shared_ptr<const Data> d) : data_(std::move(d)) {}
  std::shared_ptr<const Data> data_;
};

/// Sampled radial function u(r_i) on a grid, extended by zero beyond r_max.
struct RadialFn {
  Grid grid;
  std::vector<double> values;

  /// Zero function on the grid.
  explicit RadialFn(Grid g);
  /// Throws ShapeError on length mismatch and DomainError on non-finite samples.
  RadialFn(Grid g, std::vector<double> v);

  template <class F>
  static RadialFn from(Grid g, F&& fn) {
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(g.node(i));
    return RadialFn(std::move(g), std::move(v));
  }

  std::size_t size() const noexcept { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }

  double sup_norm() const noexcept;
  bool is_zero() const noexcept;

  RadialFn& operator*=(double s);
  RadialFn& operator+=(const RadialFn& o);
  RadialFn& operator-=(const RadialFn& o);
  friend RadialFn operator*(double s, RadialFn u) { return u *= s; }
  friend RadialFn operator+(RadialFn a, const RadialFn& b) { return a += b; }
  friend RadialFn operator-(RadialFn a, const RadialFn& b) { return a -= b; }
  RadialFn operator-() const { return -1.0 * *this; }
};

/// Same as Grid::make.
inline Grid make_grid(std::size_t n, double r_max, double stretch = 1.0) {
  return Grid::make(n, r_max, stretch);
}

/// sum_i w_i samples_i. Throws ShapeError on length mismatch.
double integrate(const Grid& grid, std::span<const double> samples);

/// Second-order finite-difference u'(r_i); one-sided three-point stencils at both ends.
/// Exact for quadratics on any node distribution.
RadialFn differentiate(const RadialFn& u);

/// Values u(t r_i) by monotone (shape-preserving) cubic interpolation, 0 where t r_i > r_max.
/// The interpolant takes u'(0) = 0, as every smooth radial profile does; a cusp at the
/// origin is flattened inside the first cell.
/// Throws DomainError for t <= 0.
RadialFn resample(const RadialFn& u, double t);

/// Weighted L2 inner product and norm over R^3.
double l2_dot(const RadialFn& a, const RadialFn& b);
double l2_norm(const RadialFn& a);

/// CSV with header "r,u", one row per node, shortest round-trip float formatting.
void write_csv(std::ostream& os, const RadialFn& u);
void write_csv(const std::filesystem::path& path, const RadialFn& u);
/// Reads a profile written by write_csv. The node column must match grid nodes exactly.
RadialFn read_csv(std::istream& is, const Grid& grid);
RadialFn read_csv(const std::filesystem::path& path, const Grid& grid);

namespace detail {
void require_same_grid(const RadialFn& a, const RadialFn& b);
}

} // namespace sps
