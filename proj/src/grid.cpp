#include "sps/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include <boost/math/special_functions/fpclassify.hpp>  // pchip.hpp uses unqualified isnan
#include <boost/math/interpolators/pchip.hpp>

#include "format.hpp"
#include "sps/error.hpp"

namespace sps {

using std::numbers::pi;

Grid Grid::make(std::size_t n, double r_max, double stretch) {
  if (n < 16) throw ConfigError("grid: n must be >= 16 (got " + std::to_string(n) + ")");
  if (!(r_max > 0.0) || !std::isfinite(r_max))
    throw ConfigError("grid: r_max must be a positive finite radius");
  if (!(stretch >= 1.0 && stretch <= 1.1))
    throw ConfigError("grid: stretch must lie in [1, 1.1]");

  auto d = std::make_shared<Data>();
  d->r_max = r_max;
  d->stretch = stretch;

  const std::size_t cells = n - 1;
  d->nodes.resize(n);
  d->nodes[0] = 0.0;
  if (stretch == 1.0) {
    const double h = r_max / static_cast<double>(cells);
    for (std::size_t i = 1; i < n; ++i) d->nodes[i] = h * static_cast<double>(i);
  } else {
    // h_i = h_0 s^i with sum h_i = r_max
    const double h0 = r_max * (stretch - 1.0) / (std::pow(stretch, static_cast<double>(cells)) - 1.0);
    double h = h0;
    for (std::size_t i = 1; i < n; ++i) {
      d->nodes[i] = d->nodes[i - 1] + h;
      h *= stretch;
    }
  }
  d->nodes[n - 1] = r_max;

  d->spacings.resize(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    d->spacings[i] = d->nodes[i + 1] - d->nodes[i];
    if (!(d->spacings[i] > 0.0))
      throw ConfigError("grid: nodes are not strictly increasing (stretch too large for n)");
  }

  d->weights.assign(n, 0.0);
  d->stiffness.resize(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    const double a = d->nodes[i];
    const double b = d->nodes[i + 1];
    const double h = b - a;
    // int_cell phi_a(r) r dr = h (2a + b) / 6, phi_b likewise
    d->weights[i] += 4.0 * pi * a * h * (2.0 * a + b) / 6.0;
    d->weights[i + 1] += 4.0 * pi * b * h * (a + 2.0 * b) / 6.0;
    // (b^3 - a^3) / 3 without cancellation
    const double cell_r2 = h * (a * a + a * b + b * b) / 3.0;
    d->stiffness[i] = 4.0 * pi * cell_r2 / (h * h);
  }
  return Grid(std::move(d));
}

bool operator==(const Grid& a, const Grid& b) {
  if (a.data_ == b.data_) return true;
  return a.data_->nodes == b.data_->nodes && a.data_->stretch == b.data_->stretch;
}

RadialFn::RadialFn(Grid g) : grid(std::move(g)), values(grid.size(), 0.0) {}

RadialFn::RadialFn(Grid g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
  if (values.size() != grid.size())
    throw ShapeError("RadialFn: " + std::to_string(values.size()) + " samples for a grid of " +
                     std::to_string(grid.size()) + " nodes");
  for (double x : values)
    if (!std::isfinite(x)) throw DomainError("RadialFn: non-finite sample");
}

double RadialFn::sup_norm() const noexcept {
  double m = 0.0;
  for (double x : values) m = std::max(m, std::abs(x));
  return m;
}

bool RadialFn::is_zero() const noexcept {
  return std::all_of(values.begin(), values.end(), [](double x) { return x == 0.0; });
}

RadialFn& RadialFn::operator*=(double s) {
  for (double& x : values) x *= s;
  return *this;
}

RadialFn& RadialFn::operator+=(const RadialFn& o) {
  detail::require_same_grid(*this, o);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
  return *this;
}

RadialFn& RadialFn::operator-=(const RadialFn& o) {
  detail::require_same_grid(*this, o);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
  return *this;
}

void detail::require_same_grid(const RadialFn& a, const RadialFn& b) {
  if (!(a.grid == b.grid)) throw ShapeError("radial functions live on different grids");
}

double integrate(const Grid& grid, std::span<const double> samples) {
  if (samples.size() != grid.size())
    throw ShapeError("integrate: " + std::to_string(samples.size()) + " samples for a grid of " +
                     std::to_string(grid.size()) + " nodes");
  const auto w = grid.weights();
  double s = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) s += w[i] * samples[i];
  return s;
}

RadialFn differentiate(const RadialFn& u) {
  const auto r = u.grid.nodes();
  const std::size_t n = r.size();
  const auto& v = u.values;
  std::vector<double> d(n);

  // Derivative at x0 of the quadratic through (x0,y0), (x1,y1), (x2,y2).
  auto lagrange_d = [](double x0, double x1, double x2, double y0, double y1, double y2) {
    const double d01 = x0 - x1, d02 = x0 - x2, d12 = x1 - x2;
    return y0 * (2.0 * x0 - x1 - x2) / (d01 * d02) + y1 * (x0 - x2) / (-d01 * d12) +
           y2 * (x0 - x1) / (d02 * d12);
  };

  d[0] = lagrange_d(r[0], r[1], r[2], v[0], v[1], v[2]);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double hl = r[i] - r[i - 1];
    const double hr = r[i + 1] - r[i];
    d[i] = (-hr / (hl * (hl + hr))) * v[i - 1] + ((hr - hl) / (hl * hr)) * v[i] +
           (hl / (hr * (hl + hr))) * v[i + 1];
  }
  d[n - 1] = lagrange_d(r[n - 1], r[n - 2], r[n - 3], v[n - 1], v[n - 2], v[n - 3]);
  return RadialFn(u.grid, std::move(d));
}

RadialFn resample(const RadialFn& u, double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("resample: scale t must be > 0");
  if (t == 1.0) return u;

  const auto r = u.grid.nodes();
  const std::size_t n = r.size();
  const double r_max = u.grid.r_max();

  std::vector<double> x(r.begin(), r.end());
  std::vector<double> y = u.values;
  // smooth radial profiles are even in r, so u'(0) = 0
  boost::math::interpolators::pchip<std::vector<double>> interp(std::move(x), std::move(y), 0.0);

  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = t * r[i];
    if (s > r_max) break;
    out[i] = interp(s);
  }
  return RadialFn(u.grid, std::move(out));
}

double l2_dot(const RadialFn& a, const RadialFn& b) {
  detail::require_same_grid(a, b);
  const auto w = a.grid.weights();
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += w[i] * a.values[i] * b.values[i];
  return s;
}

double l2_norm(const RadialFn& a) { return std::sqrt(l2_dot(a, a)); }

void write_csv(std::ostream& os, const RadialFn& u) {
  os << "r,u\n";
  const auto r = u.grid.nodes();
  for (std::size_t i = 0; i < u.size(); ++i)
    os << detail::format_double(r[i]) << ',' << detail::format_double(u.values[i]) << '\n';
}

void write_csv(const std::filesystem::path& path, const RadialFn& u) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  write_csv(os, u);
}

RadialFn read_csv(std::istream& is, const Grid& grid) {
  std::string line;
  if (!std::getline(is, line)) throw ShapeError("read_csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "r,u") throw ShapeError("read_csv: expected header 'r,u'");
  std::vector<double> vals;
  vals.reserve(grid.size());
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ShapeError("read_csv: malformed row '" + line + "'");
    const double r = detail::parse_double(std::string_view(line).substr(0, comma));
    const double v = detail::parse_double(std::string_view(line).substr(comma + 1));
    if (vals.size() >= grid.size() || r != grid.node(vals.size()))
      throw ShapeError("read_csv: node column does not match the grid");
    vals.push_back(v);
  }
  return RadialFn(grid, std::move(vals));
}

RadialFn read_csv(const std::filesystem::path& path, const Grid& grid) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  return read_csv(is, grid);
}

} // namespace sps
