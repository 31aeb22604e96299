// SPDX-License-Identifier: Apache-2.0
#include "canndyn/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "canndyn/error.hpp"

namespace canndyn {

double Grid::min_width() const {
  double m = width(0);
  for (std::size_t i = 1; i < cells(); ++i) m = std::min(m, width(i));
  return m;
}

GridPtr Grid::from_nodes(std::vector<double> nodes, Spacing spacing) {
  if (nodes.size() < 3) throw DomainError("a grid needs at least 3 nodes");
  if (nodes.front() != 0.0) throw DomainError("grid must start at s = 0");
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (!(nodes[i] > nodes[i - 1]) || !std::isfinite(nodes[i])) throw DomainError("grid nodes must be strictly ascending");
  }
  auto g = std::make_shared<Grid>();
  g->spacing_ = spacing;
  g->weights_.assign(nodes.size(), 0.0);
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const double h = nodes[i + 1] - nodes[i];
    g->weights_[i] += 0.5 * h;
    g->weights_[i + 1] += 0.5 * h;
  }
  g->nodes_ = std::move(nodes);
  return g;
}

GridPtr build_grid(double s_max, std::size_t n_cells, Spacing spacing, std::optional<double> ratio) {
  if (!(s_max > 0.0) || !std::isfinite(s_max)) throw DomainError("build_grid requires s_max > 0");
  if (n_cells < 2) throw DomainError("build_grid requires at least 2 cells");

  std::vector<double> nodes(n_cells + 1);
  if (spacing == Spacing::uniform) {
    for (std::size_t i = 0; i <= n_cells; ++i) {
      nodes[i] = s_max * static_cast<double>(i) / static_cast<double>(n_cells);
    }
  } else {
    const double r = ratio.value_or(0.0);
    if (!(r > 0.0) || r == 1.0 || !std::isfinite(r)) throw DomainError("graded grid requires ratio > 0 and != 1");
    // h_i = h_0 r^i with sum h_i = s_max
    const double h0 = s_max * (r - 1.0) / (std::pow(r, static_cast<double>(n_cells)) - 1.0);
    double h = h0;
    nodes[0] = 0.0;
    for (std::size_t i = 1; i <= n_cells; ++i) {
      nodes[i] = nodes[i - 1] + h;
      h *= r;
    }
  }
  nodes.back() = s_max;
  return Grid::from_nodes(std::move(nodes), spacing);
}

GridFunction::GridFunction(GridPtr grid) : grid_(std::move(grid)), values_(grid_->size(), 0.0) {}

GridFunction::GridFunction(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_->size()) throw DomainError("GridFunction length does not match grid");
}

GridFunction GridFunction::sample(GridPtr grid, const std::function<double(double)>& f) {
  GridFunction out(std::move(grid));
  for (std::size_t i = 0; i < out.size(); ++i) out.values_[i] = f(out.grid().node(i));
  return out;
}

bool GridFunction::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double GridFunction::min() const { return *std::min_element(values_.begin(), values_.end()); }
double GridFunction::max() const { return *std::max_element(values_.begin(), values_.end()); }

double GridFunction::sup_norm() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double integrate(const GridFunction& f) {
  const auto w = f.grid().weights();
  const auto v = f.values();
  return std::inner_product(w.begin(), w.end(), v.begin(), 0.0);
}

double l1_norm(const GridFunction& f) {
  const auto w = f.grid().weights();
  const auto v = f.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) sum += w[i] * std::abs(v[i]);
  return sum;
}

GridFunction cumulative_integral(const GridFunction& f) {
  GridFunction g(f.grid_ptr());
  const auto& grid = f.grid();
  for (std::size_t i = 1; i < f.size(); ++i) {
    g[i] = g[i - 1] + 0.5 * grid.width(i - 1) * (f[i - 1] + f[i]);
  }
  return g;
}

GridFunction grid_derivative(const GridFunction& f) {
  const auto& grid = f.grid();
  const std::size_t n = f.size();
  GridFunction d(f.grid_ptr());

  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double hl = grid.width(i - 1);
    const double hr = grid.width(i);
    d[i] = -hr / (hl * (hl + hr)) * f[i - 1] + (hr - hl) / (hl * hr) * f[i] + hl / (hr * (hl + hr)) * f[i + 1];
  }
  {
    const double h1 = grid.width(0);
    const double h2 = grid.width(1);
    d[0] = -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * f[0] + (h1 + h2) / (h1 * h2) * f[1] - h1 / (h2 * (h1 + h2)) * f[2];
  }
  {
    const double h1 = grid.width(n - 2);  // s_{n-1} - s_{n-2}
    const double h2 = grid.width(n - 3);  // s_{n-2} - s_{n-3}
    d[n - 1] = (2.0 * h1 + h2) / (h1 * (h1 + h2)) * f[n - 1] - (h1 + h2) / (h1 * h2) * f[n - 2] +
               h1 / (h2 * (h1 + h2)) * f[n - 3];
  }
  return d;
}

GridFunction interpolate(GridPtr grid, std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.empty()) throw DomainError("interpolate requires matching, non-empty samples");
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] > xs[i - 1])) throw DomainError("interpolation abscissae must be strictly ascending");
  }
  GridFunction out(std::move(grid));
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double s = out.grid().node(i);
    if (s <= xs.front()) {
      out[i] = ys.front();
    } else if (s >= xs.back()) {
      out[i] = ys.back();
    } else {
      const auto it = std::upper_bound(xs.begin(), xs.end(), s);
      const auto k = static_cast<std::size_t>(it - xs.begin());
      const double t = (s - xs[k - 1]) / (xs[k] - xs[k - 1]);
      out[i] = (1.0 - t) * ys[k - 1] + t * ys[k];
    }
  }
  return out;
}

}  // namespace canndyn
