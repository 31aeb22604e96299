// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace canndyn {

enum class Spacing { uniform, graded };

/// Nodes 0 = s_0 < ... < s_N = s_max with composite trapezoid weights.
class Grid {
 public:
  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> weights() const { return weights_; }
  std::size_t size() const { return nodes_.size(); }
  std::size_t cells() const { return nodes_.size() - 1; }
  double s_max() const { return nodes_.back(); }
  double node(std::size_t i) const { return nodes_[i]; }
  /// Width of cell i, i.e. s_{i+1} - s_i.
  double width(std::size_t i) const { return nodes_[i + 1] - nodes_[i]; }
  double min_width() const;
  Spacing spacing() const { return spacing_; }

  /// Builds a grid from explicit ascending nodes starting at 0.
  static std::shared_ptr<const Grid> from_nodes(std::vector<double> nodes, Spacing spacing = Spacing::uniform);

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
  Spacing spacing_ = Spacing::uniform;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Uniform grid, or geometric grading whose cell widths grow by `ratio`
/// (ratio > 1 concentrates nodes near 0). Throws DomainError for s_max <= 0,
/// n_cells < 2, or a graded ratio <= 0 or == 1.
GridPtr build_grid(double s_max, std::size_t n_cells, Spacing spacing = Spacing::uniform,
                   std::optional<double> ratio = std::nullopt);

/// Values sampled at the nodes of a grid.
class GridFunction {
 public:
  /// Empty function with no grid; only useful as a placeholder.
  GridFunction() = default;
  explicit GridFunction(GridPtr grid);
  GridFunction(GridPtr grid, std::vector<double> values);

  /// Samples f at every node.
  static GridFunction sample(GridPtr grid, const std::function<double(double)>& f);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::vector<double>& mutable_values() { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  bool all_finite() const;
  double min() const;
  double max() const;
  double sup_norm() const;

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

/// Composite trapezoid rule, sum_i w_i f_i.
double integrate(const GridFunction& f);
/// Trapezoid rule applied to |f|.
double l1_norm(const GridFunction& f);
/// g(s_0) = 0, g(s_i) = g(s_{i-1}) + (s_i - s_{i-1}) (f_{i-1} + f_i) / 2.
GridFunction cumulative_integral(const GridFunction& f);
/// Three-point derivative: central (non-uniform Lagrange) at interior nodes,
/// one-sided second order at both ends. Exact for quadratics.
GridFunction grid_derivative(const GridFunction& f);
/// Piecewise linear interpolation of (xs, ys) onto the grid; values outside
/// [xs.front(), xs.back()] are clamped to the end values.
GridFunction interpolate(GridPtr grid, std::span<const double> xs, std::span<const double> ys);

}  // namespace canndyn
