#pragma once

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <iosfwd>
#include <vector>

#include <json.hpp>

namespace parablab {

enum class Topology { periodic, bounded };

/// Uniform grid on [x_lo, x_hi]. Periodic grids have n_cells nodes (x_hi is
/// identified with x_lo); bounded grids have n_cells + 1 nodes including both ends.
class Grid1D {
 public:
  Grid1D(double x_lo, double x_hi, int n_cells, Topology topology);

  double x_lo() const noexcept { return x_lo_; }
  double x_hi() const noexcept { return x_hi_; }
  int n_cells() const noexcept { return n_cells_; }
  Topology topology() const noexcept { return topology_; }
  bool periodic() const noexcept { return topology_ == Topology::periodic; }

  double spacing() const noexcept { return (x_hi_ - x_lo_) / n_cells_; }
  double length() const noexcept { return x_hi_ - x_lo_; }
  int node_count() const noexcept { return periodic() ? n_cells_ : n_cells_ + 1; }
  double coordinate(int i) const noexcept { return x_lo_ + i * spacing(); }
  Eigen::VectorXd coordinates() const;

  /// Grid with the same extent and topology and n_cells scaled by `factor`.
  Grid1D refined(int factor) const;

  friend bool operator==(const Grid1D&, const Grid1D&) = default;

 private:
  double x_lo_;
  double x_hi_;
  int n_cells_;
  Topology topology_;
};

/// Tensor-product grid of dimension 1..3. Node index is column-major:
/// flat = i0 + n0 * (i1 + n1 * i2).
class GridND {
 public:
  static constexpr int kMaxDim = 3;
  using MultiIndex = std::array<int, kMaxDim>;

  GridND(Grid1D axis);  // NOLINT(google-explicit-constructor): a 1-D grid is a GridND
  explicit GridND(std::vector<Grid1D> axes);

  int dim() const noexcept { return static_cast<int>(axes_.size()); }
  const Grid1D& axis(int a) const { return axes_.at(a); }
  const std::vector<Grid1D>& axes() const noexcept { return axes_; }
  Eigen::Index node_count() const noexcept { return count_; }
  Eigen::Index stride(int a) const noexcept { return stride_[a]; }

  MultiIndex multi_index(Eigen::Index flat) const noexcept;
  Eigen::Index flat_index(const MultiIndex& idx) const noexcept;
  Eigen::VectorXd coordinates(Eigen::Index flat) const;

  friend bool operator==(const GridND&, const GridND&) = default;

 private:
  std::vector<Grid1D> axes_;
  std::array<Eigen::Index, kMaxDim> stride_{};
  Eigen::Index count_ = 0;
};

/// Sampled scalar field at one time instant. Values are finite and match the grid.
class Field {
 public:
  Field(GridND grid, Eigen::VectorXd values, double time = 0.0);

  const GridND& grid() const noexcept { return grid_; }
  const Eigen::VectorXd& values() const noexcept { return values_; }
  double time() const noexcept { return time_; }
  double operator[](Eigen::Index i) const { return values_[i]; }

  Field with_values(Eigen::VectorXd values) const { return Field(grid_, std::move(values), time_); }
  Field with_time(double t) const { return Field(grid_, values_, t); }

 private:
  GridND grid_;
  Eigen::VectorXd values_;
  double time_;
};

/// Per-node vectors; column k holds the gradient at node k.
struct VectorField {
  GridND grid;
  double time;
  Eigen::MatrixXd values;  // dim x nodes
};

/// Per-node symmetric matrices stored column-major in a (dim*dim) x nodes block.
struct MatrixField {
  GridND grid;
  double time;
  Eigen::MatrixXd values;

  Eigen::MatrixXd at(Eigen::Index node) const {
    const int d = grid.dim();
    return Eigen::Map<const Eigen::MatrixXd>(values.col(node).data(), d, d);
  }
};

Field sample(const GridND& grid, const std::function<double(const Eigen::VectorXd&)>& f,
             double time = 0.0);
Field sample1d(const Grid1D& grid, const std::function<double(double)>& f, double time = 0.0);

/// First derivative along one axis: second-order central differences, periodic
/// wrap or second-order one-sided stencils at bounded edges.
Eigen::VectorXd derivative(const GridND& grid, const Eigen::VectorXd& values, int axis);
/// Second derivative along one axis (3-point interior, 4-point one-sided edges).
Eigen::VectorXd second_derivative(const GridND& grid, const Eigen::VectorXd& values, int axis);

VectorField gradient(const Field& field);
/// Pure second derivatives by 3-point stencils, mixed partials by nesting `derivative`.
MatrixField hessian(const Field& field);

/// Signed max over nodes of a - b. Used for one-sided comparison checks.
double sup_norm_defect(const Field& a, const Field& b);

/// Linear interpolation of a 1-D field (periodic wrap on periodic grids; bounded
/// grids clamp to the end values).
double interpolate(const Field& field, double x);

void write_csv(const Field& field, std::ostream& os);
nlohmann::json to_json(const Field& field);
Field field_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GridND& grid);

}  // namespace parablab
