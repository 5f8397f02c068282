#include "parablab/fields.hpp"

#include <cmath>
#include <ostream>

#include <json.hpp>

#include "parablab/errors.hpp"

namespace parablab {

Grid1D::Grid1D(double x_lo, double x_hi, int n_cells, Topology topology)
    : x_lo_(x_lo), x_hi_(x_hi), n_cells_(n_cells), topology_(topology) {
  if (!(std::isfinite(x_lo) && std::isfinite(x_hi)) || !(x_lo < x_hi)) {
    throw DomainError("Grid1D: requires finite x_lo < x_hi");
  }
  if (n_cells < 4) throw DomainError("Grid1D: n_cells must be >= 4");
}

Eigen::VectorXd Grid1D::coordinates() const {
  Eigen::VectorXd x(node_count());
  for (int i = 0; i < node_count(); ++i) x[i] = coordinate(i);
  return x;
}

Grid1D Grid1D::refined(int factor) const {
  return Grid1D(x_lo_, x_hi_, n_cells_ * factor, topology_);
}

GridND::GridND(Grid1D axis) : GridND(std::vector<Grid1D>{axis}) {}

GridND::GridND(std::vector<Grid1D> axes) : axes_(std::move(axes)) {
  if (axes_.empty() || dim() > kMaxDim) throw DomainError("GridND: dimension must be 1..3");
  Eigen::Index s = 1;
  for (int a = 0; a < dim(); ++a) {
    stride_[a] = s;
    s *= axes_[a].node_count();
  }
  count_ = s;
}

GridND::MultiIndex GridND::multi_index(Eigen::Index flat) const noexcept {
  MultiIndex idx{0, 0, 0};
  for (int a = 0; a < dim(); ++a) {
    idx[a] = static_cast<int>(flat % axes_[a].node_count());
    flat /= axes_[a].node_count();
  }
  return idx;
}

Eigen::Index GridND::flat_index(const MultiIndex& idx) const noexcept {
  Eigen::Index flat = 0;
  for (int a = 0; a < dim(); ++a) flat += idx[a] * stride_[a];
  return flat;
}

Eigen::VectorXd GridND::coordinates(Eigen::Index flat) const {
  const auto idx = multi_index(flat);
  Eigen::VectorXd x(dim());
  for (int a = 0; a < dim(); ++a) x[a] = axes_[a].coordinate(idx[a]);
  return x;
}

Field::Field(GridND grid, Eigen::VectorXd values, double time)
    : grid_(std::move(grid)), values_(std::move(values)), time_(time) {
  if (values_.size() != grid_.node_count()) {
    throw GridMismatch("Field: value count does not match grid node count");
  }
  if (!values_.allFinite()) throw DomainError("Field: non-finite values");
  if (!(time_ >= 0.0) || !std::isfinite(time_)) throw DomainError("Field: time must be >= 0");
}

Field sample(const GridND& grid, const std::function<double(const Eigen::VectorXd&)>& f,
             double time) {
  Eigen::VectorXd v(grid.node_count());
  for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = f(grid.coordinates(k));
  return Field(grid, std::move(v), time);
}

Field sample1d(const Grid1D& grid, const std::function<double(double)>& f, double time) {
  Eigen::VectorXd v(grid.node_count());
  for (int i = 0; i < grid.node_count(); ++i) v[i] = f(grid.coordinate(i));
  return Field(GridND(grid), std::move(v), time);
}

namespace {

// Visits every grid line along `axis`, handing the callback the flat index of
// the line's first node.
template <typename F>
void for_each_line(const GridND& grid, int axis, F&& f) {
  const Eigen::Index n = grid.axis(axis).node_count();
  const Eigen::Index lines = grid.node_count() / n;
  const Eigen::Index s = grid.stride(axis);
  for (Eigen::Index l = 0; l < lines; ++l) {
    // split l into the part below and above `axis`
    const Eigen::Index lo = l % s;
    const Eigen::Index hi = l / s;
    f(lo + hi * s * n);
  }
}

void require_finite(const Eigen::VectorXd& v) {
  if (!v.allFinite()) throw DomainError("discrete calculus: non-finite values");
}

}  // namespace

Eigen::VectorXd derivative(const GridND& grid, const Eigen::VectorXd& u, int axis) {
  require_finite(u);
  const Grid1D& g = grid.axis(axis);
  const Eigen::Index n = g.node_count();
  const Eigen::Index s = grid.stride(axis);
  const double inv2h = 0.5 / g.spacing();
  Eigen::VectorXd du(u.size());
  for_each_line(grid, axis, [&](Eigen::Index base) {
    auto at = [&](Eigen::Index i) { return u[base + i * s]; };
    for (Eigen::Index i = 1; i + 1 < n; ++i) du[base + i * s] = (at(i + 1) - at(i - 1)) * inv2h;
    if (g.periodic()) {
      du[base] = (at(1) - at(n - 1)) * inv2h;
      du[base + (n - 1) * s] = (at(0) - at(n - 2)) * inv2h;
    } else {
      du[base] = (-3.0 * at(0) + 4.0 * at(1) - at(2)) * inv2h;
      du[base + (n - 1) * s] = (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) * inv2h;
    }
  });
  return du;
}

Eigen::VectorXd second_derivative(const GridND& grid, const Eigen::VectorXd& u, int axis) {
  require_finite(u);
  const Grid1D& g = grid.axis(axis);
  const Eigen::Index n = g.node_count();
  const Eigen::Index s = grid.stride(axis);
  const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
  Eigen::VectorXd d2u(u.size());
  for_each_line(grid, axis, [&](Eigen::Index base) {
    auto at = [&](Eigen::Index i) { return u[base + i * s]; };
    for (Eigen::Index i = 1; i + 1 < n; ++i) {
      d2u[base + i * s] = (at(i + 1) - 2.0 * at(i) + at(i - 1)) * inv_h2;
    }
    if (g.periodic()) {
      d2u[base] = (at(1) - 2.0 * at(0) + at(n - 1)) * inv_h2;
      d2u[base + (n - 1) * s] = (at(0) - 2.0 * at(n - 1) + at(n - 2)) * inv_h2;
    } else {
      d2u[base] = (2.0 * at(0) - 5.0 * at(1) + 4.0 * at(2) - at(3)) * inv_h2;
      d2u[base + (n - 1) * s] =
          (2.0 * at(n - 1) - 5.0 * at(n - 2) + 4.0 * at(n - 3) - at(n - 4)) * inv_h2;
    }
  });
  return d2u;
}

VectorField gradient(const Field& field) {
  const GridND& grid = field.grid();
  VectorField out{grid, field.time(), Eigen::MatrixXd(grid.dim(), grid.node_count())};
  for (int a = 0; a < grid.dim(); ++a) out.values.row(a) = derivative(grid, field.values(), a).transpose();
  return out;
}

MatrixField hessian(const Field& field) {
  const GridND& grid = field.grid();
  const int d = grid.dim();
  MatrixField out{grid, field.time(), Eigen::MatrixXd(d * d, grid.node_count())};
  std::vector<Eigen::VectorXd> first(d);
  for (int a = 0; a < d; ++a) first[a] = derivative(grid, field.values(), a);
  for (int a = 0; a < d; ++a) {
    out.values.row(a + d * a) = second_derivative(grid, field.values(), a).transpose();
    for (int b = a + 1; b < d; ++b) {
      const Eigen::VectorXd mixed = derivative(grid, first[b], a);
      out.values.row(a + d * b) = mixed.transpose();
      out.values.row(b + d * a) = mixed.transpose();
    }
  }
  return out;
}

double sup_norm_defect(const Field& a, const Field& b) {
  if (!(a.grid() == b.grid())) throw GridMismatch("sup_norm_defect: grids differ");
  if (a.time() != b.time()) throw GridMismatch("sup_norm_defect: times differ");
  return (a.values() - b.values()).maxCoeff();
}

double interpolate(const Field& field, double x) {
  if (field.grid().dim() != 1) throw GridMismatch("interpolate: 1-D fields only");
  const Grid1D& g = field.grid().axis(0);
  const Eigen::VectorXd& v = field.values();
  const int n = g.node_count();
  double s = (x - g.x_lo()) / g.spacing();
  if (g.periodic()) {
    s = std::fmod(s, static_cast<double>(n));
    if (s < 0) s += n;
    const int i = static_cast<int>(std::floor(s)) % n;
    const double w = s - std::floor(s);
    return (1.0 - w) * v[i] + w * v[(i + 1) % n];
  }
  if (s <= 0) return v[0];
  if (s >= n - 1) return v[n - 1];
  const int i = static_cast<int>(std::floor(s));
  const double w = s - i;
  return (1.0 - w) * v[i] + w * v[i + 1];
}

void write_csv(const Field& field, std::ostream& os) {
  const GridND& grid = field.grid();
  static constexpr const char* kNames[] = {"x", "y", "z"};
  for (int a = 0; a < grid.dim(); ++a) os << kNames[a] << ',';
  os << "value\n";
  const auto old_precision = os.precision(17);
  for (Eigen::Index k = 0; k < grid.node_count(); ++k) {
    const Eigen::VectorXd x = grid.coordinates(k);
    for (int a = 0; a < grid.dim(); ++a) os << x[a] << ',';
    os << field[k] << '\n';
  }
  os.precision(old_precision);
}

nlohmann::json to_json(const GridND& grid) {
  nlohmann::json axes = nlohmann::json::array();
  for (const Grid1D& g : grid.axes()) {
    axes.push_back({{"x_lo", g.x_lo()},
                    {"x_hi", g.x_hi()},
                    {"n_cells", g.n_cells()},
                    {"topology", g.periodic() ? "periodic" : "bounded"}});
  }
  return {{"axes", axes}};
}

nlohmann::json to_json(const Field& field) {
  return {{"grid", to_json(field.grid())},
          {"time", field.time()},
          {"values", std::vector<double>(field.values().begin(), field.values().end())}};
}

Field field_from_json(const nlohmann::json& j) {
  std::vector<Grid1D> axes;
  for (const auto& a : j.at("grid").at("axes")) {
    const std::string topo = a.at("topology").get<std::string>();
    axes.emplace_back(a.at("x_lo").get<double>(), a.at("x_hi").get<double>(),
                      a.at("n_cells").get<int>(),
                      topo == "periodic" ? Topology::periodic : Topology::bounded);
  }
  const auto vals = j.at("values").get<std::vector<double>>();
  return Field(GridND(std::move(axes)), Eigen::Map<const Eigen::VectorXd>(vals.data(), vals.size()),
               j.at("time").get<double>());
}

}  // namespace parablab
