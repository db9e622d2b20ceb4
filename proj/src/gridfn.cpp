#include "opinc/gridfn.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace opinc {

Grid Grid::interval(double t0, double T, int nodes) {
  require(nodes >= 2, "Grid: at least 2 nodes per axis");
  require(T > t0, "Grid: upper must exceed lower");
  Grid g;
  g.kind_ = Kind::Interval;
  g.lower_ = {t0};
  g.upper_ = {T};
  g.nodes_ = {nodes};
  g.h_ = {(T - t0) / (nodes - 1)};
  g.total_nodes_ = nodes;
  return g;
}

Grid Grid::box(const std::vector<double>& lower, const std::vector<double>& upper,
               const std::vector<int>& nodes_per_axis) {
  require(!lower.empty() && lower.size() == upper.size() && lower.size() == nodes_per_axis.size(),
          "Grid: inconsistent box specification");
  Grid g;
  g.kind_ = Kind::Box;
  g.lower_ = lower;
  g.upper_ = upper;
  g.nodes_ = nodes_per_axis;
  g.total_nodes_ = 1;
  for (std::size_t a = 0; a < lower.size(); ++a) {
    require(nodes_per_axis[a] >= 2, "Grid: at least 2 nodes per axis");
    require(upper[a] > lower[a], "Grid: upper must exceed lower componentwise");
    g.h_.push_back((upper[a] - lower[a]) / (nodes_per_axis[a] - 1));
    g.total_nodes_ *= nodes_per_axis[a];
  }
  return g;
}

double Grid::max_spacing() const {
  double h = 0.0;
  for (double v : h_) h = std::max(h, v);
  return h;
}

Vec Grid::coord(int k) const {
  Vec c(axes());
  int rem = k;
  for (int a = axes() - 1; a >= 0; --a) {
    int idx = rem % nodes_[a];
    rem /= nodes_[a];
    c[a] = lower_[a] + idx * h_[a];
  }
  return c;
}

double Grid::weight(int k) const {
  double w = 1.0;
  int rem = k;
  for (int a = axes() - 1; a >= 0; --a) {
    int idx = rem % nodes_[a];
    rem /= nodes_[a];
    double wa = (idx == 0 || idx == nodes_[a] - 1) ? 0.5 * h_[a] : h_[a];
    w *= wa;
  }
  return w;
}

double Grid::volume() const {
  double v = 1.0;
  for (int a = 0; a < axes(); ++a) v *= upper_[a] - lower_[a];
  return v;
}

bool Grid::same_as(const Grid& other) const {
  return kind_ == other.kind_ && lower_ == other.lower_ && upper_ == other.upper_ &&
         nodes_ == other.nodes_;
}

GridFunction::GridFunction(Grid grid, int codim) : grid_(std::move(grid)) {
  require(codim >= 1, "GridFunction: codim must be positive");
  values_ = Mat::Zero(grid_.node_count(), codim);
}

GridFunction::GridFunction(Grid grid, Mat values) : grid_(std::move(grid)), values_(std::move(values)) {
  require(static_cast<int>(values_.rows()) == grid_.node_count(),
          "GridFunction: value count must equal node count");
  require(values_.allFinite(), "GridFunction: non-finite entries");
}

GridFunction GridFunction::constant(const Grid& g, const Vec& value) {
  GridFunction f(g, static_cast<int>(value.size()));
  f.values_.rowwise() = value.transpose();
  return f;
}

GridFunction GridFunction::constant(const Grid& g, double value) {
  return constant(g, Vec::Constant(1, value));
}

GridFunction GridFunction::sample(const Grid& g, int codim,
                                  const std::function<Vec(const Vec&)>& fn) {
  GridFunction f(g, codim);
  for (int k = 0; k < g.node_count(); ++k) {
    Vec v = fn(g.coord(k));
    require(static_cast<int>(v.size()) == codim, "GridFunction::sample: codim mismatch");
    f.values_.row(k) = v.transpose();
  }
  return f;
}

GridFunction GridFunction::sample_scalar(const Grid& g, const std::function<double(double)>& fn) {
  require(g.kind() == Grid::Kind::Interval, "sample_scalar: interval grids only");
  GridFunction f(g, 1);
  for (int k = 0; k < g.node_count(); ++k) f.values_(k, 0) = fn(g.coord(k)[0]);
  return f;
}

double GridFunction::scalar_at(int k) const {
  require(codim() == 1, "scalar_at: scalar GridFunction expected");
  return values_(k, 0);
}

GridFunction GridFunction::magnitude() const {
  GridFunction m(grid_, 1);
  m.values_.col(0) = values_.rowwise().norm();
  return m;
}

double GridFunction::sup_norm() const {
  return values_.rowwise().norm().maxCoeff();
}

Vec GridFunction::interp(const Vec& t) const {
  const Grid& g = grid_;
  require(static_cast<int>(t.size()) == g.axes(), "interp: coordinate dimension mismatch");
  // Per-axis cell index and barycentric fraction, clamped to the domain.
  std::vector<int> i0(g.axes());
  std::vector<double> frac(g.axes());
  for (int a = 0; a < g.axes(); ++a) {
    double s = (t[a] - g.lower(a)) / g.spacing(a);
    s = std::min(std::max(s, 0.0), static_cast<double>(g.nodes_on_axis(a) - 1));
    int i = std::min(static_cast<int>(s), g.nodes_on_axis(a) - 2);
    i0[a] = i;
    frac[a] = s - i;
  }
  Vec acc = Vec::Zero(codim());
  const int corners = 1 << g.axes();
  for (int c = 0; c < corners; ++c) {
    double w = 1.0;
    int k = 0;
    for (int a = 0; a < g.axes(); ++a) {
      int bit = (c >> a) & 1;
      w *= bit ? frac[a] : 1.0 - frac[a];
      k = k * g.nodes_on_axis(a) + (i0[a] + bit);
    }
    if (w != 0.0) acc += w * values_.row(k).transpose();
  }
  return acc;
}

GridFunction& GridFunction::operator+=(const GridFunction& o) {
  require(grid_.same_as(o.grid_) && values_.cols() == o.values_.cols(), "GridFunction: mismatch");
  values_ += o.values_;
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& o) {
  require(grid_.same_as(o.grid_) && values_.cols() == o.values_.cols(), "GridFunction: mismatch");
  values_ -= o.values_;
  return *this;
}

GridFunction& GridFunction::operator*=(double a) {
  values_ *= a;
  return *this;
}

void GridFunction::to_csv(std::ostream& os) const {
  os << std::setprecision(17);
  for (int k = 0; k < nodes(); ++k) {
    Vec c = grid_.coord(k);
    for (int a = 0; a < c.size(); ++a) os << c[a] << ',';
    for (int j = 0; j < codim(); ++j) {
      os << values_(k, j);
      os << (j + 1 < codim() ? ',' : '\n');
    }
  }
}

GridFunction from_csv_impl(std::istream& is, const Grid& grid) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  require(static_cast<int>(rows.size()) == grid.node_count(), "from_csv: row count mismatch");
  int codim = static_cast<int>(rows.front().size()) - grid.axes();
  require(codim >= 1, "from_csv: missing value columns");
  Mat vals(grid.node_count(), codim);
  for (int k = 0; k < grid.node_count(); ++k)
    for (int j = 0; j < codim; ++j) vals(k, j) = rows[k][grid.axes() + j];
  return GridFunction(grid, std::move(vals));
}

GridFunction GridFunction::from_csv(std::istream& is, const Grid& grid) {
  return from_csv_impl(is, grid);
}

double lp_norm(const GridFunction& f, double p) {
  require(p >= 1.0, "lp_norm: p must be >= 1 (or infinity)");
  if (std::isinf(p)) return f.sup_norm();
  const Grid& g = f.grid();
  double acc = 0.0;
  for (int k = 0; k < g.node_count(); ++k)
    acc += g.weight(k) * std::pow(f.at(k).norm(), p);
  return std::pow(acc, 1.0 / p);
}

double integral(const GridFunction& f) {
  require(f.codim() == 1, "integral: scalar GridFunction expected");
  const Grid& g = f.grid();
  double acc = 0.0;
  for (int k = 0; k < g.node_count(); ++k) acc += g.weight(k) * f.scalar_at(k);
  return acc;
}

GridFunction cumulative_integral(const GridFunction& f) {
  require(f.grid().kind() == Grid::Kind::Interval,
          "cumulative_integral: unsupported on box grids");
  const double h = f.grid().spacing();
  GridFunction out(f.grid(), f.codim());
  Vec acc = Vec::Zero(f.codim());
  out.set(0, acc);
  for (int k = 1; k < f.nodes(); ++k) {
    acc += 0.5 * h * (f.at(k - 1) + f.at(k));
    out.set(k, acc);
  }
  return out;
}

}  // namespace opinc
