#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "opinc/common.hpp"

namespace opinc {

/// Uniform grid over an interval [t0,T] or an axis-aligned box in R^m.
/// Nodes are stored row-major over the axes (last axis fastest).
class Grid {
 public:
  enum class Kind { Interval, Box };

  static Grid interval(double t0, double T, int nodes);
  static Grid box(const std::vector<double>& lower, const std::vector<double>& upper,
                  const std::vector<int>& nodes_per_axis);

  Kind kind() const { return kind_; }
  int axes() const { return static_cast<int>(lower_.size()); }
  int node_count() const { return total_nodes_; }
  int nodes_on_axis(int a) const { return nodes_[a]; }
  double lower(int a = 0) const { return lower_[a]; }
  double upper(int a = 0) const { return upper_[a]; }
  double spacing(int a = 0) const { return h_[a]; }
  /// Largest per-axis spacing; the "h" of first-order slack estimates.
  double max_spacing() const;

  /// Coordinates of node k (row-major for boxes).
  Vec coord(int k) const;
  /// Composite trapezoid weight of node k (tensor product on boxes).
  double weight(int k) const;
  double volume() const;

  bool same_as(const Grid& other) const;

 private:
  Kind kind_ = Kind::Interval;
  std::vector<double> lower_, upper_, h_;
  std::vector<int> nodes_;
  int total_nodes_ = 0;
};

/// Vector-valued function sampled on a grid: values(k) is the R^n value
/// at node k, stored as rows of an (nodes x codim) matrix.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(Grid grid, int codim);
  GridFunction(Grid grid, Mat values);

  static GridFunction constant(const Grid& g, const Vec& value);
  static GridFunction constant(const Grid& g, double value);
  /// Sample a callable t -> R^codim at the nodes.
  static GridFunction sample(const Grid& g, int codim,
                             const std::function<Vec(const Vec&)>& f);
  static GridFunction sample_scalar(const Grid& g, const std::function<double(double)>& f);

  const Grid& grid() const { return grid_; }
  int codim() const { return static_cast<int>(values_.cols()); }
  int nodes() const { return static_cast<int>(values_.rows()); }
  const Mat& values() const { return values_; }
  Mat& values() { return values_; }

  Vec at(int k) const { return values_.row(k).transpose(); }
  void set(int k, const Vec& v) { values_.row(k) = v.transpose(); }
  double scalar_at(int k) const;

  /// Pointwise Euclidean magnitude |f(t_k)| as a scalar GridFunction.
  GridFunction magnitude() const;
  /// Max over nodes of |f(t_k)|.
  double sup_norm() const;

  /// Linear (interval) / multilinear (box) interpolation at an off-node point.
  Vec interp(const Vec& t) const;

  GridFunction& operator+=(const GridFunction& o);
  GridFunction& operator-=(const GridFunction& o);
  GridFunction& operator*=(double a);
  friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
  friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
  friend GridFunction operator*(double a, GridFunction f) { return f *= a; }

  void to_csv(std::ostream& os) const;
  static GridFunction from_csv(std::istream& is, const Grid& grid);

 private:
  Grid grid_;
  Mat values_;
};

/// L_p norm by composite trapezoid quadrature of |f|^p; p may be
/// numeric_limits<double>::infinity() for the sup norm. p < 1 is rejected.
double lp_norm(const GridFunction& f, double p);

/// Quadrature of a scalar integrand sampled at the nodes.
double integral(const GridFunction& f);

/// Running trapezoid integral on an interval grid; node 0 holds 0.
GridFunction cumulative_integral(const GridFunction& f);

constexpr double kInfNorm = std::numeric_limits<double>::infinity();

}  // namespace opinc
