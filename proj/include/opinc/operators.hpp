#pragma once

#include <functional>

#include "opinc/gridfn.hpp"

namespace opinc {

/// n x n matrix kernel sampled at a pair of grid coordinates.
using KernelFn = std::function<Mat(const Vec& t, const Vec& s)>;

struct VolterraCheckReport {
  bool holds = true;
  double worst_ratio = 0.0;
};

/// Linear integral operator on GridFunctions. Volterra kind integrates
/// K(t,s)u(s) over [t0,t] with trapezoid weights on the truncated
/// interval (causality is exact by construction); Fredholm kind
/// integrates over the whole interval or box.
///
/// L is the declared Volterra constant (|(Au)(t)| <= L int_{t0}^t |u|)
/// or Fredholm constant; opnorm() is the constant the contraction
/// theorems consume, max of the declared L_p->C value and a power
/// iteration estimate of the discrete L2 operator norm.
class KernelOperator {
 public:
  enum class Kind { Volterra, Fredholm };

  static KernelOperator volterra(const Grid& grid, int codim, KernelFn kernel, double L);
  static KernelOperator fredholm(const Grid& grid, int codim, KernelFn kernel, double L,
                                 double declared_opnorm);
  /// Scalar kernel convenience for interval/box grids (acts as k(t,s)*I).
  static KernelOperator volterra_scalar(const Grid& grid, int codim,
                                        std::function<double(double, double)> k, double L);
  static KernelOperator fredholm_scalar(const Grid& grid, int codim,
                                        std::function<double(double, double)> k, double L,
                                        double declared_opnorm);

  Kind kind() const { return kind_; }
  const Grid& grid() const { return grid_; }
  int codim() const { return codim_; }
  double L() const { return L_; }
  double opnorm() const { return opnorm_; }
  double opnorm_estimate() const { return opnorm_estimate_; }

  GridFunction apply(const GridFunction& u) const;
  /// Adjoint with respect to the trapezoid inner product; the discrete
  /// duality <Au,w> = <u,A*w> holds to rounding, not just O(h^2).
  GridFunction adjoint_apply(const GridFunction& w) const;

  /// Samples random u and verifies |(Au)(t_k)| <= L * (cumulative
  /// int |u|)(t_k) + 1e-10 at every node. Interval Volterra only.
  VolterraCheckReport volterra_constant_check(int samples, std::uint64_t seed = 1) const;

 private:
  KernelOperator() = default;
  void build_matrix(const KernelFn& kernel);
  double power_iteration_norm() const;

  Kind kind_ = Kind::Volterra;
  Grid grid_;
  int codim_ = 1;
  double L_ = 0.0;
  double opnorm_ = 0.0;
  double opnorm_estimate_ = 0.0;
  Mat B_;        // (nodes*codim) x (nodes*codim), quadrature baked in
  Vec node_w_;   // trapezoid weight per node
};

/// ||A|| * lp_norm(M, p): the contraction factor the Fredholm solver
/// compares against 1. M must be a scalar nonnegative modulus.
double fredholm_contraction_factor(const KernelOperator& A, const GridFunction& M, double p);

}  // namespace opinc
