#include "opinc/operators.hpp"

#include <cmath>

namespace opinc {

namespace {

KernelFn wrap_scalar(std::function<double(double, double)> k, int codim) {
  return [k = std::move(k), codim](const Vec& t, const Vec& s) -> Mat {
    return k(t[0], s[0]) * Mat::Identity(codim, codim);
  };
}

}  // namespace

KernelOperator KernelOperator::volterra(const Grid& grid, int codim, KernelFn kernel, double L) {
  require(grid.kind() == Grid::Kind::Interval, "KernelOperator: Volterra kind needs an interval grid");
  require(L > 0, "KernelOperator: L must be positive");
  KernelOperator op;
  op.kind_ = Kind::Volterra;
  op.grid_ = grid;
  op.codim_ = codim;
  op.L_ = L;
  op.build_matrix(kernel);
  // Declared constant must dominate the sampled kernel norms.
  for (int k = 0; k < grid.node_count(); k += std::max(1, grid.node_count() / 37)) {
    for (int j = 0; j <= k; j += std::max(1, (k + 1) / 19)) {
      Mat K = kernel(grid.coord(k), grid.coord(j));
      double n2 = K.operatorNorm();
      require(n2 <= L * (1.0 + 1e-12) + 1e-12,
              "KernelOperator: declared L below sampled kernel norm");
    }
  }
  op.opnorm_estimate_ = op.power_iteration_norm();
  op.opnorm_ = op.opnorm_estimate_;
  return op;
}

KernelOperator KernelOperator::fredholm(const Grid& grid, int codim, KernelFn kernel, double L,
                                        double declared_opnorm) {
  require(L > 0, "KernelOperator: L must be positive");
  KernelOperator op;
  op.kind_ = Kind::Fredholm;
  op.grid_ = grid;
  op.codim_ = codim;
  op.L_ = L;
  op.build_matrix(kernel);
  op.opnorm_estimate_ = op.power_iteration_norm();
  op.opnorm_ = std::max(declared_opnorm, op.opnorm_estimate_);
  return op;
}

KernelOperator KernelOperator::volterra_scalar(const Grid& grid, int codim,
                                               std::function<double(double, double)> k, double L) {
  return volterra(grid, codim, wrap_scalar(std::move(k), codim), L);
}

KernelOperator KernelOperator::fredholm_scalar(const Grid& grid, int codim,
                                               std::function<double(double, double)> k, double L,
                                               double declared_opnorm) {
  return fredholm(grid, codim, wrap_scalar(std::move(k), codim), L, declared_opnorm);
}

void KernelOperator::build_matrix(const KernelFn& kernel) {
  const int n = grid_.node_count();
  const int d = codim_;
  node_w_ = Vec(n);
  for (int k = 0; k < n; ++k) node_w_[k] = grid_.weight(k);
  B_ = Mat::Zero(n * d, n * d);

  if (kind_ == Kind::Volterra) {
    const double h = grid_.spacing();
    for (int k = 1; k < n; ++k) {
      Vec tk = grid_.coord(k);
      for (int j = 0; j <= k; ++j) {
        double w = (j == 0 || j == k) ? 0.5 * h : h;
        B_.block(k * d, j * d, d, d) = w * kernel(tk, grid_.coord(j));
      }
    }
  } else {
    for (int k = 0; k < n; ++k) {
      Vec tk = grid_.coord(k);
      for (int j = 0; j < n; ++j)
        B_.block(k * d, j * d, d, d) = node_w_[j] * kernel(tk, grid_.coord(j));
    }
  }
}

double KernelOperator::power_iteration_norm() const {
  // Largest singular value of A with respect to the weighted L2 product.
  const int n = grid_.node_count();
  const int d = codim_;
  Vec w_rep(n * d);
  for (int k = 0; k < n; ++k) w_rep.segment(k * d, d).setConstant(node_w_[k]);
  std::mt19937_64 rng(0x5eedULL);
  Vec v = gaussian_vec(rng, n * d);
  for (int it = 0; it < 60; ++it) {
    // v <- A*A v with A* = W^{-1} B^T W, normalized in the weighted norm
    Vec av = B_ * v;
    Vec atav = (B_.transpose() * w_rep.cwiseProduct(av)).cwiseQuotient(w_rep);
    double nv = std::sqrt(atav.dot(w_rep.cwiseProduct(atav)));
    if (nv == 0.0) return 0.0;
    v = atav / nv;
  }
  Vec av = B_ * v;
  double num = std::sqrt(av.dot(w_rep.cwiseProduct(av)));
  double den = std::sqrt(v.dot(w_rep.cwiseProduct(v)));
  return den > 0 ? num / den : 0.0;
}

GridFunction KernelOperator::apply(const GridFunction& u) const {
  require(u.grid().same_as(grid_), "apply: grid mismatch");
  require(u.codim() == codim_, "apply: codim mismatch");
  const int n = grid_.node_count();
  const int d = codim_;
  Vec stacked(n * d);
  for (int k = 0; k < n; ++k) stacked.segment(k * d, d) = u.at(k);
  Vec out = B_ * stacked;
  Mat vals(n, d);
  for (int k = 0; k < n; ++k) vals.row(k) = out.segment(k * d, d).transpose();
  return GridFunction(grid_, std::move(vals));
}

GridFunction KernelOperator::adjoint_apply(const GridFunction& w) const {
  require(w.grid().same_as(grid_), "adjoint_apply: grid mismatch");
  require(w.codim() == codim_, "adjoint_apply: codim mismatch");
  const int n = grid_.node_count();
  const int d = codim_;
  Vec stacked(n * d), w_rep(n * d);
  for (int k = 0; k < n; ++k) {
    stacked.segment(k * d, d) = w.at(k);
    w_rep.segment(k * d, d).setConstant(node_w_[k]);
  }
  Vec out = (B_.transpose() * w_rep.cwiseProduct(stacked)).cwiseQuotient(w_rep);
  Mat vals(n, d);
  for (int k = 0; k < n; ++k) vals.row(k) = out.segment(k * d, d).transpose();
  return GridFunction(grid_, std::move(vals));
}

VolterraCheckReport KernelOperator::volterra_constant_check(int samples, std::uint64_t seed) const {
  require(kind_ == Kind::Volterra, "volterra_constant_check: Volterra operators only");
  VolterraCheckReport rep;
  auto rng = substream(seed, "volterra-constant-check");
  for (int s = 0; s < samples; ++s) {
    GridFunction u(grid_, codim_);
    for (int k = 0; k < grid_.node_count(); ++k) u.set(k, gaussian_vec(rng, codim_));
    GridFunction au = apply(u);
    GridFunction cum = cumulative_integral(u.magnitude());
    for (int k = 0; k < grid_.node_count(); ++k) {
      double lhs = au.at(k).norm();
      double rhs = L_ * cum.scalar_at(k);
      if (lhs > rhs + 1e-10) rep.holds = false;
      if (rhs > 1e-14) rep.worst_ratio = std::max(rep.worst_ratio, lhs / rhs);
    }
  }
  return rep;
}

double fredholm_contraction_factor(const KernelOperator& A, const GridFunction& M, double p) {
  require(A.kind() == KernelOperator::Kind::Fredholm,
          "fredholm_contraction_factor: Fredholm operators only");
  require(M.codim() == 1, "fredholm_contraction_factor: M must be scalar");
  require(M.values().minCoeff() >= 0, "fredholm_contraction_factor: M must be nonnegative");
  return A.opnorm() * lp_norm(M, p);
}

}  // namespace opinc
