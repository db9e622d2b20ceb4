#pragma once

#include <functional>

#include "opinc/gridfn.hpp"
#include "opinc/setval.hpp"

namespace opinc {

struct LipschitzCheckReport {
  bool holds = true;
  double worst_ratio = 0.0;  // hausdorff / (M(t) |x - x1|)
};

/// Set-valued map (t, x) -> compact set, together with its declared
/// Hausdorff-Lipschitz modulus M(t) > 0 in the state argument.
class MultiMap {
 public:
  using EvalFn = std::function<CompactSet(const Vec& t, const Vec& x)>;

  MultiMap(EvalFn eval, GridFunction modulus, int domain_dim, int range_dim);

  CompactSet operator()(const Vec& t, const Vec& x) const;
  const GridFunction& modulus() const { return M_; }
  double modulus_at_node(int k) const { return M_.scalar_at(k); }
  int domain_dim() const { return domain_dim_; }
  int range_dim() const { return range_dim_; }

  /// Samples node coordinates and random state pairs; verifies
  /// hausdorff(F(t,x), F(t,x1)) <= M(t)|x-x1| (1 + 1e-8) + 1e-12.
  LipschitzCheckReport verify_lipschitz(int probes, std::uint64_t seed = 1,
                                        double probe_scale = 1.0) const;

  /// The perturbed map t, x -> F(t,x) + s(t) used by perturbation studies.
  static MultiMap shifted(const MultiMap& F, const GridFunction& s);

 private:
  EvalFn eval_;
  GridFunction M_;
  int domain_dim_ = 1;
  int range_dim_ = 1;
};

/// Pointwise residual rho(t_k) = d(u(t_k), F(t_k, x(t_k))) as a scalar
/// GridFunction; evaluator failures are rethrown with the node index.
GridFunction defect(const GridFunction& u, const GridFunction& x, const MultiMap& F);

}  // namespace opinc
