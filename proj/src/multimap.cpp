#include "opinc/multimap.hpp"

#include <cmath>

namespace opinc {

MultiMap::MultiMap(EvalFn eval, GridFunction modulus, int domain_dim, int range_dim)
    : eval_(std::move(eval)), M_(std::move(modulus)), domain_dim_(domain_dim), range_dim_(range_dim) {
  require(M_.codim() == 1, "MultiMap: modulus must be scalar");
  require(M_.values().minCoeff() > 0, "MultiMap: modulus must be positive");
}

CompactSet MultiMap::operator()(const Vec& t, const Vec& x) const {
  CompactSet s = eval_(t, x);
  require(s.dim() == range_dim_, "MultiMap: evaluator range dimension mismatch");
  return s;
}

LipschitzCheckReport MultiMap::verify_lipschitz(int probes, std::uint64_t seed,
                                                double probe_scale) const {
  auto rng = substream(seed, "multimap-lipschitz");
  std::uniform_int_distribution<int> pick(0, M_.grid().node_count() - 1);
  LipschitzCheckReport rep;
  for (int i = 0; i < probes; ++i) {
    int k = pick(rng);
    Vec t = M_.grid().coord(k);
    Vec x = gaussian_vec(rng, range_dim_, probe_scale);
    Vec x1 = x + gaussian_vec(rng, range_dim_, probe_scale);
    double lhs = hausdorff(eval_(t, x), eval_(t, x1));
    double rhs = M_.scalar_at(k) * (x - x1).norm();
    if (lhs > rhs * (1.0 + 1e-8) + 1e-12) rep.holds = false;
    if (rhs > 1e-14) rep.worst_ratio = std::max(rep.worst_ratio, lhs / rhs);
  }
  return rep;
}

MultiMap MultiMap::shifted(const MultiMap& F, const GridFunction& s) {
  require(s.codim() == F.range_dim_, "MultiMap::shifted: shift codim mismatch");
  auto base = F.eval_;
  GridFunction shift = s;
  auto ev = [base, shift](const Vec& t, const Vec& x) -> CompactSet {
    return minkowski_shift(base(t, x), shift.interp(t));
  };
  return MultiMap(ev, F.M_, F.domain_dim_, F.range_dim_);
}

GridFunction defect(const GridFunction& u, const GridFunction& x, const MultiMap& F) {
  require(u.grid().same_as(x.grid()), "defect: u and x must share a grid");
  require(u.codim() == F.range_dim(), "defect: u codim mismatch");
  GridFunction rho(u.grid(), 1);
  for (int k = 0; k < u.nodes(); ++k) {
    try {
      CompactSet set = F(u.grid().coord(k), x.at(k));
      rho.values()(k, 0) = dist_to_set(u.at(k), set).distance;
    } catch (const std::exception& e) {
      throw EvaluationError("defect: evaluator failed at node " + std::to_string(k) + ": " +
                            e.what());
    }
  }
  return rho;
}

}  // namespace opinc
