#include "opinc/inclusion.hpp"

#include <cmath>
#include <sstream>

namespace opinc {

namespace {

// Nearest-point selection of F(., x(.)) to a reference function.
GridFunction select_nearest(const MultiMap& F, const GridFunction& x, const GridFunction& ref) {
  GridFunction v(ref.grid(), ref.codim());
  for (int k = 0; k < ref.nodes(); ++k) {
    CompactSet set = F(x.grid().coord(k), x.at(k));
    v.set(k, dist_to_set(ref.at(k), set).nearest);
  }
  return v;
}

struct IterationOutcome {
  GridFunction u, x;
  GridFunction rho;  // initial residual |v_0 - u_bar|
  IterationTrace trace;
  double final_defect = 0.0;
  int iterations = 0;
};

IterationOutcome iterate(const KernelOperator& A, const MultiMap& F, const GridFunction& u_bar,
                         double p_for_trace, double tol, int max_iter) {
  GridFunction x_prev = A.apply(u_bar);
  GridFunction v_prev = select_nearest(F, x_prev, u_bar);
  GridFunction rho = (v_prev - u_bar).magnitude();

  IterationOutcome out{u_bar, x_prev, rho, {}, 0.0, 0};
  GridFunction x_cur = x_prev, v_cur = v_prev;
  for (int i = 0; i < max_iter; ++i) {
    x_cur = A.apply(v_prev);
    v_cur = select_nearest(F, x_cur, v_prev);

    IterationRecord rec;
    rec.dx_sup = (x_cur - x_prev).sup_norm();
    rec.dv_p = lp_norm(v_cur - v_prev, p_for_trace);
    GridFunction x_of_v = A.apply(v_cur);
    rec.defect_sup = defect(v_cur, x_of_v, F).sup_norm();
    out.trace.records.push_back(rec);
    out.iterations = i + 1;

    if (rec.dv_p <= tol && rec.defect_sup <= tol) {
      out.u = v_cur;
      out.x = x_of_v;
      out.final_defect = rec.defect_sup;
      return out;
    }
    x_prev = x_cur;
    v_prev = v_cur;
  }
  std::ostringstream msg;
  msg << "inclusion solver: no convergence in " << max_iter << " iterations (last dv="
      << (out.trace.records.empty() ? 0.0 : out.trace.records.back().dv_p)
      << ", defect=" << (out.trace.records.empty() ? 0.0 : out.trace.records.back().defect_sup)
      << ")";
  throw SolverDidNotConverge(msg.str(), out.trace);
}

void finish_report(BoundReport& rep, const Grid& g) {
  const double h = g.max_spacing();
  rep.tolerance_factor = 1.0 + 10.0 * h;
  const double atol = 1e-9 * (1.0 + rep.bound_u.sup_norm() + rep.bound_x.sup_norm());
  rep.satisfied = true;
  rep.slack = 0.0;
  for (int k = 0; k < g.node_count(); ++k) {
    for (int which = 0; which < 2; ++which) {
      double obs = which ? rep.observed_u.scalar_at(k) : rep.observed_x.scalar_at(k);
      double bnd = which ? rep.bound_u.scalar_at(k) : rep.bound_x.scalar_at(k);
      if (obs > bnd * rep.tolerance_factor + atol) rep.satisfied = false;
      double rel = (obs - bnd) / std::max(bnd, atol);
      rep.slack = std::max(rep.slack, rel);
    }
  }
  rep.slack = std::max(rep.slack, 0.0);
}

}  // namespace

SolveResult solve_volterra(const KernelOperator& A, const MultiMap& F, const GridFunction& u_bar,
                           double tol, int max_iter) {
  require(A.kind() == KernelOperator::Kind::Volterra, "solve_volterra: Volterra operator required");
  require(u_bar.grid().same_as(A.grid()), "solve_volterra: grid mismatch");

  IterationOutcome out = iterate(A, F, u_bar, 1.0, tol, max_iter);

  SolveResult res;
  res.solution.u = out.u;
  res.solution.x = out.x;
  res.solution.trace = out.trace;
  res.solution.converged = true;
  res.solution.final_defect = out.final_defect;
  res.solution.iterations = out.iterations;

  // m(t) = L int M; I(t) = int_{t0}^t e^{m(t)-m(tau)} rho(tau) dtau.
  const double L = A.L();
  const Grid& g = A.grid();
  GridFunction m = cumulative_integral(F.modulus());
  m *= L;
  const double h = g.spacing();
  GridFunction I(g, 1);
  for (int k = 0; k < g.node_count(); ++k) {
    double acc = 0.0;
    for (int j = 0; j <= k; ++j) {
      double w = (j == 0 || j == k) ? 0.5 * h : h;
      if (k == 0) w = 0.0;
      acc += w * std::exp(m.scalar_at(k) - m.scalar_at(j)) * out.rho.scalar_at(j);
    }
    I.values()(k, 0) = acc;
  }

  BoundReport rep;
  rep.m = m;
  rep.bound_x = L * I;
  rep.bound_u = out.rho;
  for (int k = 0; k < g.node_count(); ++k)
    rep.bound_u.values()(k, 0) += L * F.modulus_at_node(k) * I.scalar_at(k);
  rep.observed_x = (res.solution.x - A.apply(u_bar)).magnitude();
  rep.observed_u = (res.solution.u - u_bar).magnitude();
  finish_report(rep, g);
  res.bounds = rep;
  return res;
}

namespace {

SolveResult solve_contractive(const KernelOperator& A, const MultiMap& F,
                              const GridFunction& u_bar, double p, double tol, int max_iter) {
  require(u_bar.grid().same_as(A.grid()), "solve_fredholm: grid mismatch");
  const double factor = fredholm_contraction_factor(A, F.modulus(), p);
  if (factor >= 1.0) {
    std::ostringstream msg;
    msg << "solve_fredholm: contraction factor " << factor << " >= 1";
    throw InputError(msg.str());
  }

  IterationOutcome out = iterate(A, F, u_bar, p, tol, max_iter);

  SolveResult res;
  res.solution.u = out.u;
  res.solution.x = out.x;
  res.solution.trace = out.trace;
  res.solution.converged = true;
  res.solution.final_defect = out.final_defect;
  res.solution.iterations = out.iterations;

  const Grid& g = A.grid();
  const double rho_p = lp_norm(out.rho, p);
  const double lead = A.opnorm() * rho_p / (1.0 - factor);

  BoundReport rep;
  rep.m = GridFunction::constant(g, factor);
  rep.bound_x = GridFunction::constant(g, lead);
  rep.bound_u = out.rho;
  for (int k = 0; k < g.node_count(); ++k)
    rep.bound_u.values()(k, 0) += lead * F.modulus_at_node(k);
  rep.observed_x = (res.solution.x - A.apply(u_bar)).magnitude();
  rep.observed_u = (res.solution.u - u_bar).magnitude();
  finish_report(rep, g);
  res.bounds = rep;
  return res;
}

}  // namespace

SolveResult solve_fredholm(const KernelOperator& A, const MultiMap& F, const GridFunction& u_bar,
                           double p, double tol, int max_iter) {
  require(A.kind() == KernelOperator::Kind::Fredholm, "solve_fredholm: Fredholm operator required");
  return solve_contractive(A, F, u_bar, p, tol, max_iter);
}

SolveResult solve_box(const KernelOperator& A, const MultiMap& F, const GridFunction& u_bar,
                      double p, double tol, int max_iter) {
  require(A.kind() == KernelOperator::Kind::Fredholm, "solve_box: Fredholm operator required");
  require(A.grid().kind() == Grid::Kind::Box, "solve_box: box grid required");
  return solve_contractive(A, F, u_bar, p, tol, max_iter);
}

std::vector<PerturbationRow> perturbation_study(const KernelOperator& A, const MultiMap& F,
                                                const InclusionSolution& u0,
                                                const std::vector<GridFunction>& s_list, double p,
                                                double alpha, double tol, int max_iter) {
  const double factor = fredholm_contraction_factor(A, F.modulus(), p);
  require(factor < 1.0, "perturbation_study: contraction factor >= 1");
  std::vector<PerturbationRow> rows;
  rows.reserve(s_list.size());
  for (const GridFunction& s : s_list) {
    PerturbationRow row;
    row.s_norm = lp_norm(s, p);
    row.bound = A.opnorm() * row.s_norm / (1.0 - factor);
    require(row.bound <= alpha,
            "perturbation_study: perturbation exceeds the declared tube radius");
    MultiMap Fs = MultiMap::shifted(F, s);
    SolveResult sol = solve_fredholm(A, Fs, u0.u, p, tol, max_iter);
    row.deviation_sup = (sol.solution.x - u0.x).sup_norm();
    rows.push_back(row);
  }
  return rows;
}

double solution_set_bound(const KernelOperator& A, const GridFunction& alpha, double beta) {
  require(A.kind() == KernelOperator::Kind::Volterra, "solution_set_bound: Volterra operator");
  require(beta >= 0, "solution_set_bound: beta must be nonnegative");
  require(alpha.codim() == 1 && alpha.values().minCoeff() >= 0,
          "solution_set_bound: alpha must be scalar nonnegative");
  const double ia = integral(alpha);
  const double span = A.grid().upper() - A.grid().lower();
  const double lb = A.L() * beta * span;
  return ia + lb * std::exp(lb) * ia;
}

}  // namespace opinc
