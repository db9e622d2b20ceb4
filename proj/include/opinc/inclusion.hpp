#pragma once

#include <vector>

#include "opinc/multimap.hpp"
#include "opinc/operators.hpp"

namespace opinc {

struct IterationRecord {
  double dx_sup = 0.0;    // |x_{i+1} - x_i| in sup norm
  double dv_p = 0.0;      // |v_{i+1} - v_i| in the solve's L_p norm
  double defect_sup = 0.0;
};

struct IterationTrace {
  std::vector<IterationRecord> records;
};

struct InclusionSolution {
  GridFunction u;
  GridFunction x;  // = A u
  IterationTrace trace;
  bool converged = false;
  double final_defect = 0.0;
  int iterations = 0;
};

/// Observed deviations from the start iterate paired against the a
/// priori bounds. Bounds are accepted when observed <= bound*(1+10h)
/// plus a small absolute floor; slack is the worst relative overshoot
/// (0 when the bounds hold with margin).
struct BoundReport {
  GridFunction m;           // L * cumulative int M (Volterra); contraction factor (Fredholm)
  GridFunction bound_x, bound_u;
  GridFunction observed_x, observed_u;
  bool satisfied = false;
  double slack = 0.0;
  double tolerance_factor = 0.0;  // the 1 + 10h actually used
};

class SolverDidNotConverge : public ConvergenceError {
 public:
  SolverDidNotConverge(const std::string& msg, IterationTrace trace)
      : ConvergenceError(msg), trace(std::move(trace)) {}
  IterationTrace trace;
};

struct SolveResult {
  InclusionSolution solution;
  BoundReport bounds;
};

/// Successive approximation for u(t) in F(t,(Au)(t)) with a Volterra
/// conditional operator: x_0 = A u_bar, v_i the nearest-point selection
/// of F(.,x_i(.)) to the previous iterate, x_{i+1} = A v_i. No smallness
/// condition is required. Deviations are checked against
///   |x - x_bar|(t) <= L int_{t0}^t e^{m(t)-m(tau)} rho(tau) dtau,
///   |u - u_bar|(t) <= rho(t) + L M(t) int_{t0}^t e^{m(t)-m(tau)} rho dtau,
/// with m(t) = L int_{t0}^t M.
SolveResult solve_volterra(const KernelOperator& A, const MultiMap& F, const GridFunction& u_bar,
                           double tol, int max_iter);

/// Same iteration under the contraction precondition
/// ||A|| (int M^p)^{1/p} < 1; deviations checked against
///   |u - u_bar|(t) <= rho(t) + ||A|| (int rho^p)^{1/p} M(t) / (1 - factor),
///   |x - x_bar|(t) <= ||A|| (int rho^p)^{1/p} / (1 - factor).
SolveResult solve_fredholm(const KernelOperator& A, const MultiMap& F, const GridFunction& u_bar,
                           double p, double tol, int max_iter);

/// Box-domain variant; identical contract with box quadrature.
SolveResult solve_box(const KernelOperator& A, const MultiMap& F, const GridFunction& u_bar,
                      double p, double tol, int max_iter);

struct PerturbationRow {
  double s_norm = 0.0;
  double deviation_sup = 0.0;  // |x_s - x_0| in sup norm
  double bound = 0.0;          // ||A|| ||s||_p / (1 - factor)
};

/// Re-solves u in F(t,(Au)(t)) + s(t) from the unperturbed solution for
/// each perturbation and verifies the deviation bound. alpha is the
/// declared tube radius; a perturbation whose bound exceeds it is
/// rejected.
std::vector<PerturbationRow> perturbation_study(const KernelOperator& A, const MultiMap& F,
                                                const InclusionSolution& u0,
                                                const std::vector<GridFunction>& s_list, double p,
                                                double alpha, double tol, int max_iter);

/// Gronwall bound on ||u||_{L1} over all solutions when
/// ||F(t,x)|| <= alpha(t) + beta |x|:
///   int alpha + L beta (T-t0) e^{L beta (T-t0)} int alpha.
double solution_set_bound(const KernelOperator& A, const GridFunction& alpha, double beta);

}  // namespace opinc
