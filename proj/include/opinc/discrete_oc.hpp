#pragma once

#include <functional>
#include <vector>

#include "opinc/common.hpp"

namespace opinc {

/// Infinite-horizon discrete control problem, truncated at `horizon` for
/// computation: minimize sum_i cost_i(x_i,u_i) subject to
/// x_{i+1} = f_i(x_i,u_i), x_0 given. L1 and L2 are the declared
/// contraction constants |f(x+z,u+h)-f(x,u)| <= L1|z| + L2|h|; the
/// factory rejects L1 outside (0, sqrt(2)/2) and cross-checks the
/// declared partials against central differences.
struct DiscreteOCProblem {
  std::function<Vec(int, const Vec&, const Vec&)> f;
  std::function<Mat(int, const Vec&, const Vec&)> f_x;  // n x n
  std::function<Mat(int, const Vec&, const Vec&)> f_u;  // n x r
  std::function<double(int, const Vec&, const Vec&)> cost;
  std::function<Vec(int, const Vec&, const Vec&)> cost_x;
  std::function<Vec(int, const Vec&, const Vec&)> cost_u;
  Vec x0;
  double L1 = 0.0, L2 = 0.0;
  int horizon = 0;
  int state_dim = 0, control_dim = 0;
};

/// Validates and returns the problem; throws InputError on a bad L1 and
/// EvaluationError when a declared partial disagrees with central
/// differences beyond 1e-6 relative on random probes.
DiscreteOCProblem make_problem(DiscreteOCProblem prob, std::uint64_t seed = 1);

/// States x_0..x_N for a control sequence of length N = horizon.
std::vector<Vec> forward(const DiscreteOCProblem& prob, const std::vector<Vec>& u);

struct AdjointTrajectory {
  std::vector<Vec> psi;        // psi_0..psi_{N-1}
  double terminal_tail = 0.0;  // |psi_{N-1}|, truncation diagnostic
};

/// Backward recursion psi_{i-1} = cost_x(i,x_i,u_i) + f_x(i,x_i,u_i)^T psi_i
/// with psi_N = 0 and the horizon stage evaluated at zero control.
AdjointTrajectory adjoint(const DiscreteOCProblem& prob, const std::vector<Vec>& u,
                          const std::vector<Vec>& x);

/// g_i = cost_u(i,x_i,u_i) + f_u(i,x_i,u_i)^T psi_i: one forward plus one
/// backward pass.
std::vector<Vec> gradient(const DiscreteOCProblem& prob, const std::vector<Vec>& u);

/// Truncated objective sum_{i=0}^{N} cost_i(x_i,u_i) with u_N = 0;
/// the reference the finite-difference oracle differentiates.
double truncated_objective(const DiscreteOCProblem& prob, const std::vector<Vec>& u);

struct TailRow {
  int horizon = 0;
  double prefix_gradient_diff = 0.0;  // vs the previous horizon, common prefix
};

struct TailStudy {
  std::vector<TailRow> rows;
  std::vector<double> terminal_tails;
};

/// Gradients at increasing horizons for a zero-extended control; the
/// prefix differences quantify the truncation error of psi_N = 0.
TailStudy tail_truncation_study(const DiscreteOCProblem& prob, const std::vector<Vec>& u,
                                const std::vector<int>& horizons);

}  // namespace opinc
