#include "opinc/discrete_oc.hpp"

#include <cmath>
#include <sstream>

namespace opinc {

namespace {

void check_partials(const DiscreteOCProblem& p, std::uint64_t seed) {
  auto rng = substream(seed, "oc-partials");
  const double h = 1e-6;
  const double rtol = 1e-6;
  for (int trial = 0; trial < 12; ++trial) {
    int i = trial % std::max(1, p.horizon);
    Vec x = gaussian_vec(rng, p.state_dim);
    Vec u = gaussian_vec(rng, p.control_dim);
    Mat fx = p.f_x(i, x, u), fu = p.f_u(i, x, u);
    Vec cx = p.cost_x(i, x, u), cu = p.cost_u(i, x, u);
    auto rel_ok = [&](double got, double fd, double scale) {
      return std::abs(got - fd) <= rtol * std::max({1.0, std::abs(fd), scale});
    };
    for (int c = 0; c < p.state_dim; ++c) {
      Vec xp = x, xm = x;
      xp[c] += h;
      xm[c] -= h;
      Vec dcol = (p.f(i, xp, u) - p.f(i, xm, u)) / (2 * h);
      double dcost = (p.cost(i, xp, u) - p.cost(i, xm, u)) / (2 * h);
      for (int rr = 0; rr < p.state_dim; ++rr)
        if (!rel_ok(fx(rr, c), dcol[rr], fx.norm()))
          throw EvaluationError("discrete_oc: declared f_x disagrees with central differences");
      if (!rel_ok(cx[c], dcost, cx.norm()))
        throw EvaluationError("discrete_oc: declared cost_x disagrees with central differences");
    }
    for (int c = 0; c < p.control_dim; ++c) {
      Vec up = u, um = u;
      up[c] += h;
      um[c] -= h;
      Vec dcol = (p.f(i, x, up) - p.f(i, x, um)) / (2 * h);
      double dcost = (p.cost(i, x, up) - p.cost(i, x, um)) / (2 * h);
      for (int rr = 0; rr < p.state_dim; ++rr)
        if (!rel_ok(fu(rr, c), dcol[rr], fu.norm()))
          throw EvaluationError("discrete_oc: declared f_u disagrees with central differences");
      if (!rel_ok(cu[c], dcost, cu.norm()))
        throw EvaluationError("discrete_oc: declared cost_u disagrees with central differences");
    }
  }
}

}  // namespace

DiscreteOCProblem make_problem(DiscreteOCProblem prob, std::uint64_t seed) {
  require(prob.horizon >= 1, "discrete_oc: horizon must be positive");
  require(prob.state_dim >= 1 && prob.control_dim >= 1, "discrete_oc: bad dimensions");
  require(static_cast<int>(prob.x0.size()) == prob.state_dim, "discrete_oc: x0 dimension mismatch");
  const double cap = std::sqrt(2.0) / 2.0;
  if (!(prob.L1 > 0.0 && prob.L1 < cap))
    throw InputError("discrete_oc: L1 must satisfy 0 < L1 < sqrt(2)/2");
  require(prob.L2 > 0.0, "discrete_oc: L2 must be positive");
  check_partials(prob, seed);
  return prob;
}

std::vector<Vec> forward(const DiscreteOCProblem& prob, const std::vector<Vec>& u) {
  require(static_cast<int>(u.size()) == prob.horizon, "forward: control length must equal horizon");
  std::vector<Vec> x(prob.horizon + 1);
  x[0] = prob.x0;
  for (int i = 0; i < prob.horizon; ++i) {
    x[i + 1] = prob.f(i, x[i], u[i]);
    if (!x[i + 1].allFinite()) {
      std::ostringstream msg;
      msg << "forward: non-finite state at index " << i + 1;
      throw EvaluationError(msg.str());
    }
  }
  return x;
}

AdjointTrajectory adjoint(const DiscreteOCProblem& prob, const std::vector<Vec>& u,
                          const std::vector<Vec>& x) {
  require(static_cast<int>(u.size()) == prob.horizon, "adjoint: control length mismatch");
  require(static_cast<int>(x.size()) == prob.horizon + 1, "adjoint: state length mismatch");
  AdjointTrajectory out;
  out.psi.assign(prob.horizon, Vec::Zero(prob.state_dim));
  Vec psi_next = Vec::Zero(prob.state_dim);  // psi_N = 0 truncation
  const Vec u_zero = Vec::Zero(prob.control_dim);
  for (int i = prob.horizon; i >= 1; --i) {
    const Vec& ui = (i == prob.horizon) ? u_zero : u[i];
    Vec psi = prob.cost_x(i, x[i], ui) + prob.f_x(i, x[i], ui).transpose() * psi_next;
    out.psi[i - 1] = psi;
    psi_next = psi;
  }
  out.terminal_tail = out.psi.back().norm();
  return out;
}

std::vector<Vec> gradient(const DiscreteOCProblem& prob, const std::vector<Vec>& u) {
  std::vector<Vec> x = forward(prob, u);
  AdjointTrajectory adj = adjoint(prob, u, x);
  std::vector<Vec> g(prob.horizon);
  for (int i = 0; i < prob.horizon; ++i)
    g[i] = prob.cost_u(i, x[i], u[i]) + prob.f_u(i, x[i], u[i]).transpose() * adj.psi[i];
  return g;
}

double truncated_objective(const DiscreteOCProblem& prob, const std::vector<Vec>& u) {
  std::vector<Vec> x = forward(prob, u);
  double J = 0.0;
  for (int i = 0; i < prob.horizon; ++i) J += prob.cost(i, x[i], u[i]);
  J += prob.cost(prob.horizon, x[prob.horizon], Vec::Zero(prob.control_dim));
  return J;
}

TailStudy tail_truncation_study(const DiscreteOCProblem& prob, const std::vector<Vec>& u,
                                const std::vector<int>& horizons) {
  TailStudy study;
  std::vector<Vec> prev_g;
  for (int N : horizons) {
    require(N >= static_cast<int>(u.size()), "tail_truncation_study: horizon below control length");
    DiscreteOCProblem pN = prob;
    pN.horizon = N;
    std::vector<Vec> uN = u;
    uN.resize(N, Vec::Zero(prob.control_dim));
    std::vector<Vec> x = forward(pN, uN);
    AdjointTrajectory adj = adjoint(pN, uN, x);
    std::vector<Vec> g(N);
    for (int i = 0; i < N; ++i)
      g[i] = pN.cost_u(i, x[i], uN[i]) + pN.f_u(i, x[i], uN[i]).transpose() * adj.psi[i];

    TailRow row;
    row.horizon = N;
    if (!prev_g.empty()) {
      std::size_t m = std::min(prev_g.size(), g.size());
      double acc = 0.0;
      for (std::size_t i = 0; i < m; ++i) acc += (g[i] - prev_g[i]).squaredNorm();
      row.prefix_gradient_diff = std::sqrt(acc);
    }
    study.rows.push_back(row);
    study.terminal_tails.push_back(adj.terminal_tail);
    prev_g = std::move(g);
  }
  return study;
}

}  // namespace opinc
