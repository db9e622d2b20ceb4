#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "opinc/builtins.hpp"
#include "opinc/discrete_oc.hpp"

using namespace opinc;
using namespace opinc::builtins;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }

std::vector<Vec> zeros(int n, int dim) { return std::vector<Vec>(n, Vec::Zero(dim)); }

}  // namespace

TEST_CASE("forward recursion on hand-computed sequences") {
  auto p = lq_problem(1, 1, 0.5, 1.0, 2.0, 2.0, v1(0), 6);

  auto x0 = forward(p, zeros(6, 1));
  for (const Vec& x : x0) CHECK(x.norm() == doctest::Approx(0.0));

  auto u = zeros(6, 1);
  u[0] = v1(1.0);
  auto x = forward(p, u);
  // x = (0, 1, 0.5, 0.25, ...)
  CHECK(x[0][0] == doctest::Approx(0.0));
  CHECK(x[1][0] == doctest::Approx(1.0));
  CHECK(x[2][0] == doctest::Approx(0.5));
  CHECK(x[3][0] == doctest::Approx(0.25));

  CHECK_THROWS_AS(forward(p, zeros(5, 1)), InputError);
}

TEST_CASE("forward states obey the geometric input-to-state bound") {
  auto rng = substream(51, "oc-stability");
  auto p = lq_problem(2, 2, 0.6, 1.2, 1.0, 1.0, Vec::Zero(2), 30);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vec> u(30);
    for (auto& ui : u) ui = gaussian_vec(rng, 2);
    auto x = forward(p, u);
    for (int i = 1; i <= 30; ++i) {
      double bound = 0.0;
      for (int k = 0; k < i; ++k) bound += p.L2 * std::pow(p.L1, i - 1 - k) * u[k].norm();
      CHECK(x[i].norm() <= bound + 1e-12);
    }
  }
}

TEST_CASE("adjoint recursion on the one-step example") {
  // cost x^2 + u^2, dynamics 0.5 x + u, x0 = 1, u0 = 0:
  // x1 = 0.5, psi0 = cost_x(1, x1, 0) = 2 * 0.5 = 1
  DiscreteOCProblem p;
  p.state_dim = p.control_dim = 1;
  p.x0 = v1(1.0);
  p.horizon = 1;
  p.L1 = 0.5;
  p.L2 = 1.0;
  p.f = [](int, const Vec& x, const Vec& u) { return Vec(0.5 * x + u); };
  p.f_x = [](int, const Vec&, const Vec&) { return Mat(0.5 * Mat::Identity(1, 1)); };
  p.f_u = [](int, const Vec&, const Vec&) { return Mat(Mat::Identity(1, 1)); };
  p.cost = [](int, const Vec& x, const Vec& u) { return x.squaredNorm() + u.squaredNorm(); };
  p.cost_x = [](int, const Vec& x, const Vec&) { return Vec(2.0 * x); };
  p.cost_u = [](int, const Vec&, const Vec& u) { return Vec(2.0 * u); };
  p = make_problem(p);

  auto u = zeros(1, 1);
  auto x = forward(p, u);
  CHECK(x[1][0] == doctest::Approx(0.5));
  auto adj = adjoint(p, u, x);
  CHECK(adj.psi[0][0] == doctest::Approx(1.0));

  // dJ/du0 = cost_u(0) + psi0 * f_u = 0 + 1, with J(u0) = 1 + u0^2 + (0.5 + u0)^2
  auto g = gradient(p, u);
  CHECK(g[0][0] == doctest::Approx(1.0));
  double h = 1e-6;
  auto up = u, um = u;
  up[0] = v1(h);
  um[0] = v1(-h);
  double fd = (truncated_objective(p, up) - truncated_objective(p, um)) / (2 * h);
  CHECK(g[0][0] == doctest::Approx(fd).epsilon(1e-8));
}

TEST_CASE("zero cost gives a zero adjoint, constant offsets leave gradients unchanged") {
  auto p = lq_problem(1, 1, 0.5, 1.0, 0.0, 0.0, v1(1.0), 10);
  auto u = zeros(10, 1);
  auto x = forward(p, u);
  auto adj = adjoint(p, u, x);
  for (const Vec& psi : adj.psi) CHECK(psi.norm() == doctest::Approx(0.0));

  auto pq = lq_problem(1, 1, 0.5, 1.0, 1.0, 1.0, v1(1.0), 20);
  DiscreteOCProblem shifted = pq;
  shifted.cost = [base = pq.cost](int i, const Vec& x2, const Vec& u2) {
    return base(i, x2, u2) + 1.0 / (1.0 + i * i);  // summable offset a_i
  };
  auto rng = substream(52, "oc-offset");
  std::vector<Vec> uu(20);
  for (auto& ui : uu) ui = gaussian_vec(rng, 1);
  auto g1 = gradient(pq, uu);
  auto g2 = gradient(shifted, uu);
  for (int i = 0; i < 20; ++i) CHECK((g1[i] - g2[i]).norm() <= 1e-14);
}

TEST_CASE("gradient at the global minimum of the LQ problem vanishes") {
  auto p = lq_problem(2, 2, 0.5, 1.0, 1.0, 1.0, Vec::Zero(2), 25);
  auto g = gradient(p, zeros(25, 2));
  for (const Vec& gi : g) CHECK(gi.norm() == doctest::Approx(0.0));
}

TEST_CASE("gradient matches central finite differences on random LQ instances") {
  auto rng = substream(53, "oc-fd");
  std::uniform_real_distribution<double> ua(0.15, 0.65), ub(0.5, 1.5), uq(0.5, 2.0);
  const int N = 50;
  double worst = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    int n = 1 + static_cast<int>(rng() % 3);
    auto p = lq_problem(n, n, ua(rng), ub(rng), uq(rng), uq(rng), gaussian_vec(rng, n), N);
    std::vector<Vec> u(N);
    for (auto& ui : u) ui = gaussian_vec(rng, n, 0.5);
    auto g = gradient(p, u);
    double gnorm = 0.0;
    for (const auto& gi : g) gnorm += gi.squaredNorm();
    gnorm = std::sqrt(gnorm);
    const double h = 1e-5;
    for (int i = 0; i < N; i += 7) {
      for (int c = 0; c < n; ++c) {
        auto up = u, um = u;
        up[i][c] += h;
        um[i][c] -= h;
        double fd = (truncated_objective(p, up) - truncated_objective(p, um)) / (2 * h);
        worst = std::max(worst, std::abs(g[i][c] - fd) / std::max(1.0, gnorm));
      }
    }
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("gradient check covers the saturating toy problem too") {
  auto p = logistic_problem(0.6, 1.0, v1(0.8), 40);
  auto rng = substream(54, "oc-logistic");
  std::vector<Vec> u(40);
  for (auto& ui : u) ui = gaussian_vec(rng, 1, 0.4);
  auto g = gradient(p, u);
  const double h = 1e-5;
  for (int i = 0; i < 40; i += 5) {
    auto up = u, um = u;
    up[i][0] += h;
    um[i][0] -= h;
    double fd = (truncated_objective(p, up) - truncated_objective(p, um)) / (2 * h);
    CHECK(g[i][0] == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("state increment contraction inequality") {
  auto rng = substream(55, "oc-contraction");
  auto p = lq_problem(2, 2, 0.55, 1.3, 1.0, 0.7, gaussian_vec(rng, 2), 40);
  const double gain = 2.0 * p.L2 * p.L2 / (1.0 - 2.0 * p.L1 * p.L1);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<Vec> u(40), h(40);
    for (int i = 0; i < 40; ++i) {
      u[i] = gaussian_vec(rng, 2);
      h[i] = gaussian_vec(rng, 2, 0.3);
    }
    auto x = forward(p, u);
    std::vector<Vec> uh(40);
    for (int i = 0; i < 40; ++i) uh[i] = u[i] + h[i];
    auto xh = forward(p, uh);
    double lhs = 0.0, rhs = 0.0;
    for (int i = 0; i <= 40; ++i) lhs += (xh[i] - x[i]).squaredNorm();
    for (int i = 0; i < 40; ++i) rhs += h[i].squaredNorm();
    CHECK(lhs <= gain * rhs + 1e-12);
  }
}

TEST_CASE("directional expansion constant stays below the remainder estimate") {
  auto rng = substream(56, "oc-remainder");
  auto p = lq_problem(1, 1, 0.5, 1.0, 1.0, 1.0, v1(0.7), 40);
  // Lipschitz moduli of the partials for this problem: f_x, f_u constant,
  // cost_x and cost_u have modulus max(q, s) = 1.
  const double L = 1.0;
  std::vector<Vec> u(40), h(40);
  for (int i = 0; i < 40; ++i) {
    u[i] = gaussian_vec(rng, 1, 0.4);
    h[i] = gaussian_vec(rng, 1);
  }
  auto x = forward(p, u);
  auto adj = adjoint(p, u, x);
  double c = 0.0;
  for (const Vec& psi : adj.psi) c = std::max(c, psi.norm());
  double hh = 0.0;
  for (const Vec& hi : h) hh += hi.squaredNorm();

  const double gain = 2.0 * p.L2 * p.L2 / (1.0 - 2.0 * p.L1 * p.L1);
  const double K2 = L * (1.0 + c) * (0.5 * gain + 1.5);
  const double remainder_const =
      (L + c * L) * (3.0 * p.L2 * p.L2 / (1.0 - 2.0 * p.L1 * p.L1) + 0.5) + K2;

  auto g = gradient(p, u);
  double gh = 0.0;
  for (int i = 0; i < 40; ++i) gh += g[i].dot(h[i]);
  double j0 = truncated_objective(p, u);
  for (double eps : {1e-2, 3e-3, 1e-3, 3e-4, 1e-4}) {
    std::vector<Vec> ue(40);
    for (int i = 0; i < 40; ++i) ue[i] = u[i] + eps * h[i];
    double lhs = std::abs(truncated_objective(p, ue) - j0 - eps * gh);
    CHECK(lhs <= remainder_const * eps * eps * hh + 1e-10);
  }
}

TEST_CASE("adjoint tail decays geometrically and truncation converges") {
  auto p = lq_problem(1, 1, 0.5, 1.0, 2.0, 2.0, v1(1.0), 60);
  std::vector<Vec> u(20);
  auto rng = substream(57, "oc-tail");
  for (auto& ui : u) ui = gaussian_vec(rng, 1);

  DiscreteOCProblem p60 = p;
  p60.horizon = 60;
  std::vector<Vec> u60 = u;
  u60.resize(60, Vec::Zero(1));
  auto x = forward(p60, u60);
  auto adj = adjoint(p60, u60, x);
  CHECK(adj.terminal_tail <= 1e-8);
  const double ratio = 2.0 * p.L1 * p.L1 + 0.05;
  for (std::size_t i = 30; i + 1 < adj.psi.size(); ++i) {
    if (adj.psi[i].norm() < 1e-14) break;
    CHECK(adj.psi[i + 1].norm() <= ratio * adj.psi[i].norm() + 1e-14);
  }

  auto study = tail_truncation_study(p, u, {20, 40, 80});
  REQUIRE(study.rows.size() == 3);
  CHECK(study.rows[0].prefix_gradient_diff == 0.0);  // nothing to compare yet
  CHECK(study.rows[1].prefix_gradient_diff > 0.0);
  CHECK(study.rows[2].prefix_gradient_diff <= 0.1 * study.rows[1].prefix_gradient_diff + 1e-300);
}

TEST_CASE("constructor rejections and partial validation") {
  CHECK_THROWS_AS(lq_problem(1, 1, 0.71, 1.0, 1.0, 1.0, v1(0), 10), InputError);
  CHECK_THROWS_AS(lq_problem(1, 1, 0.0, 1.0, 1.0, 1.0, v1(0), 10), InputError);
  CHECK_NOTHROW(lq_problem(1, 1, 0.7, 1.0, 1.0, 1.0, v1(0), 10));

  // a lying Jacobian is caught by the central-difference cross-check
  DiscreteOCProblem p;
  p.state_dim = p.control_dim = 1;
  p.x0 = v1(0.0);
  p.horizon = 5;
  p.L1 = 0.5;
  p.L2 = 1.0;
  p.f = [](int, const Vec& x, const Vec& u) { return Vec(0.5 * x + u); };
  p.f_x = [](int, const Vec&, const Vec&) { return Mat(0.9 * Mat::Identity(1, 1)); };
  p.f_u = [](int, const Vec&, const Vec&) { return Mat(Mat::Identity(1, 1)); };
  p.cost = [](int, const Vec& x, const Vec& u) { return x.squaredNorm() + u.squaredNorm(); };
  p.cost_x = [](int, const Vec& x, const Vec&) { return Vec(2.0 * x); };
  p.cost_u = [](int, const Vec&, const Vec& u) { return Vec(2.0 * u); };
  CHECK_THROWS_AS(make_problem(p), EvaluationError);

  // non-finite states are reported with their index
  DiscreteOCProblem q = lq_problem(1, 1, 0.5, 1.0, 1.0, 1.0, v1(1.0), 3);
  q.f = [](int, const Vec& x, const Vec& u) {
    Vec out = 0.5 * x + u;
    if (out[0] > 10.0) out[0] = std::numeric_limits<double>::infinity();
    return out;
  };
  std::vector<Vec> big(3, v1(100.0));
  CHECK_THROWS_AS(forward(q, big), EvaluationError);
}
