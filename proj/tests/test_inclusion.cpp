#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "opinc/builtins.hpp"
#include "opinc/inclusion.hpp"

using namespace opinc;

TEST_CASE("volterra solver accepts a feasible start unchanged") {
  Grid g = Grid::interval(0, 1, 201);
  auto A = builtins::make_volterra("identity", g, 1, 0.0);
  MultiMap F = builtins::affine_singleton(g, 0.5, 0.0);  // F(t,x) = {0.5 x}
  auto zero = GridFunction::constant(g, 0.0);

  auto res = solve_volterra(A, F, zero, 1e-12, 50);
  CHECK(res.solution.converged);
  CHECK(res.solution.u.sup_norm() <= 1e-14);
  CHECK(res.bounds.satisfied);
  CHECK(res.bounds.bound_x.sup_norm() <= 1e-14);  // rho = 0 collapses the bounds
}

TEST_CASE("volterra solver reproduces the linear closed form and tight bounds") {
  // F(t,x) = {0.5 x + 1}: from u_bar = 0 the residual is 1 and the
  // solution solves x' = 0.5 x + 1, x(0) = 0, i.e. u(t) = e^{t/2}.
  Grid g = Grid::interval(0, 1, 1001);
  auto A = builtins::make_volterra("identity", g, 1, 0.0);
  MultiMap F = builtins::affine_singleton(g, 0.5, 1.0);
  auto zero = GridFunction::constant(g, 0.0);

  auto res = solve_volterra(A, F, zero, 1e-12, 200);
  CHECK(res.solution.converged);
  CHECK(res.solution.final_defect <= 1e-10);

  double err_u = 0.0, err_x = 0.0, err_bound = 0.0;
  for (int k = 0; k < g.node_count(); ++k) {
    double t = g.coord(k)[0];
    err_u = std::max(err_u, std::abs(res.solution.u.scalar_at(k) - std::exp(0.5 * t)));
    err_x = std::max(err_x, std::abs(res.solution.x.scalar_at(k) - 2 * (std::exp(0.5 * t) - 1)));
    err_bound = std::max(err_bound, std::abs(res.bounds.bound_u.scalar_at(k) - std::exp(0.5 * t)));
  }
  CHECK(err_u <= 1e-2);
  CHECK(err_x <= 1e-2);
  CHECK(err_bound <= 1e-2);  // the theorem bound is tight on this corpus
  CHECK(res.bounds.satisfied);
  CHECK(res.bounds.slack <= 10 * g.spacing());

  // x = A u invariant at convergence
  CHECK((res.solution.x - A.apply(res.solution.u)).sup_norm() <= 1e-12);
  // feasibility at every node
  CHECK(defect(res.solution.u, res.solution.x, F).sup_norm() <= 1e-10);
}

TEST_CASE("volterra solver rides the envelope of an interval-valued map") {
  // F(t,x) = [0.5x + 0.8, 0.5x + 1.2]: from u_bar = 0 the nearest-point
  // selection stays on the lower face, so u = 0.5 x + 0.8 and the
  // solution is 0.8 e^{t/2}.
  Grid g = Grid::interval(0, 1, 501);
  auto A = builtins::make_volterra("identity", g, 1, 0.0);
  auto ev = [](const Vec&, const Vec& x) {
    double c = 0.5 * x[0] + 1.0;
    return CompactSet({Vec::Constant(1, c - 0.2), Vec::Constant(1, c + 0.2)}, true);
  };
  MultiMap F(ev, GridFunction::constant(g, 0.5), 1, 1);
  CHECK(F.verify_lipschitz(300, 5).holds);

  auto res = solve_volterra(A, F, GridFunction::constant(g, 0.0), 1e-12, 200);
  CHECK(res.solution.converged);
  CHECK(res.solution.final_defect <= 1e-10);
  double err = 0.0;
  for (int k = 0; k < g.node_count(); ++k)
    err = std::max(err,
                   std::abs(res.solution.u.scalar_at(k) - 0.8 * std::exp(0.5 * g.coord(k)[0])));
  CHECK(err <= 1e-2);
  CHECK(res.bounds.satisfied);
  // rho = d(0, [0.8, 1.2]) = 0.8 at every node
  CHECK(res.bounds.bound_u.scalar_at(0) == doctest::Approx(0.8));
}

TEST_CASE("vector-valued inclusion through a matrix kernel") {
  // K(t,s) swaps the two components; F(t,x) = {0.5 x + (1,1)} gives the
  // symmetric solution u_i(t) = e^{t/2} (swap acts as identity on it).
  Grid g = Grid::interval(0, 1, 401);
  Mat swap(2, 2);
  swap << 0, 1, 1, 0;
  auto A = KernelOperator::volterra(g, 2, [swap](const Vec&, const Vec&) { return swap; }, 1.0);

  GridFunction lin = GridFunction::sample(g, 2, [](const Vec& t) {
    Vec v(2);
    v << 1.0, t[0];
    return v;
  });
  GridFunction swapped = A.apply(lin);  // (int s ds, int 1 ds) = (t^2/2, t)
  for (int k = 0; k < g.node_count(); k += 40) {
    double t = g.coord(k)[0];
    CHECK(swapped.at(k)[0] == doctest::Approx(t * t / 2).epsilon(1e-6));
    CHECK(swapped.at(k)[1] == doctest::Approx(t).epsilon(1e-10));
  }

  auto ev = [](const Vec&, const Vec& x) {
    return CompactSet::singleton(Vec(0.5 * x + Vec::Ones(2)));
  };
  MultiMap F(ev, GridFunction::constant(g, 0.5), 1, 2);
  auto res = solve_volterra(A, F, GridFunction(g, 2), 1e-12, 200);
  CHECK(res.solution.converged);
  double err = 0.0;
  for (int k = 0; k < g.node_count(); k += 40) {
    double want = std::exp(0.5 * g.coord(k)[0]);
    err = std::max(err, std::abs(res.solution.u.at(k)[0] - want));
    err = std::max(err, std::abs(res.solution.u.at(k)[1] - want));
  }
  CHECK(err <= 1e-2);
  CHECK(res.bounds.satisfied);
}

TEST_CASE("constant-modulus bound specializes the general one") {
  Grid g = Grid::interval(0, 1, 401);
  double L = 1.0, M = 0.5;
  GridFunction rho = GridFunction::sample_scalar(g, [](double t) { return 1.0 + 0.3 * t; });

  GridFunction m = cumulative_integral(GridFunction::constant(g, M));
  m *= L;
  const double h = g.spacing();
  for (int k = 0; k < g.node_count(); k += 40) {
    double general = 0.0, corollary = 0.0;
    for (int j = 0; j <= k; ++j) {
      double w = (j == 0 || j == k) ? 0.5 * h : h;
      if (k == 0) w = 0.0;
      double tk = g.coord(k)[0], tj = g.coord(j)[0];
      general += w * std::exp(m.scalar_at(k) - m.scalar_at(j)) * rho.scalar_at(j);
      corollary += w * std::exp(L * M * (tk - tj)) * rho.scalar_at(j);
    }
    CHECK(std::abs(L * general - L * corollary) <= 1e-10);
  }
}

TEST_CASE("volterra solver succeeds with a large modulus on a short interval") {
  Grid g = Grid::interval(0, 0.1, 201);
  auto A = builtins::make_volterra("identity", g, 1, 0.0);
  MultiMap F = builtins::affine_singleton(g, 10.0, 1.0);  // M = 10, no contraction
  auto zero = GridFunction::constant(g, 0.0);
  auto res = solve_volterra(A, F, zero, 1e-12, 200);
  CHECK(res.solution.converged);
  double errs = 0.0;
  for (int k = 0; k < g.node_count(); k += 20) {
    double t = g.coord(k)[0];
    errs = std::max(errs, std::abs(res.solution.u.scalar_at(k) - std::exp(10 * t)));
  }
  CHECK(errs <= 1e-3);
  CHECK(res.bounds.satisfied);
}

TEST_CASE("fredholm solver fixed point and trace contraction") {
  Grid g = Grid::interval(0, 1, 501);
  auto A = builtins::make_fredholm_constant(g, 1, 0.25, 1.0);
  MultiMap F = builtins::affine_singleton(g, 1.0, 1.0);  // F(t,x) = {x + 1}
  auto zero = GridFunction::constant(g, 0.0);

  auto res = solve_fredholm(A, F, zero, 1.0, 1e-12, 200);
  CHECK(res.solution.converged);
  CHECK(res.solution.final_defect <= 1e-10);
  for (int k = 0; k < g.node_count(); k += 50)
    CHECK(res.solution.u.scalar_at(k) == doctest::Approx(4.0 / 3.0).epsilon(1e-8));

  // geometric decay with ratio <= factor + 1e-2 after burn-in
  double factor = fredholm_contraction_factor(A, F.modulus(), 1.0);
  const auto& recs = res.solution.trace.records;
  for (std::size_t i = 2; i < recs.size(); ++i) {
    if (recs[i - 1].dv_p < 1e-13) break;
    CHECK(recs[i].dv_p <= (factor + 1e-2) * recs[i - 1].dv_p);
  }

  // nodewise bounds: bound_u = 4/3 exactly matches the observed deviation
  CHECK(res.bounds.satisfied);
  for (int k = 0; k < g.node_count(); k += 50) {
    CHECK(res.bounds.bound_u.scalar_at(k) == doctest::Approx(4.0 / 3.0).epsilon(1e-10));
    CHECK(res.bounds.bound_x.scalar_at(k) == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
  }
}

TEST_CASE("fredholm solver with a feasible start stops immediately") {
  Grid g = Grid::interval(0, 1, 101);
  auto A = builtins::make_fredholm_constant(g, 1, 0.25, 1.0);
  MultiMap F = builtins::affine_singleton(g, 1.0, 1.0);
  auto fixed = GridFunction::constant(g, 4.0 / 3.0);
  auto res = solve_fredholm(A, F, fixed, 1.0, 1e-10, 50);
  CHECK(res.solution.iterations <= 2);
  CHECK(res.bounds.bound_x.sup_norm() <= 1e-9);
}

TEST_CASE("fredholm precondition rejects factor >= 1") {
  Grid g = Grid::interval(0, 1, 101);
  auto A = builtins::make_fredholm_constant(g, 1, 1.5, 1.0);
  MultiMap F = builtins::affine_singleton(g, 1.0, 1.0);
  auto zero = GridFunction::constant(g, 0.0);
  CHECK_THROWS_AS(solve_fredholm(A, F, zero, 1.0, 1e-10, 50), InputError);
}

TEST_CASE("non-convergence raises an error carrying the trace") {
  Grid g = Grid::interval(0, 1, 101);
  auto A = builtins::make_fredholm_constant(g, 1, 0.25, 1.0);
  MultiMap F = builtins::affine_singleton(g, 1.0, 1.0);
  auto zero = GridFunction::constant(g, 0.0);
  try {
    solve_fredholm(A, F, zero, 1.0, 1e-14, 2);
    FAIL("expected SolverDidNotConverge");
  } catch (const SolverDidNotConverge& e) {
    CHECK(e.trace.records.size() == 2);
    CHECK(e.trace.records[1].dv_p < e.trace.records[0].dv_p);
  }
}

TEST_CASE("box solver matches the interval algebra") {
  Grid b = Grid::box({0, 0}, {1, 1}, {21, 21});
  auto A = builtins::make_fredholm_constant(b, 1, 0.25, 1.0);

  MultiMap Fz = builtins::constant_singleton(b, 0.0, 1e-3);
  auto zero = GridFunction::constant(b, 0.0);
  auto rz = solve_box(A, Fz, zero, 1.0, 1e-12, 50);
  CHECK(rz.solution.u.sup_norm() <= 1e-14);

  MultiMap F = builtins::affine_singleton(b, 1.0, 1.0);
  auto res = solve_box(A, F, zero, 1.0, 1e-12, 200);
  CHECK(res.solution.converged);
  for (int k = 0; k < b.node_count(); k += 37)
    CHECK(res.solution.u.scalar_at(k) == doctest::Approx(4.0 / 3.0).epsilon(1e-8));
  CHECK(res.bounds.satisfied);
}

TEST_CASE("degenerate box contraction factor matches the interval one") {
  double eps = 1e-3, c = 0.25;
  Grid gi = Grid::interval(0, 1, 101);
  auto Ai = builtins::make_fredholm_constant(gi, 1, c, 1.0);
  auto Mi = GridFunction::constant(gi, 1.0);
  double fi = fredholm_contraction_factor(Ai, Mi, 1.0);

  Grid gb = Grid::box({0, 0}, {1, eps}, {101, 3});
  auto Ab = builtins::make_fredholm_constant(gb, 1, c / eps, 1.0);
  auto Mb = GridFunction::constant(gb, 1.0);
  double fb = fredholm_contraction_factor(Ab, Mb, 1.0);

  CHECK(std::abs(fi - fb) <= 1e-6);
}

TEST_CASE("perturbation study: bounds, decay, and the zero shift") {
  Grid g = Grid::interval(0, 1, 201);
  auto A = builtins::make_fredholm_constant(g, 1, 0.25, 1.0);
  MultiMap F = builtins::affine_singleton(g, 1.0, 1.0);
  auto zero = GridFunction::constant(g, 0.0);
  auto base = solve_fredholm(A, F, zero, 1.0, 1e-12, 200);

  std::vector<GridFunction> shifts;
  shifts.push_back(GridFunction::constant(g, 0.0));
  for (int k = 1; k <= 8; ++k) shifts.push_back(GridFunction::constant(g, std::pow(0.5, k)));

  auto rows = perturbation_study(A, F, base.solution, shifts, 1.0, 10.0, 1e-12, 200);
  CHECK(rows[0].deviation_sup <= 1e-10);

  double factor = fredholm_contraction_factor(A, F.modulus(), 1.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    // independent recomputation of the bound column
    double expected = A.opnorm() * rows[i].s_norm / (1.0 - factor);
    CHECK(rows[i].bound == doctest::Approx(expected).epsilon(1e-12));
    CHECK(rows[i].deviation_sup <= rows[i].bound + 1e-12);
    if (i >= 2) CHECK(rows[i].deviation_sup <= rows[i - 1].deviation_sup + 1e-14);
  }
  // linear problem: exact linear response in the shift size
  for (std::size_t i = 2; i < rows.size(); ++i)
    CHECK(rows[i].deviation_sup == doctest::Approx(0.5 * rows[i - 1].deviation_sup).epsilon(1e-6));

  CHECK_THROWS_AS(
      perturbation_study(A, F, base.solution, {GridFunction::constant(g, 100.0)}, 1.0, 1.0, 1e-12,
                         200),
      InputError);
}

TEST_CASE("gronwall solution-set bound") {
  Grid g = Grid::interval(0, 1, 1001);
  auto A = builtins::make_volterra("identity", g, 1, 0.0);

  CHECK(solution_set_bound(A, GridFunction::constant(g, 0.0), 1.0) == doctest::Approx(0.0));
  CHECK(solution_set_bound(A, GridFunction::constant(g, 1.0), 0.0) == doctest::Approx(1.0));

  double bound = solution_set_bound(A, GridFunction::constant(g, 1.0), 1.0);
  CHECK(bound == doctest::Approx(1.0 + std::exp(1.0)).epsilon(1e-9));

  // sampled solution of u in {x + 1}: u = e^t, |u|_{L1} = e - 1 <= bound
  MultiMap F = builtins::affine_singleton(g, 1.0, 1.0);
  auto res = solve_volterra(A, F, GridFunction::constant(g, 0.0), 1e-12, 300);
  double l1 = lp_norm(res.solution.u, 1.0);
  CHECK(l1 == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-4));
  CHECK(l1 <= bound);

  CHECK_THROWS_AS(solution_set_bound(A, GridFunction::constant(g, 1.0), -0.5), InputError);
}

TEST_CASE("halving the grid spacing halves the bound slack") {
  auto slack_at = [](int nodes) {
    Grid g = Grid::interval(0, 1, nodes);
    auto A = builtins::make_volterra("identity", g, 1, 0.0);
    MultiMap F = builtins::affine_singleton(g, 0.5, 1.0);
    auto res = solve_volterra(A, F, GridFunction::constant(g, 0.0), 1e-12, 200);
    return res.bounds.slack;
  };
  double s1 = slack_at(251), s2 = slack_at(501);
  CHECK(s2 <= std::max(0.5 * s1 * 1.2, 1e-12));
}

TEST_CASE("multimap lipschitz sampling accepts the corpus and flags a violator") {
  Grid g = Grid::interval(0, 1, 51);
  MultiMap F = builtins::affine_singleton(g, 0.5, 1.0);
  CHECK(F.verify_lipschitz(500, 3).holds);

  // declared modulus 0.1 under a slope-1 map
  auto ev = [](const Vec&, const Vec& x) { return CompactSet::singleton(x); };
  MultiMap bad(ev, GridFunction::constant(g, 0.1), 1, 1);
  CHECK_FALSE(bad.verify_lipschitz(500, 3).holds);
}
