#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "opinc/builtins.hpp"
#include "opinc/multimap.hpp"

using namespace opinc;

TEST_CASE("lp_norm on closed forms") {
  Grid g = Grid::interval(0, 1, 1001);
  auto one = GridFunction::constant(g, 1.0);
  CHECK(lp_norm(one, 1.0) == doctest::Approx(1.0));

  auto zero = GridFunction::constant(g, 0.0);
  for (double p : {1.0, 2.0, 3.5, kInfNorm}) CHECK(lp_norm(zero, p) == doctest::Approx(0.0));

  auto ramp = GridFunction::sample_scalar(g, [](double t) { return t; });
  CHECK(lp_norm(ramp, 2.0) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-6));
  CHECK(lp_norm(ramp, kInfNorm) == doctest::Approx(1.0));

  CHECK_THROWS_AS(lp_norm(ramp, 0.5), InputError);
}

TEST_CASE("lp_norm triangle inequality and homogeneity") {
  Grid g = Grid::interval(0, 2, 101);
  auto rng = substream(3, "gridfn-norm");
  for (int t = 0; t < 300; ++t) {
    GridFunction f(g, 2), h(g, 2);
    for (int k = 0; k < g.node_count(); ++k) {
      f.set(k, gaussian_vec(rng, 2));
      h.set(k, gaussian_vec(rng, 2));
    }
    double p = (t % 3 == 0) ? 1.0 : (t % 3 == 1) ? 2.0 : kInfNorm;
    CHECK(lp_norm(f + h, p) <= lp_norm(f, p) + lp_norm(h, p) + 1e-12);
    double a = -1.7;
    CHECK(lp_norm(a * f, p) == doctest::Approx(std::abs(a) * lp_norm(f, p)).epsilon(1e-12));
  }
}

TEST_CASE("cumulative_integral closed forms") {
  Grid g = Grid::interval(0, 1, 1001);
  auto one = GridFunction::constant(g, 1.0);
  auto c1 = cumulative_integral(one);
  for (int k = 0; k < g.node_count(); k += 100)
    CHECK(c1.scalar_at(k) == doctest::Approx(g.coord(k)[0]).epsilon(1e-12));

  auto lin = GridFunction::sample_scalar(g, [](double t) { return 2 * t; });
  auto c2 = cumulative_integral(lin);
  for (int k = 0; k < g.node_count(); k += 100) {
    double t = g.coord(k)[0];
    CHECK(c2.scalar_at(k) == doctest::Approx(t * t).epsilon(1e-6));
  }
  CHECK(c2.scalar_at(0) == 0.0);

  Grid b = Grid::box({0, 0}, {1, 1}, {5, 5});
  CHECK_THROWS(cumulative_integral(GridFunction::constant(b, 1.0)));
}

TEST_CASE("cumulative_integral of a nonnegative function is nondecreasing") {
  Grid g = Grid::interval(0, 1, 257);
  auto rng = substream(5, "gridfn-cum");
  GridFunction f(g, 1);
  for (int k = 0; k < g.node_count(); ++k)
    f.values()(k, 0) = std::abs(gaussian_vec(rng, 1)[0]);
  auto c = cumulative_integral(f);
  for (int k = 1; k < g.node_count(); ++k)
    CHECK(c.scalar_at(k) >= c.scalar_at(k - 1) - 1e-15);
}

TEST_CASE("L1 norm equals the last node of the cumulative integral of |f|") {
  Grid g = Grid::interval(-1, 3, 313);
  auto rng = substream(6, "gridfn-l1");
  GridFunction f(g, 3);
  for (int k = 0; k < g.node_count(); ++k) f.set(k, gaussian_vec(rng, 3));
  auto cum = cumulative_integral(f.magnitude());
  CHECK(lp_norm(f, 1.0) == doctest::Approx(cum.scalar_at(g.node_count() - 1)).epsilon(1e-12));
}

TEST_CASE("box quadrature integrates constants exactly") {
  Grid b = Grid::box({0, 0}, {2, 3}, {21, 31});
  CHECK(integral(GridFunction::constant(b, 1.0)) == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(lp_norm(GridFunction::constant(b, 2.0), 1.0) == doctest::Approx(12.0).epsilon(1e-12));
}

TEST_CASE("defect against a multimap") {
  Grid g = Grid::interval(0, 1, 101);
  MultiMap F = builtins::affine_singleton(g, 1.0, 0.0);  // F(t,x) = {x}

  auto x = GridFunction::sample_scalar(g, [](double t) { return t; });
  auto u = GridFunction::constant(g, 0.0);
  auto rho = defect(u, x, F);
  for (int k = 0; k < g.node_count(); k += 10)
    CHECK(rho.scalar_at(k) == doctest::Approx(g.coord(k)[0]));

  // feasible u has zero defect
  auto rho0 = defect(x, x, F);
  CHECK(rho0.sup_norm() <= 1e-14);

  MultiMap Fz = builtins::constant_singleton(g, 0.0, 1.0);
  auto ones = GridFunction::constant(g, 1.0);
  CHECK(defect(ones, x, Fz).sup_norm() == doctest::Approx(1.0));
}

TEST_CASE("defect propagates evaluator failures with the node index") {
  Grid g = Grid::interval(0, 1, 11);
  auto ev = [](const Vec& t, const Vec& x) -> CompactSet {
    if (t[0] > 0.45 && t[0] < 0.55) throw std::runtime_error("boom");
    return CompactSet::singleton(x);
  };
  MultiMap F(ev, GridFunction::constant(g, 1.0), 1, 1);
  auto u = GridFunction::constant(g, 0.0);
  try {
    defect(u, u, F);
    FAIL("expected EvaluationError");
  } catch (const EvaluationError& e) {
    CHECK(std::string(e.what()).find("node 5") != std::string::npos);
  }
}

TEST_CASE("interpolation reproduces linear functions") {
  Grid g = Grid::interval(0, 1, 11);
  auto f = GridFunction::sample_scalar(g, [](double t) { return 3 * t - 1; });
  for (double t : {0.03, 0.51, 0.97}) {
    CHECK(f.interp(Vec::Constant(1, t))[0] == doctest::Approx(3 * t - 1).epsilon(1e-12));
  }
  Grid b = Grid::box({0, 0}, {1, 1}, {6, 6});
  auto fb = GridFunction::sample(b, 1, [](const Vec& t) {
    return Vec::Constant(1, 2 * t[0] - t[1] + 0.5);
  });
  Vec q(2);
  q << 0.33, 0.71;
  CHECK(fb.interp(q)[0] == doctest::Approx(2 * 0.33 - 0.71 + 0.5).epsilon(1e-12));
}

TEST_CASE("csv round trip") {
  Grid g = Grid::interval(0, 1, 7);
  auto f = GridFunction::sample(g, 2, [](const Vec& t) {
    Vec v(2);
    v << std::sin(t[0]), std::cos(t[0]);
    return v;
  });
  std::stringstream ss;
  f.to_csv(ss);
  auto f2 = GridFunction::from_csv(ss, g);
  CHECK((f - f2).sup_norm() == doctest::Approx(0.0));
}

TEST_CASE("grid invariants are enforced") {
  CHECK_THROWS_AS(Grid::interval(0, 1, 1), InputError);
  CHECK_THROWS_AS(Grid::interval(1, 0, 5), InputError);
  CHECK_THROWS_AS(Grid::box({0}, {1}, {1}), InputError);
  Grid g = Grid::interval(0, 1, 3);
  Mat bad = Mat::Zero(2, 1);
  CHECK_THROWS_AS(GridFunction(g, bad), InputError);
}
