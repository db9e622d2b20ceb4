#include "opinc/builtins.hpp"

#include <cmath>

namespace opinc::builtins {

std::string catalog() {
  return
      "kernels:\n"
      "  volterra-identity                K(t,s) = I, L = 1\n"
      "  volterra-constant c              K(t,s) = c I, L = |c|\n"
      "  volterra-exp a                   K(t,s) = e^{a(t-s)} I, L = e^{|a| (T-t0)}\n"
      "  fredholm-constant c p            K(t,s) = c I, opnorm |c| (T-t0)^{1-1/p}\n"
      "  box-fredholm-constant c p        constant kernel on a box domain\n"
      "  table values L [opnorm]          scalar kernel sampled at node pairs\n"
      "multimaps:\n"
      "  affine-singleton a shift         F(t,x) = {a x + shift}\n"
      "  constant-singleton c M           F(t,x) = {c}\n"
      "  ball-around-affine a radius m    F(t,x) = a x + radius B (sampled m-gon)\n"
      "fields:\n"
      "  quadratic A                      f(x) = <A x, x>\n"
      "  example1-signed-square           f(x) = x^2 sign(x)\n"
      "  example3-half-square             f(x) = max(x,0)^2\n"
      "  example2-abs-product             f(x) = |x1 x2|\n"
      "  max-of-quadratics A1..Ak         f(x) = max_i <A_i x, x>\n"
      "  distance-squared-to-polytope V   f(x) = d^2(x, conv V)\n"
      "  table x values                   1-D piecewise-linear sample table\n"
      "oc-problems:\n"
      "  lq n r a b q s                   x+ = a x + b u, cost (q|x|^2 + s|u|^2)/2\n"
      "  logistic-control c b             x+ = c tanh(x) + b u, cost (|x|^2+|u|^2)/2\n";
}

KernelOperator make_volterra(const std::string& name, const Grid& grid, int codim, double param) {
  if (name == "identity")
    return KernelOperator::volterra_scalar(grid, codim, [](double, double) { return 1.0; }, 1.0);
  if (name == "constant")
    return KernelOperator::volterra_scalar(grid, codim, [param](double, double) { return param; },
                                           std::abs(param) + (param == 0.0 ? 1e-12 : 0.0));
  if (name == "exp") {
    double span = grid.upper() - grid.lower();
    double L = std::exp(std::abs(param) * span);
    return KernelOperator::volterra_scalar(
        grid, codim, [param](double t, double s) { return std::exp(param * (t - s)); }, L);
  }
  throw InputError("unknown volterra kernel: " + name);
}

KernelOperator make_fredholm_constant(const Grid& grid, int codim, double c, double p) {
  double measure = grid.volume();
  double opnorm = std::abs(c) * std::pow(measure, 1.0 - 1.0 / p);
  double L = opnorm;
  return KernelOperator::fredholm(
      grid, codim,
      [c, codim](const Vec&, const Vec&) { return c * Mat::Identity(codim, codim); },
      std::max(L, 1e-12), opnorm);
}

namespace {

KernelFn table_kernel(const Grid& grid, const Mat& table) {
  require(grid.kind() == Grid::Kind::Interval, "table kernels: interval grids only");
  require(static_cast<int>(table.rows()) == grid.node_count() &&
              static_cast<int>(table.cols()) == grid.node_count(),
          "table kernels: table must be node_count x node_count");
  double t0 = grid.lower(), h = grid.spacing();
  Mat tbl = table;
  return [t0, h, tbl](const Vec& t, const Vec& s) -> Mat {
    int k = static_cast<int>(std::lround((t[0] - t0) / h));
    int j = static_cast<int>(std::lround((s[0] - t0) / h));
    return Mat::Constant(1, 1, tbl(k, j));
  };
}

}  // namespace

KernelOperator make_volterra_table(const Grid& grid, const Mat& table, double L) {
  return KernelOperator::volterra(grid, 1, table_kernel(grid, table), L);
}

KernelOperator make_fredholm_table(const Grid& grid, const Mat& table, double L, double opnorm) {
  return KernelOperator::fredholm(grid, 1, table_kernel(grid, table), L, opnorm);
}

MultiMap affine_singleton(const Grid& grid, double a, double shift, double m_floor) {
  double M = std::max(std::abs(a), m_floor);
  auto ev = [a, shift](const Vec&, const Vec& x) {
    return CompactSet::singleton(a * x + Vec::Constant(x.size(), shift));
  };
  return MultiMap(ev, GridFunction::constant(grid, M), grid.axes(), 1);
}

MultiMap constant_singleton(const Grid& grid, double c, double M) {
  auto ev = [c](const Vec&, const Vec& x) {
    return CompactSet::singleton(Vec::Constant(x.size(), c));
  };
  return MultiMap(ev, GridFunction::constant(grid, M), grid.axes(), 1);
}

MultiMap ball_around_affine(const Grid& grid, int dim, double a, double radius, int vertices,
                            double m_floor) {
  require(dim >= 1 && vertices >= 2, "ball_around_affine: bad parameters");
  std::vector<Vec> offsets;
  if (dim == 1) {
    offsets.push_back(Vec::Constant(1, -radius));
    offsets.push_back(Vec::Constant(1, radius));
  } else {
    require(dim == 2, "ball_around_affine: dims 1 and 2 supported");
    for (int i = 0; i < vertices; ++i) {
      double ang = 2.0 * M_PI * i / vertices;
      Vec v(2);
      v << radius * std::cos(ang), radius * std::sin(ang);
      offsets.push_back(v);
    }
  }
  double M = std::max(std::abs(a), m_floor);
  auto ev = [a, offsets](const Vec&, const Vec& x) {
    std::vector<Vec> pts;
    pts.reserve(offsets.size());
    for (const Vec& o : offsets) pts.push_back(a * x + o);
    return CompactSet(std::move(pts), true);
  };
  return MultiMap(ev, GridFunction::constant(grid, M), grid.axes(), dim);
}

ScalarField quadratic_field(const Mat& A) {
  ScalarField f;
  f.dim = static_cast<int>(A.rows());
  Mat S = 0.5 * (A + A.transpose());
  f.eval = [S](const Vec& x) { return x.dot(S * x); };
  f.declared_lipschitz2 = 2.0 * S.operatorNorm();
  return f;
}

ScalarField signed_square() {
  ScalarField f;
  f.dim = 1;
  f.eval = [](const Vec& x) { return x[0] >= 0 ? x[0] * x[0] : -x[0] * x[0]; };
  f.declared_lipschitz2 = 6.0;
  return f;
}

ScalarField half_square() {
  ScalarField f;
  f.dim = 1;
  f.eval = [](const Vec& x) {
    double v = std::max(x[0], 0.0);
    return v * v;
  };
  f.declared_lipschitz2 = 6.0;
  return f;
}

ScalarField abs_product() {
  ScalarField f;
  f.dim = 2;
  f.eval = [](const Vec& x) { return std::abs(x[0] * x[1]); };
  return f;
}

ScalarField max_of_quadratics(const std::vector<Mat>& As) {
  require(!As.empty(), "max_of_quadratics: empty list");
  ScalarField f;
  f.dim = static_cast<int>(As.front().rows());
  std::vector<Mat> sym;
  double worst = 0.0;
  for (const Mat& A : As) {
    sym.push_back(0.5 * (A + A.transpose()));
    worst = std::max(worst, 2.0 * sym.back().operatorNorm());
  }
  f.eval = [sym](const Vec& x) {
    double m = -std::numeric_limits<double>::infinity();
    for (const Mat& S : sym) m = std::max(m, x.dot(S * x));
    return m;
  };
  f.declared_lipschitz2 = 3.0 * worst;
  return f;
}

ScalarField distance_squared_to_polytope(const CompactSet& C) {
  require(C.convex_hint(), "distance_squared_to_polytope: convex polytope required");
  ScalarField f;
  f.dim = C.dim();
  CompactSet set = C;
  f.eval = [set](const Vec& x) {
    Vec w;
    return detail::hull_sqdist(x, set.points(), &w);
  };
  f.declared_lipschitz2 = 6.0;
  return f;
}

ScalarField tabulated_field(std::vector<double> xs, std::vector<double> values) {
  require(xs.size() >= 2 && xs.size() == values.size(), "tabulated_field: need matching samples");
  for (std::size_t i = 1; i < xs.size(); ++i)
    require(xs[i] > xs[i - 1], "tabulated_field: abscissae must increase");
  ScalarField f;
  f.dim = 1;
  f.eval = [xs = std::move(xs), values = std::move(values)](const Vec& p) {
    double x = p[0];
    std::size_t hi = 1;
    while (hi + 1 < xs.size() && xs[hi] < x) ++hi;
    double w = (x - xs[hi - 1]) / (xs[hi] - xs[hi - 1]);
    return values[hi - 1] + w * (values[hi] - values[hi - 1]);
  };
  return f;
}

DiscreteOCProblem lq_problem(int state_dim, int control_dim, double a, double b, double q, double s,
                             const Vec& x0, int horizon) {
  DiscreteOCProblem p;
  p.state_dim = state_dim;
  p.control_dim = control_dim;
  p.x0 = x0;
  p.horizon = horizon;
  p.L1 = std::abs(a);
  p.L2 = std::abs(b);
  Mat A = a * Mat::Identity(state_dim, state_dim);
  Mat B = b * Mat::Identity(state_dim, control_dim);
  p.f = [A, B](int, const Vec& x, const Vec& u) { return Vec(A * x + B * u); };
  p.f_x = [A](int, const Vec&, const Vec&) { return A; };
  p.f_u = [B](int, const Vec&, const Vec&) { return B; };
  p.cost = [q, s](int, const Vec& x, const Vec& u) {
    return 0.5 * (q * x.squaredNorm() + s * u.squaredNorm());
  };
  p.cost_x = [q](int, const Vec& x, const Vec&) { return Vec(q * x); };
  p.cost_u = [s](int, const Vec&, const Vec& u) { return Vec(s * u); };
  return make_problem(std::move(p));
}

DiscreteOCProblem logistic_problem(double c, double b, const Vec& x0, int horizon) {
  DiscreteOCProblem p;
  p.state_dim = static_cast<int>(x0.size());
  p.control_dim = p.state_dim;
  p.x0 = x0;
  p.horizon = horizon;
  p.L1 = std::abs(c);
  p.L2 = std::abs(b);
  p.f = [c, b](int, const Vec& x, const Vec& u) {
    Vec out = x;
    for (int i = 0; i < x.size(); ++i) out[i] = c * std::tanh(x[i]) + b * u[i];
    return out;
  };
  p.f_x = [c](int, const Vec& x, const Vec&) {
    Mat J = Mat::Zero(x.size(), x.size());
    for (int i = 0; i < x.size(); ++i) {
      double th = std::tanh(x[i]);
      J(i, i) = c * (1.0 - th * th);
    }
    return J;
  };
  p.f_u = [b](int, const Vec& x, const Vec&) {
    return Mat(b * Mat::Identity(x.size(), x.size()));
  };
  p.cost = [](int, const Vec& x, const Vec& u) {
    return 0.5 * (x.squaredNorm() + u.squaredNorm());
  };
  p.cost_x = [](int, const Vec& x, const Vec&) { return x; };
  p.cost_u = [](int, const Vec&, const Vec& u) { return u; };
  return make_problem(std::move(p));
}

}  // namespace opinc::builtins
