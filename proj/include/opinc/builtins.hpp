#pragma once

#include <string>
#include <vector>

#include "opinc/discrete_oc.hpp"
#include "opinc/inclusion.hpp"
#include "opinc/second_order.hpp"

namespace opinc::builtins {

/// Stable catalog of named problem pieces for configs; one line per
/// entry, byte-identical across runs.
std::string catalog();

// -- kernels ---------------------------------------------------------------

/// "identity", "constant" (param c), "exp" (param a: e^{a(t-s)}).
KernelOperator make_volterra(const std::string& name, const Grid& grid, int codim, double param);
/// "constant" (param c); declared opnorm chosen for exponent p.
KernelOperator make_fredholm_constant(const Grid& grid, int codim, double c, double p);
/// Scalar kernel tabulated at node pairs: table(k, j) = K(t_k, s_j).
/// Only the causal triangle is read for the Volterra kind.
KernelOperator make_volterra_table(const Grid& grid, const Mat& table, double L);
KernelOperator make_fredholm_table(const Grid& grid, const Mat& table, double L, double opnorm);

// -- multimaps -------------------------------------------------------------

/// F(t,x) = {a x + shift}: singleton affine map, modulus max(|a|, m_floor).
MultiMap affine_singleton(const Grid& grid, double a, double shift, double m_floor = 1e-6);
/// F(t,x) = {c}: constant singleton with declared modulus M.
MultiMap constant_singleton(const Grid& grid, double c, double M);
/// F(t,x) = a x + radius * (sampled ball polytope), modulus max(|a|, m_floor).
MultiMap ball_around_affine(const Grid& grid, int dim, double a, double radius, int vertices,
                            double m_floor = 1e-6);

// -- scalar fields ---------------------------------------------------------

ScalarField quadratic_field(const Mat& A);
ScalarField signed_square();            // x^2 sign(x), 1-D
ScalarField half_square();              // max(x,0)^2, 1-D
ScalarField abs_product();              // |x1 x2|, 2-D
ScalarField max_of_quadratics(const std::vector<Mat>& As);
ScalarField distance_squared_to_polytope(const CompactSet& C);
/// 1-D piecewise-linear interpolant of (x, value) samples, linearly
/// extrapolated beyond the table ends.
ScalarField tabulated_field(std::vector<double> xs, std::vector<double> values);

// -- discrete control problems ----------------------------------------------

/// Scalar-block LQ: x_{i+1} = a x + b u, cost (q|x|^2 + s|u|^2)/2.
DiscreteOCProblem lq_problem(int state_dim, int control_dim, double a, double b, double q, double s,
                             const Vec& x0, int horizon);
/// Saturating toy: x_{i+1} = c tanh(x) + b u, cost (|x|^2 + |u|^2)/2.
DiscreteOCProblem logistic_problem(double c, double b, const Vec& x0, int horizon);

}  // namespace opinc::builtins
