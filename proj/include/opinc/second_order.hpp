#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "opinc/setval.hpp"

namespace opinc {

/// Scalar function on R^n with an optional declared mixed-second-difference
/// (2-Lipschitz) constant K: |f(x+a+b)-f(x+a)-f(x+b)+f(x)| <= K|a||b| near
/// the probe point.
struct ScalarField {
  std::function<double(const Vec&)> eval;
  int dim = 1;
  std::optional<double> declared_lipschitz2;
};

/// Geometric lambda schedule lambda0 * q^k, k = 0..steps-1. The limsup /
/// liminf over lambda -> 0 is surrogate-computed on the later (smaller)
/// half of the schedule, restricted to entries whose second-difference
/// numerator stands clear of the floating-point cancellation floor.
struct Schedule {
  double lambda0 = 1e-1;
  double q = 0.5;
  int steps = 16;
};

enum class Kind2 {
  F2PlusLocal,   // sup over z of limsup quotient (f(x0+lz+2lx)-2f(x0+lz+lx)+f(x0+lz))/l^2
  F2MinusLocal,  // inf over z of liminf of the same quotient
  F2PlusPoint,   // limsup of the z = 0 quotient
  F2MinusPoint,  // liminf of the z = 0 quotient
  Sym2Plus,      // limsup of (f(x0+lx)-2f(x0)+f(x0-lx))/l^2
  Sym2Minus,     // liminf of the symmetric quotient
  Mixed,         // sup over (z1,z2) of the two-parameter mixed quotient
};

struct SecondOrderEstimate {
  Kind2 kind = Kind2::F2PlusPoint;
  double value = 0.0;
  Schedule schedule;
  int z_samples = 0;
  std::optional<Vec> attained_z;  // for Mixed: [z1; z2] stacked
};

/// Direction-wise second-order estimate. Sup-type kinds sample z from
/// {0, -x, -2x}, the caller's hints, and seeded Gaussians at three
/// scales; the returned value is a certified lower bound of the true
/// sup (upper bound of the inf for minus kinds) that is exact on fields
/// whose extremal z lies in the hint set.
SecondOrderEstimate estimate_second(Kind2 kind, const ScalarField& f, const Vec& x0, const Vec& x,
                                    const Schedule& sched, int z_samples, std::uint64_t seed,
                                    const std::vector<Vec>& z_hints = {});

/// Two-direction mixed estimate over a (lambda1, lambda2) product schedule.
SecondOrderEstimate estimate_mixed(const ScalarField& f, const Vec& x0, const Vec& x1,
                                   const Vec& x2, const Schedule& sched, int z_samples,
                                   std::uint64_t seed,
                                   const std::vector<std::pair<Vec, Vec>>& z_hints = {});

/// 1-D quadratic-coefficient intervals sandwiched between the lower and
/// upper second derivatives. lower/upper use the z-localized estimates
/// (the bidifferential sense); point_lower/point_upper use the point
/// quotients; mixed_lower/mixed_upper come from the mixed estimator at
/// direction pairs (1,1) and (1,-1).
struct BidiffInterval {
  double lower = 0.0, upper = 0.0;
  bool empty = false;
  double point_lower = 0.0, point_upper = 0.0;
  bool point_empty = false;
  double mixed_lower = 0.0, mixed_upper = 0.0;
};

BidiffInterval bidiff_interval_1d(const ScalarField& f, double x0, const Schedule& sched,
                                  int z_samples, std::uint64_t seed = 1);

/// Squared-distance second-difference checks against a convex polytope:
/// 0 <= d2(z+2x)-2d2(z+x)+d2(z) <= 2|x|^2, the symmetric variant, and
/// |d2(z+x1+x2)-d2(z+x1)-d2(z+x2)+d2(z)| <= 4|x1||x2| for base z in C.
struct Dist2CheckReport {
  double max_violation_low = 0.0;   // worst dip below a zero lower bound
  double max_violation_high = 0.0;  // worst overshoot above an upper bound
  int trials = 0;
};

Dist2CheckReport dist2_second_difference_check(const CompactSet& C, int trials,
                                               std::uint64_t seed = 1);

struct RuleCheckRow {
  Vec direction;
  double lhs = 0.0, rhs = 0.0;
};

struct RuleCheckReport {
  bool ok = true;
  bool hypothesis_ok = true;  // sampled precondition; failure is a warning
  double worst_gap = 0.0;     // max over directions of lhs - rhs (max rule)
                              // or |lhs - rhs| (chain rule)
  std::vector<RuleCheckRow> rows;
};

/// Verifies the upper estimate of max-function second derivatives: the
/// estimate for max_i f_i never exceeds the max over active i of the
/// individual estimates by more than tol, in both the point and the
/// z-localized sense.
RuleCheckReport max_rule_check(const std::vector<ScalarField>& fs, const Vec& x0,
                               const std::vector<Vec>& directions, const Schedule& sched,
                               int z_samples, std::uint64_t seed, double tol = 1e-8,
                               double active_tol = 1e-12);

struct SmoothMap {
  std::function<Vec(const Vec&)> eval;
  std::function<Mat(const Vec&)> jacobian;  // rows: out, cols: in
  int in_dim = 1;
  int out_dim = 1;
};

/// Chain rule for a Frechet-differentiable inner map: the point
/// estimates of (g o phi) at x0 and of g at phi(x0) along phi'(x0)x must
/// agree within tol. The declared strong-bilipschitz hypothesis on g is
/// sample-checked; a failure only flags hypothesis_ok.
RuleCheckReport chain_rule_check(const ScalarField& g, const SmoothMap& phi, const Vec& x0,
                                 const std::vector<Vec>& directions, const Schedule& sched,
                                 double hypothesis_theta, double hypothesis_K,
                                 double hypothesis_delta, std::uint64_t seed, double tol = 1e-6);

struct OptimalityReport {
  bool necessary_holds = false;     // min over directions of point upper quotient >= -1e-8
  double min_f2plus = 0.0;
  std::optional<double> sufficient_alpha;  // min f2minus/|x|^2 when positive and uniform
  double uniformity_spread = 0.0;   // worst lambda-tail spread across directions
};

OptimalityReport optimality_test(const ScalarField& f, const Vec& x0,
                                 const std::vector<Vec>& directions, const Schedule& sched);

}  // namespace opinc
