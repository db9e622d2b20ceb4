#include "opinc/second_order.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace opinc {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kClampFactor = 64.0;
constexpr double kAbsNoiseCap = 1e-10;
constexpr double kRelNoiseCap = 1e-11;

double eval_checked(const ScalarField& f, const Vec& p) {
  double v = f.eval(p);
  if (!std::isfinite(v)) {
    std::ostringstream msg;
    msg << "second-order probe produced non-finite value at [";
    for (int i = 0; i < p.size(); ++i) msg << (i ? "," : "") << p[i];
    msg << "]";
    throw EvaluationError(msg.str());
  }
  return v;
}

struct QuotientSample {
  double q = 0.0;
  double noise = 0.0;
  bool valid = false;
};

QuotientSample make_sample(double fa, double fb, double fc, double denom) {
  QuotientSample s;
  double num = fa - 2.0 * fb + fc;
  double fmax = std::max({std::abs(fa), std::abs(fb), std::abs(fc)});
  double floor = kClampFactor * kEps * fmax;
  if (std::abs(num) < floor) num = 0.0;
  s.q = num / denom;
  s.noise = floor / denom;
  s.valid = s.noise <= std::max(kAbsNoiseCap, kRelNoiseCap * std::abs(s.q));
  return s;
}

// limsup (want_max) / liminf surrogate: extremum over the later half of
// the schedule, restricted to samples clear of the cancellation floor.
double tail_extremum(const std::vector<QuotientSample>& samples, bool want_max,
                     double* spread = nullptr) {
  std::vector<double> vals;
  for (const auto& s : samples)
    if (s.valid) vals.push_back(s.q);
  if (vals.empty())
    for (const auto& s : samples) vals.push_back(s.q);
  std::size_t tail = (vals.size() + 1) / 2;
  double ext = want_max ? -std::numeric_limits<double>::infinity()
                        : std::numeric_limits<double>::infinity();
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = vals.size() - tail; i < vals.size(); ++i) {
    ext = want_max ? std::max(ext, vals[i]) : std::min(ext, vals[i]);
    lo = std::min(lo, vals[i]);
    hi = std::max(hi, vals[i]);
  }
  if (spread) *spread = hi - lo;
  return ext;
}

std::vector<double> lambdas(const Schedule& s) {
  require(s.lambda0 > 0 && s.q > 0 && s.q < 1, "Schedule: need lambda0 > 0, 0 < q < 1");
  require(s.steps >= 8, "Schedule: need at least 8 steps");
  std::vector<double> out(s.steps);
  double l = s.lambda0;
  for (int k = 0; k < s.steps; ++k, l *= s.q) out[k] = l;
  return out;
}

double directional_tail(const ScalarField& f, const Vec& x0, const Vec& z, const Vec& x,
                        const Schedule& sched, bool symmetric, bool want_max,
                        double* spread = nullptr) {
  std::vector<QuotientSample> samples;
  for (double l : lambdas(sched)) {
    double fa, fb, fc;
    if (symmetric) {
      fa = eval_checked(f, x0 + l * x);
      fb = eval_checked(f, x0);
      fc = eval_checked(f, x0 - l * x);
    } else {
      fa = eval_checked(f, x0 + l * z + 2.0 * l * x);
      fb = eval_checked(f, x0 + l * z + l * x);
      fc = eval_checked(f, x0 + l * z);
    }
    samples.push_back(make_sample(fa, fb, fc, l * l));
  }
  return tail_extremum(samples, want_max, spread);
}

std::vector<Vec> z_pool(const Vec& x, int z_samples, std::uint64_t seed,
                        const std::vector<Vec>& hints) {
  std::vector<Vec> pool;
  pool.push_back(Vec::Zero(x.size()));
  pool.push_back(-x);
  pool.push_back(-2.0 * x);
  for (const Vec& h : hints) pool.push_back(h);
  auto rng = substream(seed, "second-order-z");
  const double base = std::max(x.norm(), 1.0);
  const double scales[3] = {0.5, 1.0, 2.0};
  for (int i = 0; i < z_samples; ++i)
    pool.push_back(gaussian_vec(rng, static_cast<int>(x.size()), base * scales[i % 3]));
  return pool;
}

}  // namespace

SecondOrderEstimate estimate_second(Kind2 kind, const ScalarField& f, const Vec& x0, const Vec& x,
                                    const Schedule& sched, int z_samples, std::uint64_t seed,
                                    const std::vector<Vec>& z_hints) {
  require(static_cast<int>(x0.size()) == f.dim && x.size() == x0.size(),
          "estimate_second: dimension mismatch");
  require(kind != Kind2::Mixed, "estimate_second: use estimate_mixed for the mixed kind");
  SecondOrderEstimate est;
  est.kind = kind;
  est.schedule = sched;
  est.z_samples = z_samples;

  const Vec zero = Vec::Zero(x.size());
  switch (kind) {
    case Kind2::F2PlusPoint:
      est.value = directional_tail(f, x0, zero, x, sched, false, true);
      break;
    case Kind2::F2MinusPoint:
      est.value = directional_tail(f, x0, zero, x, sched, false, false);
      break;
    case Kind2::Sym2Plus:
      est.value = directional_tail(f, x0, zero, x, sched, true, true);
      break;
    case Kind2::Sym2Minus:
      est.value = directional_tail(f, x0, zero, x, sched, true, false);
      break;
    case Kind2::F2PlusLocal:
    case Kind2::F2MinusLocal: {
      const bool want_max = (kind == Kind2::F2PlusLocal);
      double best = want_max ? -std::numeric_limits<double>::infinity()
                             : std::numeric_limits<double>::infinity();
      for (const Vec& z : z_pool(x, z_samples, seed, z_hints)) {
        double v = directional_tail(f, x0, z, x, sched, false, want_max);
        if ((want_max && v > best) || (!want_max && v < best)) {
          best = v;
          est.attained_z = z;
        }
      }
      est.value = best;
      break;
    }
    default:
      break;
  }
  return est;
}

SecondOrderEstimate estimate_mixed(const ScalarField& f, const Vec& x0, const Vec& x1,
                                   const Vec& x2, const Schedule& sched, int z_samples,
                                   std::uint64_t seed,
                                   const std::vector<std::pair<Vec, Vec>>& z_hints) {
  require(static_cast<int>(x0.size()) == f.dim && x1.size() == x0.size() && x2.size() == x0.size(),
          "estimate_mixed: dimension mismatch");
  SecondOrderEstimate est;
  est.kind = Kind2::Mixed;
  est.schedule = sched;
  est.z_samples = z_samples;

  std::vector<std::pair<Vec, Vec>> pool;
  const Vec zero = Vec::Zero(x0.size());
  const Vec c1[3] = {zero, -x1, -2.0 * x1};
  const Vec c2[3] = {zero, -x2, -2.0 * x2};
  for (const Vec& a : c1)
    for (const Vec& b : c2) pool.emplace_back(a, b);
  for (const auto& h : z_hints) pool.push_back(h);
  auto rng = substream(seed, "second-order-z-mixed");
  const double base = std::max({x1.norm(), x2.norm(), 1.0});
  const double scales[3] = {0.5, 1.0, 2.0};
  for (int i = 0; i < z_samples; ++i) {
    double s = base * scales[i % 3];
    pool.emplace_back(gaussian_vec(rng, f.dim, s), gaussian_vec(rng, f.dim, s));
  }

  const std::vector<double> ls = lambdas(sched);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& [z1, z2] : pool) {
    // Walk anti-diagonals so samples are ordered by decreasing lambda
    // product; tail_extremum then restricts to the small-lambda half of
    // the cancellation-safe entries.
    std::vector<QuotientSample> samples;
    for (std::size_t diag = 0; diag <= 2 * (ls.size() - 1); ++diag) {
      for (std::size_t i = 0; i < ls.size(); ++i) {
        std::size_t j = diag - i;
        if (diag < i || j >= ls.size()) continue;
        double l1 = ls[i], l2 = ls[j];
        Vec base_pt = x0 + l1 * z1 + l2 * z2;
        double fa = eval_checked(f, base_pt + l1 * x1 + l2 * x2);
        double fb1 = eval_checked(f, base_pt + l1 * x1);
        double fb2 = eval_checked(f, base_pt + l2 * x2);
        double fc = eval_checked(f, base_pt);
        double num = fa - fb1 - fb2 + fc;
        double fmax = std::max({std::abs(fa), std::abs(fb1), std::abs(fb2), std::abs(fc)});
        double floor = kClampFactor * kEps * fmax;
        if (std::abs(num) < floor) num = 0.0;
        QuotientSample s;
        s.q = num / (l1 * l2);
        s.noise = floor / (l1 * l2);
        s.valid = s.noise <= std::max(kAbsNoiseCap, kRelNoiseCap * std::abs(s.q));
        samples.push_back(s);
      }
    }
    double v = tail_extremum(samples, true);
    if (v > best) {
      best = v;
      Vec stacked(z1.size() + z2.size());
      stacked << z1, z2;
      est.attained_z = stacked;
    }
  }
  est.value = best;
  return est;
}

BidiffInterval bidiff_interval_1d(const ScalarField& f, double x0, const Schedule& sched,
                                  int z_samples, std::uint64_t seed) {
  require(f.dim == 1, "bidiff_interval_1d: 1-D fields only");
  Vec p0 = Vec::Constant(1, x0);
  Vec plus = Vec::Constant(1, 1.0);
  Vec minus = Vec::Constant(1, -1.0);

  BidiffInterval out;
  double up_p = estimate_second(Kind2::F2PlusLocal, f, p0, plus, sched, z_samples, seed).value;
  double up_m = estimate_second(Kind2::F2PlusLocal, f, p0, minus, sched, z_samples, seed).value;
  double lo_p = estimate_second(Kind2::F2MinusLocal, f, p0, plus, sched, z_samples, seed).value;
  double lo_m = estimate_second(Kind2::F2MinusLocal, f, p0, minus, sched, z_samples, seed).value;
  out.upper = std::min(up_p, up_m);
  out.lower = std::max(lo_p, lo_m);
  out.empty = out.lower > out.upper + 1e-12;

  double pup_p = estimate_second(Kind2::F2PlusPoint, f, p0, plus, sched, 0, seed).value;
  double pup_m = estimate_second(Kind2::F2PlusPoint, f, p0, minus, sched, 0, seed).value;
  double plo_p = estimate_second(Kind2::F2MinusPoint, f, p0, plus, sched, 0, seed).value;
  double plo_m = estimate_second(Kind2::F2MinusPoint, f, p0, minus, sched, 0, seed).value;
  out.point_upper = std::min(pup_p, pup_m);
  out.point_lower = std::max(plo_p, plo_m);
  out.point_empty = out.point_lower > out.point_upper + 1e-12;

  double m11 = estimate_mixed(f, p0, plus, plus, sched, z_samples, seed).value;
  double m1m = estimate_mixed(f, p0, plus, minus, sched, z_samples, seed).value;
  out.mixed_upper = m11;
  out.mixed_lower = -m1m;
  return out;
}

Dist2CheckReport dist2_second_difference_check(const CompactSet& C, int trials,
                                               std::uint64_t seed) {
  require(C.convex_hint(), "dist2_second_difference_check: convex sets only");
  auto rng = substream(seed, "dist2-check");
  const int d = C.dim();

  double scale = 1.0;
  for (const Vec& p : C.points()) scale = std::max(scale, p.norm());

  auto d2 = [&](const Vec& y) {
    Vec w;
    return detail::hull_sqdist(y, C.points(), &w);
  };

  Dist2CheckReport rep;
  rep.trials = trials;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int t = 0; t < trials; ++t) {
    Vec z = gaussian_vec(rng, d, scale);
    Vec x = gaussian_vec(rng, d, scale);
    double xx2 = 2.0 * x.squaredNorm();

    double a = d2(z + 2.0 * x) - 2.0 * d2(z + x) + d2(z);
    rep.max_violation_low = std::max(rep.max_violation_low, -a);
    rep.max_violation_high = std::max(rep.max_violation_high, a - xx2);

    double b = d2(z + x) - 2.0 * d2(z) + d2(z - x);
    rep.max_violation_low = std::max(rep.max_violation_low, -b);
    rep.max_violation_high = std::max(rep.max_violation_high, b - xx2);

    // Base point inside C: random convex combination of the vertices.
    Vec w(static_cast<int>(C.size()));
    for (int i = 0; i < w.size(); ++i) w[i] = unif(rng);
    w /= w.sum();
    Vec zc = Vec::Zero(d);
    for (std::size_t i = 0; i < C.size(); ++i) zc += w[static_cast<int>(i)] * C.points()[i];
    Vec x1 = gaussian_vec(rng, d, scale);
    Vec x2 = gaussian_vec(rng, d, scale);
    double mixed = d2(zc + x1 + x2) - d2(zc + x1) - d2(zc + x2) + d2(zc);
    rep.max_violation_high =
        std::max(rep.max_violation_high, std::abs(mixed) - 4.0 * x1.norm() * x2.norm());
  }
  return rep;
}

RuleCheckReport max_rule_check(const std::vector<ScalarField>& fs, const Vec& x0,
                               const std::vector<Vec>& directions, const Schedule& sched,
                               int z_samples, std::uint64_t seed, double tol, double active_tol) {
  require(!fs.empty(), "max_rule_check: empty function list");
  ScalarField fmax;
  fmax.dim = fs.front().dim;
  std::vector<std::function<double(const Vec&)>> evals;
  for (const auto& fi : fs) evals.push_back(fi.eval);
  fmax.eval = [evals](const Vec& p) {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& e : evals) m = std::max(m, e(p));
    return m;
  };

  std::vector<int> active;
  double fx0 = fmax.eval(x0);
  for (std::size_t i = 0; i < fs.size(); ++i)
    if (fx0 - fs[i].eval(x0) <= active_tol) active.push_back(static_cast<int>(i));

  RuleCheckReport rep;
  rep.worst_gap = -std::numeric_limits<double>::infinity();
  // The rule is stated (and true) for the point quotients; the z-localized
  // upper derivative of a max can exceed the active max (the estimator
  // itself certifies this on pairs of crossing quadratics).
  (void)z_samples;
  for (const Vec& x : directions) {
    double lhs = estimate_second(Kind2::F2PlusPoint, fmax, x0, x, sched, 0, seed).value;
    double rhs = -std::numeric_limits<double>::infinity();
    for (int i : active)
      rhs = std::max(rhs, estimate_second(Kind2::F2PlusPoint, fs[i], x0, x, sched, 0, seed).value);
    rep.rows.push_back({x, lhs, rhs});
    rep.worst_gap = std::max(rep.worst_gap, lhs - rhs);
    if (lhs > rhs + tol) rep.ok = false;
  }
  return rep;
}

RuleCheckReport chain_rule_check(const ScalarField& g, const SmoothMap& phi, const Vec& x0,
                                 const std::vector<Vec>& directions, const Schedule& sched,
                                 double hypothesis_theta, double hypothesis_K,
                                 double hypothesis_delta, std::uint64_t seed, double tol) {
  require(phi.in_dim == static_cast<int>(x0.size()), "chain_rule_check: dimension mismatch");
  Vec y0 = phi.eval(x0);
  Mat J = phi.jacobian(x0);
  require(J.rows() == phi.out_dim && J.cols() == phi.in_dim,
          "chain_rule_check: jacobian shape mismatch");

  RuleCheckReport rep;
  // Sampled strong-bilipschitz hypothesis on g at phi(x0).
  auto rng = substream(seed, "chain-rule-hypothesis");
  for (int t = 0; t < 200; ++t) {
    Vec a = gaussian_vec(rng, phi.out_dim, hypothesis_delta / 3.0);
    Vec b = gaussian_vec(rng, phi.out_dim, hypothesis_delta / 3.0);
    double lhs = std::abs(g.eval(y0 + a) - g.eval(y0 + b));
    double rhs = hypothesis_K * std::pow((a - b).norm(), hypothesis_theta) *
                 std::pow(a.norm() + b.norm(), 2.0 - hypothesis_theta);
    if (lhs > rhs * (1.0 + 1e-8) + 1e-12) rep.hypothesis_ok = false;
  }

  ScalarField comp;
  comp.dim = phi.in_dim;
  comp.eval = [&g, &phi](const Vec& p) { return g.eval(phi.eval(p)); };

  for (const Vec& x : directions) {
    double lhs = estimate_second(Kind2::F2PlusPoint, comp, x0, x, sched, 0, seed).value;
    double rhs = estimate_second(Kind2::F2PlusPoint, g, y0, Vec(J * x), sched, 0, seed).value;
    rep.rows.push_back({x, lhs, rhs});
    rep.worst_gap = std::max(rep.worst_gap, std::abs(lhs - rhs));
    if (std::abs(lhs - rhs) > tol) rep.ok = false;
  }
  return rep;
}

OptimalityReport optimality_test(const ScalarField& f, const Vec& x0,
                                 const std::vector<Vec>& directions, const Schedule& sched) {
  OptimalityReport rep;
  rep.min_f2plus = std::numeric_limits<double>::infinity();
  double alpha = std::numeric_limits<double>::infinity();
  double spread_max = 0.0;
  const Vec zero = Vec::Zero(x0.size());
  for (const Vec& dir : directions) {
    Vec x = dir / dir.norm();
    double plus = directional_tail(f, x0, zero, x, sched, false, true);
    double spread = 0.0;
    double minus = directional_tail(f, x0, zero, x, sched, false, false, &spread);
    rep.min_f2plus = std::min(rep.min_f2plus, plus);
    alpha = std::min(alpha, minus);
    spread_max = std::max(spread_max, spread);
  }
  rep.necessary_holds = rep.min_f2plus >= -1e-8;
  rep.uniformity_spread = spread_max;
  if (alpha > 0 && spread_max <= 0.1 * alpha) rep.sufficient_alpha = alpha;
  return rep;
}

}  // namespace opinc
