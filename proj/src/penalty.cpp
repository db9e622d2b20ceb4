#include "opinc/penalty.hpp"

#include <algorithm>
#include <cmath>

namespace opinc {

namespace {

double fredholm_type_constant(const KernelOperator& A, double p) {
  if (A.kind() == KernelOperator::Kind::Fredholm) return A.opnorm();
  double span = A.grid().upper() - A.grid().lower();
  double q_exp = (p == 1.0) ? 0.0 : 1.0 - 1.0 / p;  // (T-t0)^{1/q}
  return A.L() * std::pow(span, q_exp);
}

double objective_of_x(const PenaltyProblem& prob, const GridFunction& u, const GridFunction& x) {
  const Grid& g = u.grid();
  require(g.kind() == Grid::Kind::Interval, "PenaltyProblem: interval grids only");
  double acc = prob.phi(x.at(0), x.at(g.node_count() - 1));
  for (int k = 0; k < g.node_count(); ++k)
    acc += g.weight(k) * prob.f(g.coord(k)[0], x.at(k), u.at(k));
  return acc;
}

// Projection of u onto the weighted L_p ball {v : ||v - center||_p <= R}.
// Exact for p = 2 (radial) and p = 1 (soft threshold, weights cancel in
// the optimality system); other p fall back to radial scaling.
GridFunction project_lp_ball(const GridFunction& u, const GridFunction& center, double R,
                             double p) {
  GridFunction d = u - center;
  double norm = lp_norm(d, p);
  if (norm <= R) return u;
  if (p == 1.0) {
    const Grid& g = u.grid();
    auto l1_of = [&](double tau) {
      double acc = 0.0;
      for (int k = 0; k < g.node_count(); ++k) {
        double m = std::max(0.0, d.at(k).norm() - tau);
        acc += g.weight(k) * m;
      }
      return acc;
    };
    double lo = 0.0, hi = 0.0;
    for (int k = 0; k < g.node_count(); ++k) hi = std::max(hi, d.at(k).norm());
    for (int it = 0; it < 64 && hi - lo > 1e-15 * (1.0 + hi); ++it) {
      double mid = 0.5 * (lo + hi);
      if (l1_of(mid) > R)
        lo = mid;
      else
        hi = mid;
    }
    GridFunction out = center;
    for (int k = 0; k < g.node_count(); ++k) {
      double n = d.at(k).norm();
      if (n > hi) out.set(k, center.at(k) + d.at(k) * ((n - hi) / n));
    }
    return out;
  }
  GridFunction out = center;
  out += (R / norm) * d;
  return out;
}

}  // namespace

LipschitzDeclarationReport verify_lipschitz_declarations(const PenaltyProblem& prob,
                                                         double x_center, double x_radius,
                                                         double u_center, double u_radius,
                                                         int probes, std::uint64_t seed) {
  require(prob.A != nullptr, "PenaltyProblem: operator not set");
  const Grid& g = prob.A->grid();
  const int d = prob.A->codim();
  auto rng = substream(seed, "penalty-declarations");
  std::uniform_int_distribution<int> pick(0, g.node_count() - 1);
  auto ball = [&](double center, double radius) {
    Vec v = gaussian_vec(rng, d);
    double n = v.norm();
    std::uniform_real_distribution<double> ur(0.0, radius);
    return Vec(Vec::Constant(d, center) + (n > 0 ? ur(rng) / n : 0.0) * v);
  };

  LipschitzDeclarationReport rep;
  for (int t = 0; t < probes; ++t) {
    int k = pick(rng);
    double tk = g.coord(k)[0];
    Vec x1 = ball(x_center, x_radius), x2 = ball(x_center, x_radius);
    Vec u1 = ball(u_center, u_radius), u2 = ball(u_center, u_radius);
    double df = std::abs(prob.f(tk, x1, u1) - prob.f(tk, x2, u2));
    double bound = prob.k.scalar_at(k) * (x1 - x2).norm() + prob.k1 * (u1 - u2).norm();
    if (df > bound * (1.0 + 1e-8) + 1e-12) rep.f_ok = false;
    if (bound > 1e-14) rep.worst_f_ratio = std::max(rep.worst_f_ratio, df / bound);

    Vec a1 = ball(x_center, x_radius), a2 = ball(x_center, x_radius);
    Vec b1 = ball(x_center, x_radius), b2 = ball(x_center, x_radius);
    double dphi = std::abs(prob.phi(a1, b1) - prob.phi(a2, b2));
    double pbound = prob.k2 * ((a1 - a2).norm() + (b1 - b2).norm());
    if (dphi > pbound * (1.0 + 1e-8) + 1e-12) rep.phi_ok = false;
    if (pbound > 1e-14) rep.worst_phi_ratio = std::max(rep.worst_phi_ratio, dphi / pbound);
  }
  return rep;
}

GridFunction residual_psi(const PenaltyProblem& prob, const GridFunction& u) {
  require(prob.A != nullptr, "PenaltyProblem: operator not set");
  require(u.grid().same_as(prob.A->grid()), "residual_psi: grid mismatch");
  return defect(u, prob.A->apply(u), prob.F);
}

double plain_objective(const PenaltyProblem& prob, const GridFunction& u) {
  require(prob.A != nullptr, "PenaltyProblem: operator not set");
  return objective_of_x(prob, u, prob.A->apply(u));
}

double penalized_objective(const PenaltyProblem& prob, const GridFunction& u) {
  GridFunction x = prob.A->apply(u);
  double base = objective_of_x(prob, u, x);
  GridFunction psi = defect(u, x, prob.F);
  return base + prob.r * lp_norm(psi, prob.p);
}

PenaltyConstants penalty_constants(const PenaltyProblem& prob, double alpha) {
  require(prob.A != nullptr, "PenaltyProblem: operator not set");
  require(prob.A->grid().kind() == Grid::Kind::Interval, "PenaltyProblem: interval grids only");
  require(prob.p >= 1.0, "penalty_constants: p must be >= 1");
  const double p = prob.p;
  const double C = fredholm_type_constant(*prob.A, p);
  const double mp = lp_norm(prob.F.modulus(), p);
  const double factor = C * mp;
  if (factor >= 1.0) throw InputError("penalty_constants: contraction factor >= 1");

  PenaltyConstants out;
  bool p_integer = std::floor(p) == p;
  out.p_tilde = p_integer ? p - 1.0 : p;
  out.beta = C * std::pow(3.0, (2.0 * out.p_tilde + 2.0) / p) * (factor + 1.0) / (1.0 - factor) +
             C + 1.0;

  const Grid& g = prob.A->grid();
  const double span = g.upper() - g.lower();
  double int_k = integral(prob.k);
  double int_k1M = prob.k1 * integral(prob.F.modulus());
  double conj_term = (p == 1.0) ? prob.k1 : prob.k1 * std::pow(span, 1.0 - 1.0 / p);
  out.r0 = C / (1.0 - factor) * (2.0 * prob.k2 + int_k + int_k1M) + conj_term;
  out.trust_radius = alpha / out.beta;
  return out;
}

namespace {

struct Objective {
  const PenaltyProblem& prob;
  long evals = 0;
  double operator()(const GridFunction& u) {
    ++evals;
    return penalized_objective(prob, u);
  }
};

MinimizeResult pattern_search(const PenaltyProblem& prob, const GridFunction& u_init, long budget,
                              const std::optional<TrustRegion>& trust) {
  Objective obj{prob};
  auto clip = [&](const GridFunction& u) {
    return trust ? project_lp_ball(u, trust->center, trust->radius, prob.p) : u;
  };
  GridFunction u = clip(u_init);
  double best = obj(u);
  MinimizeResult res;
  res.trace.push_back(best);

  const int n = u.nodes() * u.codim();
  double step = 0.25;
  const double step_min = 1e-9;
  bool improved_any = false;
  while (obj.evals < budget && step > step_min) {
    bool improved = false;
    for (int j = 0; j < n && obj.evals < budget; ++j) {
      int node = j / u.codim(), comp = j % u.codim();
      for (double sgn : {+1.0, -1.0}) {
        GridFunction cand = u;
        cand.values()(node, comp) += sgn * step;
        cand = clip(cand);
        double v = obj(cand);
        if (v < best - 1e-15) {
          best = v;
          u = cand;
          res.trace.push_back(best);
          improved = true;
          improved_any = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  res.u_opt = u;
  res.J_r = best;
  GridFunction psi = residual_psi(prob, u);
  res.psi_norm = lp_norm(psi, prob.p);
  res.stagnated = !improved_any;
  res.evaluations = obj.evals;
  return res;
}

MinimizeResult subgradient_descent(const PenaltyProblem& prob, const GridFunction& u_init,
                                   long budget, const std::optional<TrustRegion>& trust) {
  require(static_cast<bool>(prob.f_x) && static_cast<bool>(prob.f_u),
          "minimize_penalized: subgradient mode needs declared partials f_x, f_u");
  require(prob.p == 1.0, "minimize_penalized: subgradient mode is provided for p = 1");
  Objective obj{prob};
  auto clip = [&](const GridFunction& u) {
    return trust ? project_lp_ball(u, trust->center, trust->radius, prob.p) : u;
  };
  const KernelOperator& A = *prob.A;
  const Grid& g = A.grid();

  GridFunction u = clip(u_init);
  double best = obj(u);
  MinimizeResult res;
  res.trace.push_back(best);
  GridFunction u_best = u;

  double step0 = 0.5;
  for (long t = 0; obj.evals < budget; ++t) {
    GridFunction x = A.apply(u);
    GridFunction fx(g, u.codim()), fu(g, u.codim());
    GridFunction sx(g, u.codim()), su(g, u.codim());
    for (int k = 0; k < g.node_count(); ++k) {
      double tk = g.coord(k)[0];
      fx.set(k, prob.f_x(tk, x.at(k), u.at(k)));
      fu.set(k, prob.f_u(tk, x.at(k), u.at(k)));
      CompactSet set = prob.F(g.coord(k), x.at(k));
      SetDistanceResult dr = dist_to_set(u.at(k), set);
      Vec du = Vec::Zero(u.codim());
      if (dr.distance > 1e-14) du = (u.at(k) - dr.nearest) / dr.distance;
      su.set(k, du);
      // psi state sensitivity by central differences per component
      Vec dx = Vec::Zero(u.codim());
      const double hfd = 1e-6;
      for (int c = 0; c < u.codim(); ++c) {
        Vec xp = x.at(k), xm = x.at(k);
        xp[c] += hfd;
        xm[c] -= hfd;
        double dp = dist_to_set(u.at(k), prob.F(g.coord(k), xp)).distance;
        double dm = dist_to_set(u.at(k), prob.F(g.coord(k), xm)).distance;
        dx[c] = (dp - dm) / (2.0 * hfd);
      }
      sx.set(k, dx);
    }
    GridFunction grad = fu + A.adjoint_apply(fx);
    GridFunction pen = su + A.adjoint_apply(sx);
    grad += prob.r * pen;

    double gn = 0.0;
    for (int k = 0; k < g.node_count(); ++k) gn += g.weight(k) * grad.at(k).squaredNorm();
    gn = std::sqrt(gn);
    if (gn < 1e-14) break;
    double step = step0 / std::sqrt(static_cast<double>(t + 1));
    GridFunction cand = u;
    cand += (-step / gn) * grad;
    cand = clip(cand);
    double v = obj(cand);
    u = cand;
    if (v < best - 1e-15) {
      best = v;
      u_best = cand;
      res.trace.push_back(best);
    }
  }
  res.u_opt = u_best;
  res.J_r = best;
  res.psi_norm = lp_norm(residual_psi(prob, u_best), prob.p);
  res.stagnated = res.trace.size() <= 1;
  res.evaluations = obj.evals;
  return res;
}

MinimizeResult coordinate_proximal(const PenaltyProblem& prob, const GridFunction& u_init,
                                   long budget, const std::optional<TrustRegion>& trust) {
  Objective obj{prob};
  auto clip = [&](const GridFunction& u) {
    return trust ? project_lp_ball(u, trust->center, trust->radius, prob.p) : u;
  };
  GridFunction u = clip(u_init);
  double best = obj(u);
  MinimizeResult res;
  res.trace.push_back(best);
  const int n = u.nodes() * u.codim();
  double radius = 1.0;
  bool improved_any = false;
  while (obj.evals + 40 < budget && radius > 1e-10) {
    bool improved = false;
    for (int j = 0; j < n && obj.evals + 40 < budget; ++j) {
      int node = j / u.codim(), comp = j % u.codim();
      // golden-section on [c - radius, c + radius]
      const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
      double a = u.values()(node, comp) - radius, b = u.values()(node, comp) + radius;
      auto eval_at = [&](double v) {
        GridFunction cand = u;
        cand.values()(node, comp) = v;
        cand = clip(cand);
        return obj(cand);
      };
      double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
      double f1 = eval_at(x1), f2 = eval_at(x2);
      for (int it = 0; it < 30; ++it) {
        if (f1 < f2) {
          b = x2;
          x2 = x1;
          f2 = f1;
          x1 = b - gr * (b - a);
          f1 = eval_at(x1);
        } else {
          a = x1;
          x1 = x2;
          f1 = f2;
          x2 = a + gr * (b - a);
          f2 = eval_at(x2);
        }
      }
      double vstar = 0.5 * (a + b);
      GridFunction cand = u;
      cand.values()(node, comp) = vstar;
      cand = clip(cand);
      double v = obj(cand);
      if (v < best - 1e-15) {
        best = v;
        u = cand;
        res.trace.push_back(best);
        improved = true;
        improved_any = true;
      }
    }
    if (!improved) radius *= 0.25;
  }
  res.u_opt = u;
  res.J_r = best;
  res.psi_norm = lp_norm(residual_psi(prob, u), prob.p);
  res.stagnated = !improved_any;
  res.evaluations = obj.evals;
  return res;
}

}  // namespace

MinimizeResult minimize_penalized(const PenaltyProblem& prob, const GridFunction& u_init,
                                  long budget, MinimizeMethod method,
                                  const std::optional<TrustRegion>& trust, std::uint64_t seed) {
  require(prob.A != nullptr, "PenaltyProblem: operator not set");
  require(budget >= 1, "minimize_penalized: budget must be positive");
  (void)seed;
  switch (method) {
    case MinimizeMethod::Subgradient:
      return subgradient_descent(prob, u_init, budget, trust);
    case MinimizeMethod::CoordinateProximal:
      return coordinate_proximal(prob, u_init, budget, trust);
    case MinimizeMethod::PatternSearch:
    default:
      return pattern_search(prob, u_init, budget, trust);
  }
}

ExactnessReport exactness_check(const PenaltyProblem& prob, const GridFunction& u_bar,
                                const std::vector<double>& r_grid, double alpha, long budget,
                                double tol, std::uint64_t seed) {
  GridFunction psi_bar = residual_psi(prob, u_bar);
  require(psi_bar.sup_norm() <= 1e-9, "exactness_check: u_bar must be feasible");

  ExactnessReport rep;
  rep.constants = penalty_constants(prob, alpha);
  const double J_bar = plain_objective(prob, u_bar);

  auto rng = substream(seed, "exactness-starts");
  for (double r : r_grid) {
    PenaltyProblem pr = prob;
    pr.r = r;
    TrustRegion trust{u_bar, rep.constants.trust_radius};

    MinimizeResult best;
    best.J_r = std::numeric_limits<double>::infinity();
    for (int start = 0; start < 2; ++start) {
      GridFunction u0 = u_bar;
      if (start > 0) {
        for (int k = 0; k < u0.nodes(); ++k)
          u0.set(k, u0.at(k) + gaussian_vec(rng, u0.codim(), 0.05 * rep.constants.trust_radius));
      }
      MinimizeResult m = minimize_penalized(pr, u0, budget, MinimizeMethod::PatternSearch, trust);
      if (m.J_r < best.J_r) best = std::move(m);
    }

    ExactnessRow row;
    row.r = r;
    row.J_r = best.J_r;
    row.psi_norm = best.psi_norm;
    row.feasible = best.psi_norm <= tol;
    row.preserves_optimum = best.J_r >= J_bar - tol;
    rep.rows.push_back(row);
  }
  return rep;
}

std::optional<double> empirical_beta_scan(const PenaltyProblem& prob, const GridFunction& u_bar,
                                          double r, double alpha,
                                          const std::vector<double>& candidates, long budget,
                                          double tol, std::uint64_t seed) {
  GridFunction psi_bar = residual_psi(prob, u_bar);
  require(psi_bar.sup_norm() <= 1e-9, "empirical_beta_scan: u_bar must be feasible");
  const double J_bar = plain_objective(prob, u_bar);
  auto rng = substream(seed, "empirical-beta");

  PenaltyProblem pr = prob;
  pr.r = r;
  for (double beta : candidates) {
    require(beta > 0, "empirical_beta_scan: candidates must be positive");
    TrustRegion trust{u_bar, alpha / beta};
    bool ok = true;
    for (int start = 0; start < 2 && ok; ++start) {
      GridFunction u0 = u_bar;
      if (start > 0)
        for (int k = 0; k < u0.nodes(); ++k)
          u0.set(k, u0.at(k) + gaussian_vec(rng, u0.codim(), 0.05 * trust.radius));
      MinimizeResult m = minimize_penalized(pr, u0, budget, MinimizeMethod::PatternSearch, trust);
      ok = m.psi_norm <= tol && m.J_r >= J_bar - tol;
    }
    if (ok) return beta;
  }
  return std::nullopt;
}

CertificateReport certificate_check(const PenaltyProblem& prob, const GridFunction& u_bar,
                                    const Certificate& cert, int probes, std::uint64_t seed) {
  require(prob.A != nullptr, "PenaltyProblem: operator not set");
  const KernelOperator& A = *prob.A;
  const Grid& g = A.grid();
  require(cert.v_star.grid().same_as(g) && cert.u_star.grid().same_as(g),
          "certificate_check: certificate grids must match the problem");
  GridFunction x_bar = A.apply(u_bar);

  auto rng = substream(seed, "certificate-check");
  const int d = u_bar.codim();

  // Sampled midpoint convexity of f(t,.,.) and phi.
  std::uniform_int_distribution<int> pick(0, g.node_count() - 1);
  for (int t = 0; t < 200; ++t) {
    int k = pick(rng);
    double tk = g.coord(k)[0];
    Vec xa = gaussian_vec(rng, d), ua = gaussian_vec(rng, d);
    Vec xb = gaussian_vec(rng, d), ub = gaussian_vec(rng, d);
    double mid = prob.f(tk, 0.5 * (xa + xb), 0.5 * (ua + ub));
    double avg = 0.5 * (prob.f(tk, xa, ua) + prob.f(tk, xb, ub));
    if (mid > avg + 1e-9) throw InputError("certificate_check: integrand fails convexity sampling");
    Vec ea = gaussian_vec(rng, d), eb = gaussian_vec(rng, d);
    Vec ea2 = gaussian_vec(rng, d), eb2 = gaussian_vec(rng, d);
    double pmid = prob.phi(0.5 * (ea + ea2), 0.5 * (eb + eb2));
    double pavg = 0.5 * (prob.phi(ea, eb) + prob.phi(ea2, eb2));
    if (pmid > pavg + 1e-9) throw InputError("certificate_check: endpoint cost fails convexity sampling");
  }

  CertificateReport rep;
  const double scales[3] = {0.03, 0.3, 1.0};
  for (int k = 0; k < g.node_count(); ++k) {
    double tk = g.coord(k)[0];
    double f0 = prob.f(tk, x_bar.at(k), u_bar.at(k));
    bool node_bad = false;
    for (int t = 0; t < probes; ++t) {
      double s = scales[t % 3];
      Vec dx = gaussian_vec(rng, d, s), du = gaussian_vec(rng, d, s);
      double lhs = prob.f(tk, x_bar.at(k) + dx, u_bar.at(k) + du) - f0;
      double rhs = cert.u_star.at(k).dot(dx) - cert.v_star.at(k).dot(du);
      double margin = lhs - rhs;
      rep.worst_f_margin = std::min(rep.worst_f_margin, margin);
      if (margin < -1e-9) {
        rep.subgrad_f_ok = false;
        node_bad = true;
      }
    }
    if (node_bad) rep.violating_nodes.push_back(k);
  }

  double phi0 = prob.phi(x_bar.at(0), x_bar.at(g.node_count() - 1));
  for (int t = 0; t < probes; ++t) {
    double s = scales[t % 3];
    Vec d1 = gaussian_vec(rng, d, s), d2 = gaussian_vec(rng, d, s);
    double lhs = prob.phi(x_bar.at(0) + d1, x_bar.at(g.node_count() - 1) + d2) - phi0;
    double rhs = -cert.c1.dot(d1) - cert.c2.dot(d2);
    double margin = lhs - rhs;
    rep.worst_phi_margin = std::min(rep.worst_phi_margin, margin);
    if (margin < -1e-9) rep.subgrad_phi_ok = false;
  }

  // Stationarity on the hat basis: the functional is linear in u, so the
  // node/component basis is a complete check on the grid.
  GridFunction diff = cert.v_star - A.adjoint_apply(cert.u_star);
  const bool endpoint_terms = cert.c1.norm() > 0 || cert.c2.norm() > 0;
  for (int k = 0; k < g.node_count(); ++k) {
    for (int c = 0; c < d; ++c) {
      double gap = g.weight(k) * diff.values()(k, c);
      if (endpoint_terms) {
        GridFunction e(g, d);
        e.values()(k, c) = 1.0;
        GridFunction Ae = A.apply(e);
        gap += Ae.at(0).dot(cert.c1) + Ae.at(g.node_count() - 1).dot(cert.c2);
      }
      rep.stationarity_gap = std::max(rep.stationarity_gap, std::abs(gap));
    }
  }
  return rep;
}

}  // namespace opinc
