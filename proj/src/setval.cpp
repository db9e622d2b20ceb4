#include "opinc/setval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace opinc {

CompactSet::CompactSet(std::vector<Vec> points, bool convex_hint)
    : points_(std::move(points)), convex_(convex_hint) {
  require(!points_.empty(), "CompactSet: point list must be nonempty");
  dim_ = static_cast<int>(points_.front().size());
  require(dim_ > 0, "CompactSet: points must have positive dimension");
  for (const Vec& p : points_) {
    require(static_cast<int>(p.size()) == dim_, "CompactSet: inconsistent point dimensions");
    require(p.allFinite(), "CompactSet: non-finite coordinate");
  }
}

std::string CompactSet::to_json() const {
  nlohmann::json j;
  j["dim"] = dim_;
  j["convex_hint"] = convex_;
  auto& pts = j["points"] = nlohmann::json::array();
  for (const Vec& p : points_) {
    nlohmann::json row = nlohmann::json::array();
    for (int i = 0; i < p.size(); ++i) row.push_back(p[i]);
    pts.push_back(row);
  }
  return j.dump();
}

CompactSet CompactSet::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  require(j.contains("dim") && j.contains("points"), "CompactSet: missing dim/points");
  int dim = j["dim"].get<int>();
  std::vector<Vec> pts;
  for (const auto& row : j["points"]) {
    Vec p(dim);
    require(static_cast<int>(row.size()) == dim, "CompactSet: point/dim mismatch");
    for (int i = 0; i < dim; ++i) p[i] = row[i].get<double>();
    pts.push_back(std::move(p));
  }
  bool convex = j.value("convex_hint", false);
  return CompactSet(std::move(pts), convex);
}

namespace detail {

// Euclidean projection of w onto the probability simplex (Held et al.).
static void project_simplex(Vec& w) {
  const int m = static_cast<int>(w.size());
  std::vector<double> u(w.data(), w.data() + m);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0, theta = 0.0;
  int rho = 0;
  for (int i = 0; i < m; ++i) {
    css += u[i];
    double t = (css - 1.0) / (i + 1);
    if (u[i] - t > 0) {
      rho = i + 1;
      theta = t;
    }
  }
  if (rho == 0) theta = (css - 1.0) / m;
  for (int i = 0; i < m; ++i) w[i] = std::max(0.0, w[i] - theta);
}

double hull_sqdist(const Vec& y, const std::vector<Vec>& vertices, Vec* weights,
                   double tol, int max_iter) {
  const int m = static_cast<int>(vertices.size());
  const int d = static_cast<int>(y.size());
  if (m == 1) {
    if (weights) *weights = Vec::Ones(1);
    return (vertices[0] - y).squaredNorm();
  }
  Mat P(d, m);
  for (int j = 0; j < m; ++j) P.col(j) = vertices[j];

  // Warm start at the vertex nearest to y.
  int best = 0;
  double bestd = (vertices[0] - y).squaredNorm();
  for (int j = 1; j < m; ++j) {
    double dj = (vertices[j] - y).squaredNorm();
    if (dj < bestd) {
      bestd = dj;
      best = j;
    }
  }
  Vec w = Vec::Zero(m);
  w[best] = 1.0;

  // FISTA on g(w) = |Pw - y|^2 over the simplex; step from a gradient
  // Lipschitz bound. The Frank-Wolfe gap at the feasible iterate
  // certifies g(w) - g* <= gap.
  const double lip = 2.0 * P.squaredNorm() + 1e-30;
  const double scale = std::max(1.0, bestd);
  Vec v = w, w_prev = w;
  double t_acc = 1.0;
  bool certified = false;
  for (int it = 0; it < max_iter; ++it) {
    Vec g = 2.0 * (P.transpose() * (P * w - y));
    double gap = g.dot(w) - g.minCoeff();
    if (gap <= tol * scale) {
      certified = true;
      break;
    }
    w_prev = w;
    w = v - (2.0 / lip) * (P.transpose() * (P * v - y));
    project_simplex(w);
    // Monotone safeguard: restart momentum if the step did not descend.
    if ((P * w - y).squaredNorm() > (P * w_prev - y).squaredNorm()) {
      w = w_prev - (2.0 / lip) * (P.transpose() * (P * w_prev - y));
      project_simplex(w);
      v = w;
      t_acc = 1.0;
      continue;
    }
    double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_acc * t_acc));
    v = w + ((t_acc - 1.0) / t_next) * (w - w_prev);
    t_acc = t_next;
  }
  if (!certified) {
    Vec g = 2.0 * (P.transpose() * (P * w - y));
    if (g.dot(w) - g.minCoeff() > 1e-6 * scale)
      throw ConvergenceError("hull projection: duality gap not certified within iteration cap");
  }
  if (weights) *weights = w;
  return (P * w - y).squaredNorm();
}

}  // namespace detail

SetDistanceResult dist_to_set(const Vec& y, const CompactSet& A) {
  require(static_cast<int>(y.size()) == A.dim(), "dist_to_set: dimension mismatch");
  SetDistanceResult res;
  if (!A.convex_hint() || A.size() == 1) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t idx = 0;
    for (std::size_t i = 0; i < A.size(); ++i) {
      double d = (A.points()[i] - y).norm();
      if (d < best) {  // strict: ties keep the lowest index
        best = d;
        idx = i;
      }
    }
    res.distance = best;
    res.nearest = A.points()[idx];
    res.index = idx;
    return res;
  }
  Vec w;
  double sq = detail::hull_sqdist(y, A.points(), &w);
  Mat P(A.dim(), static_cast<int>(A.size()));
  for (std::size_t j = 0; j < A.size(); ++j) P.col(static_cast<int>(j)) = A.points()[j];
  res.distance = std::sqrt(std::max(0.0, sq));
  res.nearest = P * w;
  int heaviest = 0;
  w.maxCoeff(&heaviest);
  res.index = static_cast<std::size_t>(heaviest);
  return res;
}

double hausdorff(const CompactSet& A, const CompactSet& B) {
  require(A.dim() == B.dim(), "hausdorff: dimension mismatch");
  double ab = 0.0;
  for (const Vec& a : A.points()) ab = std::max(ab, dist_to_set(a, B).distance);
  double ba = 0.0;
  for (const Vec& b : B.points()) ba = std::max(ba, dist_to_set(b, A).distance);
  return std::max(ab, ba);
}

CompactSet minkowski_shift(const CompactSet& A, const Vec& v) {
  require(static_cast<int>(v.size()) == A.dim(), "minkowski_shift: dimension mismatch");
  std::vector<Vec> pts;
  pts.reserve(A.size());
  for (const Vec& p : A.points()) pts.push_back(p + v);
  return CompactSet(std::move(pts), A.convex_hint());
}

}  // namespace opinc
