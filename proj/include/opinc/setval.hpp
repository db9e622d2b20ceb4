#pragma once

#include <optional>
#include <string>
#include <vector>

#include "opinc/common.hpp"

namespace opinc {

/// Finite representation of a nonempty compact subset of R^n: a point
/// cloud, or — when convex_hint is set — the convex hull of the listed
/// vertices. Immutable after construction.
class CompactSet {
 public:
  CompactSet(std::vector<Vec> points, bool convex_hint = false);

  static CompactSet singleton(const Vec& p) { return CompactSet({p}, false); }

  int dim() const { return dim_; }
  bool convex_hint() const { return convex_; }
  const std::vector<Vec>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }

  std::string to_json() const;
  static CompactSet from_json(const std::string& text);

 private:
  std::vector<Vec> points_;
  int dim_ = 0;
  bool convex_ = false;
};

struct SetDistanceResult {
  double distance = 0.0;
  Vec nearest;
  std::size_t index = 0;  // attaining vertex; for hulls, the heaviest weight
};

/// d(y, A) = inf{|x - y| : x in A}. Point clouds: exact minimum over the
/// list, ties broken by lowest index. Convex hulls: projection solved on
/// the simplex of vertex weights (accelerated projected gradient,
/// duality-gap certified to hull_tol).
SetDistanceResult dist_to_set(const Vec& y, const CompactSet& A);

/// Hausdorff distance as the max of the one-sided excesses over the
/// listed points, with hull-projection distances whenever the other side
/// carries convex_hint. Exact for cloud/cloud and polytope/polytope
/// pairs; for a hull against a cloud the excess is vertex-restricted.
double hausdorff(const CompactSet& A, const CompactSet& B);

/// Translate every point of A by v; convex_hint preserved.
CompactSet minkowski_shift(const CompactSet& A, const Vec& v);

namespace detail {
// Squared distance from y to conv{P columns} with a duality-gap certificate;
// weights returned when caller needs the projection point.
double hull_sqdist(const Vec& y, const std::vector<Vec>& vertices, Vec* weights,
                   double tol = 1e-12, int max_iter = 10000);
}  // namespace detail

}  // namespace opinc
