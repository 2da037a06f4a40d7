#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "tfk/so3.hpp"

namespace tfk {

using Positions = std::vector<Eigen::Vector3d>;
using PointSpan = std::span<const Eigen::Vector3d>;

/// Indices of the min(k, N-1) points nearest to points[query], excluding the
/// query itself, sorted by (distance, index).
std::vector<int> k_nearest(PointSpan points, int query, int k);

/// Neighbor lists for every point. Uses a uniform grid when the set is large;
/// results are identical to the exhaustive search.
std::vector<std::vector<int>> k_nearest_all(PointSpan points, int k);

/// Exhaustive reference search, exposed for tests and small systems.
std::vector<int> k_nearest_exhaustive(PointSpan points, int query, int k);

struct RigidTransform {
  Rotation rotation;
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static RigidTransform identity() { return {}; }
  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }
  /// (*this) after `first`: x -> this(first(x)).
  RigidTransform compose(const RigidTransform& first) const;
  RigidTransform inverse() const;
};

inline Eigen::Vector3d apply_transform(const RigidTransform& t, const Eigen::Vector3d& p) { return t.apply(p); }

struct Superposition {
  RigidTransform transform;
  /// Rank-deficient covariance (collinear or coincident points): the
  /// returned transform is a minimizer but not unique.
  bool degenerate = false;
};

/// Least-squares proper rigid transform T minimizing sum_i |T(mobile_i) - target_i|^2.
/// Throws "underdetermined alignment" for fewer than 3 points.
Superposition kabsch_align(PointSpan mobile, PointSpan target);

double rmsd(PointSpan a, PointSpan b);

}  // namespace tfk
