#include "tfk/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <utility>

#include <Eigen/Dense>

#include "tfk/error.hpp"

namespace tfk {

namespace {

using Candidate = std::pair<double, int>;  // (squared distance, index)

void check_query(PointSpan points, int query, int k) {
  if (points.empty()) fail("empty point set");
  if (query < 0 || query >= static_cast<int>(points.size())) fail("query index out of range");
  if (k < 1) fail("k must be at least 1");
}

// Bounded max-heap keeping the k best candidates by (d2, index).
class KBest {
 public:
  explicit KBest(int k) : k_(k) {}

  void offer(double d2, int index) {
    if (static_cast<int>(heap_.size()) < k_) {
      heap_.emplace(d2, index);
    } else if (Candidate{d2, index} < heap_.top()) {
      heap_.pop();
      heap_.emplace(d2, index);
    }
  }
  bool full() const { return static_cast<int>(heap_.size()) == k_; }
  double worst() const { return heap_.top().first; }

  std::vector<int> sorted() {
    std::vector<Candidate> all;
    all.reserve(heap_.size());
    while (!heap_.empty()) {
      all.push_back(heap_.top());
      heap_.pop();
    }
    std::sort(all.begin(), all.end());
    std::vector<int> out;
    out.reserve(all.size());
    for (const auto& c : all) out.push_back(c.second);
    return out;
  }

 private:
  int k_;
  std::priority_queue<Candidate> heap_;
};

class Grid {
 public:
  Grid(PointSpan points, int k) : points_(points) {
    lo_ = points[0];
    Eigen::Vector3d hi = points[0];
    for (const auto& p : points) {
      lo_ = lo_.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    const Eigen::Vector3d extent = (hi - lo_).cwiseMax(1e-9);
    const double n = static_cast<double>(points.size());
    // About k points per cell at uniform density.
    double h = std::cbrt(extent.prod() * std::max(1, k) / n);
    h = std::max(h, extent.maxCoeff() / 256.0);
    cell_ = h;
    for (int d = 0; d < 3; ++d) dims_[d] = std::max(1, static_cast<int>(std::floor(extent[d] / h)) + 1);
    start_.assign(static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2] + 1, 0);
    std::vector<int> cell_of(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      cell_of[i] = flat(coord(points[i]));
      ++start_[cell_of[i] + 1];
    }
    for (std::size_t c = 1; c < start_.size(); ++c) start_[c] += start_[c - 1];
    members_.resize(points.size());
    std::vector<int> fill(start_.begin(), start_.end() - 1);
    for (std::size_t i = 0; i < points.size(); ++i) members_[fill[cell_of[i]]++] = static_cast<int>(i);
  }

  std::vector<int> query(int q, int k) const {
    const Eigen::Vector3d& p = points_[q];
    const std::array<int, 3> c = coord(p);
    KBest best(k);
    const int max_shell = std::max({dims_[0], dims_[1], dims_[2]});
    for (int s = 0; s <= max_shell; ++s) {
      visit_shell(c, s, [&](int cell) {
        for (int j = start_[cell]; j < start_[cell + 1]; ++j) {
          const int idx = members_[j];
          if (idx == q) continue;
          best.offer((points_[idx] - p).squaredNorm(), idx);
        }
      });
      // Unvisited points are at distance >= s * cell_ from the query.
      const double bound = s * cell_;
      if (best.full() && best.worst() < bound * bound) break;
    }
    return best.sorted();
  }

 private:
  std::array<int, 3> coord(const Eigen::Vector3d& p) const {
    std::array<int, 3> c{};
    for (int d = 0; d < 3; ++d) {
      c[d] = std::clamp(static_cast<int>(std::floor((p[d] - lo_[d]) / cell_)), 0, dims_[d] - 1);
    }
    return c;
  }
  int flat(const std::array<int, 3>& c) const { return (c[0] * dims_[1] + c[1]) * dims_[2] + c[2]; }

  template <typename F>
  void visit_shell(const std::array<int, 3>& c, int s, F&& f) const {
    for (int i = c[0] - s; i <= c[0] + s; ++i) {
      if (i < 0 || i >= dims_[0]) continue;
      const bool face_i = (i == c[0] - s || i == c[0] + s);
      for (int j = c[1] - s; j <= c[1] + s; ++j) {
        if (j < 0 || j >= dims_[1]) continue;
        const bool face_j = face_i || (j == c[1] - s || j == c[1] + s);
        if (face_j) {
          for (int l = c[2] - s; l <= c[2] + s; ++l) {
            if (l >= 0 && l < dims_[2]) f(flat({i, j, l}));
          }
        } else {
          if (c[2] - s >= 0) f(flat({i, j, c[2] - s}));
          if (s > 0 && c[2] + s < dims_[2]) f(flat({i, j, c[2] + s}));
        }
      }
    }
  }

  PointSpan points_;
  Eigen::Vector3d lo_;
  double cell_ = 1.0;
  std::array<int, 3> dims_{};
  std::vector<int> start_;
  std::vector<int> members_;
};

constexpr std::size_t kGridThreshold = 256;

}  // namespace

std::vector<int> k_nearest_exhaustive(PointSpan points, int query, int k) {
  check_query(points, query, k);
  const int n = static_cast<int>(points.size());
  const Eigen::Vector3d& p = points[query];
  std::vector<Candidate> all;
  all.reserve(n - 1);
  for (int i = 0; i < n; ++i) {
    if (i != query) all.emplace_back((points[i] - p).squaredNorm(), i);
  }
  const int keep = std::min<int>(k, n - 1);
  std::partial_sort(all.begin(), all.begin() + keep, all.end());
  std::vector<int> out(keep);
  for (int i = 0; i < keep; ++i) out[i] = all[i].second;
  return out;
}

std::vector<int> k_nearest(PointSpan points, int query, int k) { return k_nearest_exhaustive(points, query, k); }

std::vector<std::vector<int>> k_nearest_all(PointSpan points, int k) {
  if (points.empty()) fail("empty point set");
  if (k < 1) fail("k must be at least 1");
  const int n = static_cast<int>(points.size());
  std::vector<std::vector<int>> out(n);
  if (points.size() < kGridThreshold) {
    for (int i = 0; i < n; ++i) out[i] = k_nearest_exhaustive(points, i, k);
    return out;
  }
  const int keep = std::min(k, n - 1);
  const Grid grid(points, keep);
  for (int i = 0; i < n; ++i) out[i] = grid.query(i, keep);
  return out;
}

RigidTransform RigidTransform::compose(const RigidTransform& first) const {
  RigidTransform t;
  t.rotation = rotation * first.rotation;
  t.translation = rotation * first.translation + translation;
  return t;
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform t;
  t.rotation = rotation.inverse();
  t.translation = -(t.rotation * translation);
  return t;
}

Superposition kabsch_align(PointSpan mobile, PointSpan target) {
  if (mobile.size() != target.size()) fail("alignment requires equally sized point sets");
  if (mobile.size() < 3) fail("underdetermined alignment");
  const double n = static_cast<double>(mobile.size());
  Eigen::Vector3d cm = Eigen::Vector3d::Zero(), ct = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < mobile.size(); ++i) {
    cm += mobile[i];
    ct += target[i];
  }
  cm /= n;
  ct /= n;
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < mobile.size(); ++i) h.noalias() += (mobile[i] - cm) * (target[i] - ct).transpose();

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix3d& u = svd.matrixU();
  const Eigen::Matrix3d& v = svd.matrixV();
  const Eigen::Vector3d s = svd.singularValues();
  Eigen::Vector3d sign(1.0, 1.0, 1.0);
  if ((v * u.transpose()).determinant() < 0.0) sign(2) = -1.0;
  Eigen::Matrix3d r = v * sign.asDiagonal() * u.transpose();
  // Re-orthonormalize to keep det(R) = +1 at machine precision.
  Eigen::JacobiSVD<Eigen::Matrix3d> polish(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  r = polish.matrixU() * polish.matrixV().transpose();

  Superposition out;
  out.transform.rotation = Rotation(r);
  out.transform.translation = ct - r * cm;
  const double scale = s(0);
  out.degenerate = !(scale > 0.0) || s(1) <= 1e-10 * scale;
  return out;
}

double rmsd(PointSpan a, PointSpan b) {
  if (a.size() != b.size()) fail("rmsd requires equally sized point sets");
  if (a.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]).squaredNorm();
  return std::sqrt(sum / static_cast<double>(a.size()));
}

}  // namespace tfk
