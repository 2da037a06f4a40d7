#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "tfk/random.hpp"

namespace tfk {

/// Largest rotation order supported anywhere in the library.
inline constexpr int kMaxOrder = 2;

/// Number of components of an order-l irreducible block.
constexpr int order_dim(int l) { return 2 * l + 1; }

/// Offset of order l inside a packed [l=0 | l=1 | l=2] harmonic vector.
constexpr int order_offset(int l) { return l * l; }

/// A proper rotation of three-dimensional space.
class Rotation {
 public:
  Rotation() : matrix_(Eigen::Matrix3d::Identity()) {}

  /// Throws if `m` is not orthogonal with determinant +1 (tolerance `tol`).
  explicit Rotation(const Eigen::Matrix3d& m, double tol = 1e-9);

  static Rotation identity() { return Rotation(); }
  static Rotation about_axis(const Eigen::Vector3d& axis, double angle);

  const Eigen::Matrix3d& matrix() const { return matrix_; }
  Rotation inverse() const;
  Eigen::Vector3d operator*(const Eigen::Vector3d& v) const { return matrix_ * v; }
  Rotation operator*(const Rotation& other) const;

 private:
  Eigen::Matrix3d matrix_;
};

bool is_proper_rotation(const Eigen::Matrix3d& m, double tol);

/// Orthonormal real spherical harmonics of order l (m = -l..l, no
/// Condon-Shortley phase) at the unit direction u.
///
/// The order-1 block is sqrt(3/4pi) * (y, z, x), so Wigner matrices of order 1
/// are axis permutations of the Cartesian rotation matrix.
Eigen::VectorXd real_spherical_harmonics(int l, const Eigen::Vector3d& u);

/// Unchecked variant used on hot paths: writes all orders 0..lmax packed into
/// `out` (length (lmax+1)^2). `u` must already be unit length.
void spherical_harmonics_packed(int lmax, const Eigen::Vector3d& u, double* out);

/// Real representation matrix D^l(g) with Y_l(g u) = D^l(g) Y_l(u).
Eigen::MatrixXd wigner_matrix(int l, const Rotation& g);

/// Real-basis Clebsch-Gordan coupling tensor for l1 x l2 -> l3.
///
/// Coupling a (order l1) with b (order l2) gives
/// out[m3] = sum_{m1,m2} C(m1, m2, m3) a[m1] b[m2], and
/// out(D1 a, D2 b) = D3 out(a, b).
class CGTensor {
 public:
  CGTensor() = default;
  CGTensor(int l1, int l2, int l3);

  int l1() const { return l1_; }
  int l2() const { return l2_; }
  int l3() const { return l3_; }
  bool is_zero() const { return zero_; }

  double operator()(int m1, int m2, int m3) const {
    return coeffs_[(static_cast<std::size_t>(m1) * order_dim(l2_) + m2) * order_dim(l3_) + m3];
  }
  /// Row-major (m1, m2, m3) coefficients; indices are 0..2l, i.e. m + l.
  const std::vector<double>& coefficients() const { return coeffs_; }

 private:
  friend class CGTable;
  int l1_ = 0;
  int l2_ = 0;
  int l3_ = 0;
  bool zero_ = true;
  std::vector<double> coeffs_;
};

/// True when (l1, l2, l3) satisfies the triangle selection rule.
constexpr bool coupling_allowed(int l1, int l2, int l3) {
  const int lo = l1 > l2 ? l1 - l2 : l2 - l1;
  return l3 >= lo && l3 <= l1 + l2;
}

/// Coupling tensor for (l1, l2, l3), each in 0..2. Tables are solved once on
/// first use and are immutable afterwards. Frobenius norm is 1 for allowed
/// triples; forbidden triples give the zero tensor.
const CGTensor& clebsch_gordan(int l1, int l2, int l3);

/// Haar-uniform proper rotation, deterministic per seed.
Rotation random_rotation(std::uint64_t seed);
Rotation random_rotation(Rng& rng);

}  // namespace tfk
