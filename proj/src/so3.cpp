#include "tfk/so3.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "tfk/error.hpp"

namespace tfk {

namespace {

constexpr double kPi = std::numbers::pi;

const double kY0 = 0.5 / std::sqrt(kPi);
const double kY1 = std::sqrt(3.0 / (4.0 * kPi));
const double kY2a = 0.5 * std::sqrt(15.0 / kPi);
const double kY2b = 0.25 * std::sqrt(5.0 / kPi);

void check_order(int l) {
  if (l < 0 || l > kMaxOrder) {
    fail("unsupported order " + std::to_string(l) + " (supported: 0.." + std::to_string(kMaxOrder) + ")");
  }
}

// Order-2 harmonics as quadratic forms: Y_{2,m}(u) = u^T Q_m u on the sphere.
std::array<Eigen::Matrix3d, 5> order2_forms() {
  std::array<Eigen::Matrix3d, 5> q;
  for (auto& m : q) m.setZero();
  const double h = 0.5 * kY2a;
  q[0](0, 1) = q[0](1, 0) = h;  // xy
  q[1](1, 2) = q[1](2, 1) = h;  // yz
  q[2].diagonal() << -kY2b, -kY2b, 2.0 * kY2b;
  q[3](0, 2) = q[3](2, 0) = h;  // xz
  q[4](0, 0) = h;
  q[4](1, 1) = -h;
  return q;
}

}  // namespace

Rotation::Rotation(const Eigen::Matrix3d& m, double tol) : matrix_(m) {
  if (!is_proper_rotation(m, tol)) fail("matrix is not a proper rotation");
}

Rotation Rotation::about_axis(const Eigen::Vector3d& axis, double angle) {
  return Rotation(Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix());
}

Rotation Rotation::inverse() const {
  Rotation r;
  r.matrix_ = matrix_.transpose();
  return r;
}

Rotation Rotation::operator*(const Rotation& other) const {
  Rotation r;
  r.matrix_ = matrix_ * other.matrix_;
  return r;
}

bool is_proper_rotation(const Eigen::Matrix3d& m, double tol) {
  if (!m.allFinite()) return false;
  const double ortho = (m.transpose() * m - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tol && std::abs(m.determinant() - 1.0) <= tol;
}

void spherical_harmonics_packed(int lmax, const Eigen::Vector3d& u, double* out) {
  const double x = u.x(), y = u.y(), z = u.z();
  out[0] = kY0;
  if (lmax >= 1) {
    out[1] = kY1 * y;
    out[2] = kY1 * z;
    out[3] = kY1 * x;
  }
  if (lmax >= 2) {
    out[4] = kY2a * x * y;
    out[5] = kY2a * y * z;
    out[6] = kY2b * (2.0 * z * z - x * x - y * y);
    out[7] = kY2a * x * z;
    out[8] = 0.5 * kY2a * (x * x - y * y);
  }
}

Eigen::VectorXd real_spherical_harmonics(int l, const Eigen::Vector3d& u) {
  check_order(l);
  if (!u.allFinite() || std::abs(u.norm() - 1.0) > 1e-9) fail("non-unit direction");
  double packed[9];
  spherical_harmonics_packed(l, u, packed);
  return Eigen::Map<const Eigen::VectorXd>(packed + order_offset(l), order_dim(l));
}

Eigen::MatrixXd wigner_matrix(int l, const Rotation& g) {
  check_order(l);
  const Eigen::Matrix3d& r = g.matrix();
  if (l == 0) return Eigen::MatrixXd::Identity(1, 1);
  if (l == 1) {
    // Harmonic order (y, z, x): D = P R P^T.
    Eigen::Matrix3d p;
    p << 0, 1, 0, 0, 0, 1, 1, 0, 0;
    return p * r * p.transpose();
  }
  // Y(Ru)_m = u^T (R^T Q_m R) u; expand R^T Q_m R in the Frobenius-orthogonal
  // basis {Q_m'}.
  static const std::array<Eigen::Matrix3d, 5> q = order2_forms();
  Eigen::MatrixXd d(5, 5);
  for (int m = 0; m < 5; ++m) {
    const Eigen::Matrix3d rotated = r.transpose() * q[m] * r;
    for (int mp = 0; mp < 5; ++mp) {
      d(m, mp) = rotated.cwiseProduct(q[mp]).sum() / q[mp].squaredNorm();
    }
  }
  return d;
}

CGTensor::CGTensor(int l1, int l2, int l3) : l1_(l1), l2_(l2), l3_(l3) {
  coeffs_.assign(static_cast<std::size_t>(order_dim(l1)) * order_dim(l2) * order_dim(l3), 0.0);
}

// Solves sum_{abc} D1[a,i] D2[b,j] D3[c,k] C[a,b,c] = C[i,j,k] for a fixed
// set of rotations; the invariant subspace is one-dimensional when allowed.
class CGTable {
 public:
  CGTable() {
    std::array<Rotation, 6> gs;
    Rng rng = substream(20200615ULL, "clebsch-gordan");
    for (auto& g : gs) g = random_rotation(rng);

    for (int l1 = 0; l1 <= kMaxOrder; ++l1)
      for (int l2 = 0; l2 <= kMaxOrder; ++l2)
        for (int l3 = 0; l3 <= kMaxOrder; ++l3) table_[index(l1, l2, l3)] = solve(l1, l2, l3, gs);
  }

  const CGTensor& get(int l1, int l2, int l3) const { return table_[index(l1, l2, l3)]; }

 private:
  static int index(int l1, int l2, int l3) { return (l1 * 3 + l2) * 3 + l3; }

  static CGTensor solve(int l1, int l2, int l3, const std::array<Rotation, 6>& gs) {
    CGTensor t(l1, l2, l3);
    if (!coupling_allowed(l1, l2, l3)) return t;
    const int d1 = order_dim(l1), d2 = order_dim(l2), d3 = order_dim(l3);
    const int n = d1 * d2 * d3;
    Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(n, n);
    for (const auto& g : gs) {
      const Eigen::MatrixXd w1 = wigner_matrix(l1, g);
      const Eigen::MatrixXd w2 = wigner_matrix(l2, g);
      const Eigen::MatrixXd w3 = wigner_matrix(l3, g);
      Eigen::MatrixXd k(n, n);
      for (int i = 0; i < d1; ++i)
        for (int j = 0; j < d2; ++j)
          for (int kk = 0; kk < d3; ++kk)
            for (int a = 0; a < d1; ++a)
              for (int b = 0; b < d2; ++b)
                for (int c = 0; c < d3; ++c)
                  k((i * d2 + j) * d3 + kk, (a * d2 + b) * d3 + c) = w1(a, i) * w2(b, j) * w3(c, kk);
      k -= Eigen::MatrixXd::Identity(n, n);
      normal.noalias() += k.transpose() * k;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(normal);
    if (eig.info() != Eigen::Success || eig.eigenvalues()(0) > 1e-9) {
      fail("failed to solve coupling tensor for allowed triple");
    }
    Eigen::VectorXd v = eig.eigenvectors().col(0);
    v.normalize();
    for (int i = 0; i < n; ++i) {
      if (std::abs(v(i)) > 1e-8) {
        if (v(i) < 0) v = -v;
        break;
      }
    }
    for (int i = 0; i < n; ++i) t.coeffs_[i] = std::abs(v(i)) < 1e-14 ? 0.0 : v(i);
    t.zero_ = false;
    return t;
  }

  std::array<CGTensor, 27> table_;
};

const CGTensor& clebsch_gordan(int l1, int l2, int l3) {
  check_order(l1);
  check_order(l2);
  check_order(l3);
  static const CGTable table;
  return table.get(l1, l2, l3);
}

Rotation random_rotation(Rng& rng) {
  // Normalized Gaussian quaternion is Haar distributed.
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::Quaterniond q;
  do {
    q = Eigen::Quaterniond(normal(rng), normal(rng), normal(rng), normal(rng));
  } while (q.norm() < 1e-6);
  q.normalize();
  Eigen::Matrix3d m = q.toRotationMatrix();
  // Polish to orthogonality at machine precision.
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  m = svd.matrixU() * svd.matrixV().transpose();
  return Rotation(m);
}

Rotation random_rotation(std::uint64_t seed) {
  Rng rng = substream(seed, "rotation");
  return random_rotation(rng);
}

}  // namespace tfk
