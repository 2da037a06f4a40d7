#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "helpers.hpp"
#include "tfk/error.hpp"
#include "tfk/generators.hpp"
#include "tfk/refinement.hpp"
#include "tfk/verification.hpp"

using namespace tfk;

namespace {

AtomSystem chain(std::uint64_t seed, int atoms = 30) {
  ChainSettings cs;
  cs.n_structures = 1;
  cs.atoms_per_structure = atoms;
  cs.seed = seed;
  return generate_chain_structures(cs)[0];
}

RigidTransform random_motion(std::mt19937_64& rng) {
  RigidTransform t;
  t.rotation = Rotation(testing::quaternion_rotation(rng));
  std::uniform_real_distribution<double> u(-10, 10);
  t.translation = Eigen::Vector3d(u(rng), u(rng), u(rng));
  return t;
}

AtomSystem moved(const AtomSystem& s, const RigidTransform& t) {
  AtomSystem out = s;
  for (auto& p : out.positions) p = t.apply(p);
  out.targets.reset();
  return out;
}

AtomSystem jittered(const AtomSystem& s, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sigma);
  AtomSystem out = s;
  for (auto& p : out.positions) p += Eigen::Vector3d(g(rng), g(rng), g(rng));
  return out;
}

// SVD superposition of mobile onto target, independent of the library.
std::pair<Eigen::Matrix3d, Eigen::Vector3d> svd_kabsch(const Positions& mobile, const Positions& target) {
  Eigen::Vector3d cm = Eigen::Vector3d::Zero(), ct = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < mobile.size(); ++i) {
    cm += mobile[i];
    ct += target[i];
  }
  cm /= static_cast<double>(mobile.size());
  ct /= static_cast<double>(mobile.size());
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < mobile.size(); ++i) h += (mobile[i] - cm) * (target[i] - ct).transpose();
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0 ? -1.0 : 1.0;
  const Eigen::Matrix3d r = svd.matrixV() * d * svd.matrixU().transpose();
  return {r, ct - r * cm};
}

Positions oracle_field(const StructurePair& pair, int k) {
  const auto& c = pair.candidate.positions;
  const auto& t = pair.target.positions;
  const int n = static_cast<int>(c.size());
  Positions v(n);
  for (int a = 0; a < n; ++a) {
    std::vector<int> idx;
    for (int j = 0; j < n; ++j)
      if (j != a) idx.push_back(j);
    std::stable_sort(idx.begin(), idx.end(), [&](int x, int y) {
      const double dx = (c[x] - c[a]).squaredNorm(), dy = (c[y] - c[a]).squaredNorm();
      return dx < dy || (dx == dy && x < y);
    });
    idx.resize(std::min<int>(k, n - 1));
    Positions mob, tar;
    for (int j : idx) {
      mob.push_back(t[j]);
      tar.push_back(c[j]);
    }
    const auto [r, s] = svd_kabsch(mob, tar);
    v[a] = c[a] - (r * t[a] + s);
  }
  return v;
}

double max_norm(const Positions& v) {
  double m = 0;
  for (const auto& x : v) m = std::max(m, x.norm());
  return m;
}

double rms(const Positions& v) {
  double s = 0;
  for (const auto& x : v) s += x.squaredNorm();
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

TEST_CASE("identical structures give a zero field") {
  const AtomSystem n = chain(1);
  const RefinementField f = refinement_field({n, n}, 10);
  CHECK(max_norm(f.vectors) < 1e-12);
  CHECK(mean_local_deviation({n, n}, 10) < 1e-12);
}

TEST_CASE("rigid motions are annihilated") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const AtomSystem n = chain(10 + trial);
    const AtomSystem c = moved(n, random_motion(rng));
    CHECK(max_norm(refinement_field({c, n}, 8).vectors) < 1e-8);
  }
}

TEST_CASE("a single displaced atom") {
  const AtomSystem n = chain(4);
  AtomSystem c = n;
  const Eigen::Vector3d d(0.3, -0.2, 0.1);
  c.positions[7] += d;
  const RefinementField f = refinement_field({c, n}, 6);
  // Its own neighborhood is undisturbed, so its vector is exactly the displacement.
  CHECK((f.vectors[7] - d).norm() < 1e-10);
  // Atoms that do not see atom 7 are untouched.
  const auto& p = c.positions;
  for (int a = 0; a < c.size(); ++a) {
    if (a == 7) continue;
    std::vector<std::pair<double, int>> dist;
    for (int j = 0; j < c.size(); ++j)
      if (j != a) dist.push_back({(p[j] - p[a]).squaredNorm(), j});
    std::sort(dist.begin(), dist.end());
    bool sees = false;
    for (int j = 0; j < 6; ++j) sees |= dist[j].second == 7;
    if (!sees) CHECK(f.vectors[a].norm() < 1e-10);
  }
}

TEST_CASE("applying a field") {
  const AtomSystem n = chain(5);
  Positions v(n.size(), Eigen::Vector3d(1, 2, 3));
  const AtomSystem moved_half = apply_refinement(n, v, 0.5);
  for (int i = 0; i < n.size(); ++i) CHECK((moved_half.positions[i] - (n.positions[i] - Eigen::Vector3d(0.5, 1, 1.5))).norm() < 1e-15);
  const AtomSystem same = apply_refinement(n, Positions(n.size(), Eigen::Vector3d::Zero()), 0.5);
  CHECK(same.positions == n.positions);
  CHECK_THROWS_AS(apply_refinement(n, Positions(3), 0.5), Error);
}

TEST_CASE("refinement steps do not increase deviation") {
  const AtomSystem n = chain(6, 40);
  AtomSystem c = jittered(n, 0.3, 7);
  const double d0 = mean_local_deviation({c, n}, 10);
  c = apply_refinement(c, refinement_field({c, n}, 10).vectors, 0.5);
  const double d1 = mean_local_deviation({c, n}, 10);
  c = apply_refinement(c, refinement_field({c, n}, 10).vectors, 0.5);
  const double d2 = mean_local_deviation({c, n}, 10);
  CHECK(d1 <= d0);
  CHECK(d2 <= d1);
}

TEST_CASE("invalid inputs") {
  const AtomSystem n = chain(7, 10);
  AtomSystem short_c = n;
  short_c.positions.pop_back();
  short_c.elements.pop_back();
  short_c.predict_mask.pop_back();
  CHECK_THROWS_WITH_AS(refinement_field({short_c, n}, 5), doctest::Contains("correspondence"), Error);
  CHECK_THROWS_AS(refinement_field({n, n}, 2), Error);
  AtomSystem tiny = make_system("t", {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {"C", "C", "C"});
  CHECK_THROWS_AS(refinement_field({tiny, tiny}, 3), Error);
}

TEST_CASE("dataset construction") {
  ChainSettings cs;
  cs.n_structures = 3;
  cs.atoms_per_structure = 30;
  const auto natives = generate_chain_structures(cs);

  const auto zero = make_refinement_dataset(natives, 0.0, 2, 1, 10);
  REQUIRE(zero.size() == 6);
  for (const auto& ex : zero) CHECK(max_norm(*ex.pair.candidate.targets) < 1e-8);

  const auto a = make_refinement_dataset(natives, 0.5, 2, 1, 10);
  const auto b = make_refinement_dataset(natives, 0.5, 2, 1, 10);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].pair.candidate.positions == b[i].pair.candidate.positions);
    CHECK(a[i].pair.candidate.identifier == natives[i / 2].identifier + "_c" + std::to_string(i % 2));
  }
  // Field magnitude follows the noise: for a rigid-body-free perturbation of
  // isotropic noise sigma, v is close to the noise itself.
  std::vector<double> ratios;
  for (const auto& ex : a) {
    const Positions field = refinement_field(ex.pair, 10).vectors;
    CHECK(field == *ex.pair.candidate.targets);
    ratios.push_back(rms(field) / (0.5 * std::sqrt(3.0)));
  }
  const double mean_ratio = std::accumulate(ratios.begin(), ratios.end(), 0.0) / ratios.size();
  CHECK(std::abs(mean_ratio - 1.0) < 0.25);
}

TEST_CASE("field co-rotates with the candidate") {
  std::mt19937_64 rng(8);
  const AtomSystem n = chain(8);
  const AtomSystem c = jittered(n, 0.4, 9);
  const Positions base = refinement_field({c, n}, 10).vectors;
  for (int trial = 0; trial < 5; ++trial) {
    const RigidTransform g = random_motion(rng);
    const Positions rotated = refinement_field({moved(c, g), n}, 10).vectors;
    for (int i = 0; i < c.size(); ++i) CHECK((rotated[i] - g.rotation * base[i]).norm() < 1e-8);
    // Moving the native instead changes nothing.
    const Positions native_moved = refinement_field({c, moved(n, g)}, 10).vectors;
    for (int i = 0; i < c.size(); ++i) CHECK((native_moved[i] - base[i]).norm() < 1e-8);
  }
}

TEST_CASE("field matches independent oracles") {
  std::mt19937_64 rng(11);
  int pairs = 0;
  for (int k : {3, 5, 10}) {
    for (int trial = 0; trial < 17; ++trial, ++pairs) {
      const AtomSystem n = chain(100 + pairs, 25);
      const AtomSystem c = moved(jittered(n, 0.5, 200 + pairs), random_motion(rng));
      const StructurePair pair{c, n};
      const Positions lib = refinement_field(pair, k).vectors;
      const Positions svd = oracle_field(pair, k);
      const Positions horn = reference_refinement_field(pair, k);
      for (int i = 0; i < c.size(); ++i) {
        CHECK((lib[i] - svd[i]).norm() < 1e-10);
        CHECK((lib[i] - horn[i]).norm() < 1e-10);
      }
    }
  }
  CHECK(pairs >= 50);
}
