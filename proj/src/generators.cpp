#include "tfk/generators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

#include "tfk/error.hpp"
#include "tfk/random.hpp"

namespace tfk {

namespace {

std::string system_id(const char* prefix, int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s_%05d", prefix, i);
  return buf;
}

double mixed_sigma(const LJParams& p, const std::string& a, const std::string& b) {
  return p.sigma * 0.5 * (lj_species(a).sigma_scale + lj_species(b).sigma_scale);
}

}  // namespace

std::vector<AtomSystem> generate_lj_clusters(const LJClusterSettings& s) {
  if (s.atoms_per_system < 2) fail("LJ clusters need at least 2 atoms per system");
  if (s.vocabulary.empty()) fail("empty vocabulary");
  s.params.validate();
  std::vector<AtomSystem> out;
  out.reserve(s.n_systems);
  for (int sys = 0; sys < s.n_systems; ++sys) {
    Rng rng = substream(s.seed, "lj-cluster", static_cast<std::uint64_t>(sys));
    std::uniform_real_distribution<double> coord(0.0, s.box);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(s.vocabulary.size()) - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    AtomSystem system;
    system.identifier = system_id("lj", sys);
    int attempts = 0;
    while (system.size() < s.atoms_per_system) {
      const std::string element = s.vocabulary[pick(rng)];
      bool placed = false;
      for (int a = 0; a < s.max_attempts && !placed; ++a) {
        const Eigen::Vector3d p(coord(rng), coord(rng), coord(rng));
        bool ok = true;
        for (int j = 0; j < system.size() && ok; ++j) {
          const double min_d = s.min_distance_factor * mixed_sigma(s.params, element, system.elements[j]);
          ok = (p - system.positions[j]).squaredNorm() > min_d * min_d;
        }
        if (ok) {
          system.positions.push_back(p);
          system.elements.push_back(element);
          placed = true;
        }
      }
      if (!placed) {
        if (++attempts > 20) fail("rejection sampling failed for system " + std::to_string(sys) + "; enlarge the box");
        system.positions.clear();
        system.elements.clear();
      }
    }
    system.predict_mask.assign(system.positions.size(), 1);
    for (auto& m : system.predict_mask) {
      if (s.solvent_fraction > 0.0 && unit(rng) < s.solvent_fraction) m = 0;
    }
    system.targets = lj_forces(system.positions, system.elements, s.params);
    out.push_back(std::move(system));
  }
  return out;
}

Positions gravity_accelerations(PointSpan x, std::span<const double> masses) {
  if (masses.size() != x.size()) fail("mass count does not match position count");
  Positions a(x.size(), Eigen::Vector3d::Zero());
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (i == j) continue;
      const Eigen::Vector3d d = x[j] - x[i];
      const double r = d.norm();
      if (r <= 1e-9) fail("coincident points " + std::to_string(i) + " and " + std::to_string(j));
      a[i] += masses[j] * d / (r * r * r);
    }
  }
  return a;
}

std::vector<AtomSystem> gravity_toy(int n_systems, int n_points, std::uint64_t seed,
                                    const std::vector<std::string>& vocabulary) {
  if (n_points < 2) fail("gravity toy needs at least 2 points");
  std::vector<AtomSystem> out;
  for (int sys = 0; sys < n_systems; ++sys) {
    Rng rng = substream(seed, "gravity", static_cast<std::uint64_t>(sys));
    std::uniform_real_distribution<double> coord(-1.0, 1.0);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(vocabulary.size()) - 1);
    AtomSystem system;
    system.identifier = system_id("gravity", sys);
    std::vector<double> masses;
    while (system.size() < n_points) {
      const Eigen::Vector3d p(coord(rng), coord(rng), coord(rng));
      bool ok = true;
      for (const auto& q : system.positions) ok = ok && (p - q).norm() > 0.2;
      if (!ok) continue;
      const int e = pick(rng);
      system.positions.push_back(p);
      system.elements.push_back(vocabulary[e]);
      masses.push_back(e + 1.0);
    }
    system.predict_mask.assign(n_points, 1);
    system.targets = gravity_accelerations(system.positions, masses);
    out.push_back(std::move(system));
  }
  return out;
}

std::vector<AtomSystem> generate_chain_structures(const ChainSettings& s) {
  if (s.atoms_per_structure < 4) fail("chains need at least 4 atoms");
  static const std::array<const char*, 6> kPattern = {"P", "O", "C", "C", "N", "O"};
  static const std::array<double, 3> kDihedrals = {60.0, 180.0, 300.0};
  constexpr double kDeg = std::numbers::pi / 180.0;

  std::vector<AtomSystem> out;
  for (int idx = 0; idx < s.n_structures; ++idx) {
    Rng rng = substream(s.seed, "chain", static_cast<std::uint64_t>(idx));
    std::uniform_int_distribution<int> pick(0, 2);
    std::normal_distribution<double> jitter(0.0, 8.0);
    for (int attempt = 0;; ++attempt) {
      if (attempt > 500) fail("could not build a self-avoiding chain");
      Positions p = {Eigen::Vector3d::Zero(), Eigen::Vector3d(s.bond_length, 0, 0)};
      const double theta = s.bond_angle_deg * kDeg;
      p.push_back(p[1] + s.bond_length * Eigen::Vector3d(-std::cos(theta), std::sin(theta), 0.0));
      bool ok = true;
      while (ok && static_cast<int>(p.size()) < s.atoms_per_structure) {
        const std::size_t n = p.size();
        const Eigen::Vector3d b1 = (p[n - 2] - p[n - 3]).normalized();
        const Eigen::Vector3d b2 = (p[n - 1] - p[n - 2]).normalized();
        const Eigen::Vector3d nrm = b1.cross(b2).normalized();
        const double phi = (kDihedrals[pick(rng)] + jitter(rng)) * kDeg;
        // Place along -b2 bent by the bond angle, then twist by phi about b2.
        const Eigen::Vector3d in_plane = (Eigen::AngleAxisd(-(std::numbers::pi - theta), nrm) * b2);
        const Eigen::Vector3d dir = Eigen::AngleAxisd(phi, b2) * in_plane;
        const Eigen::Vector3d next = p[n - 1] + s.bond_length * dir.normalized();
        for (std::size_t j = 0; j + 3 <= n && ok; ++j) ok = (next - p[j]).norm() > s.min_nonbonded;
        p.push_back(next);
      }
      if (!ok) continue;
      std::vector<std::string> elements;
      for (int i = 0; i < s.atoms_per_structure; ++i) elements.emplace_back(kPattern[i % kPattern.size()]);
      out.push_back(make_system(system_id("native", idx), std::move(p), std::move(elements)));
      break;
    }
  }
  return out;
}

}  // namespace tfk
