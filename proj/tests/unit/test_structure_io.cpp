#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "tfk/error.hpp"
#include "tfk/generators.hpp"
#include "tfk/lennard_jones.hpp"
#include "tfk/pdb_io.hpp"
#include "tfk/vector_io.hpp"

using namespace tfk;

namespace {

// Fixed-width record assembled field by field from the PDB column table.
std::string pdb_record(const std::string& record, const std::string& name, const std::string& residue, double x,
                       double y, double z, const std::string& element) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-6s%5d %-4s %3s %c%4d    %8.3f%8.3f%8.3f%6.2f%6.2f          %2s", record.c_str(),
                1, name.c_str(), residue.c_str(), 'A', 1, x, y, z, 1.0, 0.0, element.c_str());
  return buf;
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double worst = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    worst = std::max(worst, std::abs(double(i) / a.size() - double(j) / b.size()));
  }
  return worst;
}

double pair_force(double r, double eps, double sigma) {
  const double s6 = std::pow(sigma / r, 6);
  return 24.0 * eps / r * (2.0 * s6 * s6 - s6);
}

}  // namespace

TEST_CASE("parse a well-formed ATOM record") {
  const std::string line = pdb_record("ATOM", " CA ", "ALA", 12.345, -6.780, 0.001, " C");
  REQUIRE(line.size() == 78);
  CHECK(line.substr(30, 8) == "  12.345");
  CHECK(line.substr(76, 2) == " C");
  const AtomSystem s = parse_structure(line + "\n");
  REQUIRE(s.size() == 1);
  CHECK(s.elements[0] == "C");
  CHECK(s.predict_mask[0] == 1);
  CHECK(s.positions[0] == Eigen::Vector3d(12.345, -6.780, 0.001));
}

TEST_CASE("parse errors and fallbacks") {
  CHECK_THROWS_WITH_AS(parse_structure(""), "no atom records", Error);
  CHECK_THROWS_WITH_AS(parse_structure("REMARK nothing here\n"), "no atom records", Error);

  std::string bad = pdb_record("ATOM", " CA ", "ALA", 1, 2, 3, " C");
  bad.replace(30, 8, "  1.2.3x");
  const std::string text = pdb_record("ATOM", " N  ", "ALA", 0, 0, 0, " N") + "\n" + bad + "\n";
  CHECK_THROWS_WITH_AS(parse_structure(text), doctest::Contains("line 2"), Error);

  std::string no_element = pdb_record("ATOM", " O  ", "ALA", 1, 2, 3, "  ");
  std::vector<std::string> warnings;
  const AtomSystem s = parse_structure(no_element, &warnings);
  CHECK(s.elements[0] == "O");
  CHECK(warnings.size() == 1);

  const AtomSystem w = parse_structure(pdb_record("HETATM", " O  ", "HOH", 1, 2, 3, " O") + "\n" +
                                       pdb_record("HETATM", "FE  ", "HEM", 4, 5, 6, "FE"));
  CHECK(w.predict_mask[0] == 0);
  CHECK(w.predict_mask[1] == 1);
  CHECK(w.elements[1] == "Fe");
}

TEST_CASE("structure writer round trip") {
  std::mt19937_64 rng(20);
  AtomSystem s = make_system("rt", testing::random_points(rng, 25, 90.0), std::vector<std::string>(25, "N"));
  s.elements[3] = "S";
  s.predict_mask[4] = 0;
  const std::string text = write_structure(s);
  CHECK(text == write_structure(s));
  const AtomSystem back = parse_structure(text);
  REQUIRE(back.size() == s.size());
  for (int i = 0; i < s.size(); ++i) {
    CHECK((back.positions[i] - s.positions[i]).cwiseAbs().maxCoeff() <= 0.0005 + 1e-12);
    CHECK(back.elements[i] == s.elements[i]);
    CHECK(back.predict_mask[i] == s.predict_mask[i]);
  }
  CHECK(write_structure(back) == text);

  AtomSystem big = make_system("big", {{99999.0, 0, 0}}, {"C"});
  CHECK_THROWS_AS(write_structure(big), Error);
}

TEST_CASE("vector csv round trip is lossless") {
  std::mt19937_64 rng(21);
  VectorTable t;
  t.vectors = testing::random_points(rng, 20, 1e3);
  t.vectors[3] = {1e-300, -0.1, 1.0 / 3.0};
  t.elements.assign(20, "C");
  t.flags.assign(20, 0);
  t.flags[5] = 1;
  const VectorTable back = parse_vector_csv(write_vector_csv(t));
  CHECK(back.vectors == t.vectors);
  CHECK(back.flags == t.flags);
  CHECK(back.elements == t.elements);
}

TEST_CASE("lennard-jones closed forms") {
  LJParams p;
  const double rmin = std::pow(2.0, 1.0 / 6.0) * p.sigma;
  const Positions at_min = {{0, 0, 0}, {rmin, 0, 0}};
  for (const auto& f : lj_forces(at_min, p)) CHECK(f.norm() < 1e-12);

  const Positions at_sigma = {{0, 0, 0}, {0, 0, p.sigma}};
  const Positions f = lj_forces(at_sigma, p);
  CHECK(f[1].z() == doctest::Approx(24.0 * p.epsilon / p.sigma));  // pushes atom 1 away from atom 0
  CHECK(f[0].z() == doctest::Approx(-24.0 * p.epsilon / p.sigma));

  CHECK_THROWS_WITH_AS(lj_forces(Positions{{1, 1, 1}, {1, 1, 1}}, p), doctest::Contains("singularity"), Error);
  const Positions far = {{0, 0, 0}, {p.cutoff + 0.1, 0, 0}};
  CHECK(lj_forces(far, p)[0].norm() == 0.0);
}

TEST_CASE("lennard-jones mixed forces match a pairwise double loop") {
  std::mt19937_64 rng(22);
  const std::vector<std::string> vocab = {"C", "H", "O", "N", "S", "P"};
  const Positions x = testing::random_points(rng, 25, 6.0);
  std::vector<std::string> el;
  for (int i = 0; i < 25; ++i) el.push_back(vocab[i % 6]);
  LJParams p;
  const Positions f = lj_forces(x, el, p);
  for (int i = 0; i < 25; ++i) {
    Eigen::Vector3d expected = Eigen::Vector3d::Zero();
    for (int j = 0; j < 25; ++j) {
      if (j == i) continue;
      const Eigen::Vector3d d = x[i] - x[j];
      const double r = d.norm();
      if (r >= p.cutoff) continue;
      const LJSpecies a = lj_species(el[i]), b = lj_species(el[j]);
      const double sigma = 0.5 * (a.sigma_scale + b.sigma_scale) * p.sigma;
      const double eps = std::sqrt(a.epsilon_scale * b.epsilon_scale) * p.epsilon;
      expected += pair_force(r, eps, sigma) * d / r;
    }
    CHECK((f[i] - expected).norm() <= 1e-9 * (1.0 + expected.norm()));
  }
  CHECK_THROWS_AS(lj_species("Xe"), Error);
}

TEST_CASE("lennard-jones invariants") {
  std::mt19937_64 rng(23);
  LJParams p;
  for (int trial = 0; trial < 10; ++trial) {
    const Positions x = testing::random_points(rng, 20, 5.0);
    const Positions f = lj_forces(x, p);
    Eigen::Vector3d total = Eigen::Vector3d::Zero();
    double scale = 0.0;
    for (const auto& v : f) {
      total += v;
      scale = std::max(scale, v.norm());
    }
    CHECK(total.norm() < 1e-9 * std::max(1.0, scale));

    const Eigen::Matrix3d g = testing::quaternion_rotation(rng);
    const Eigen::Vector3d t(30, -40, 50);
    Positions moved;
    for (const auto& v : x) moved.push_back(g * v + t);
    const Positions fm = lj_forces(moved, p);
    for (int i = 0; i < 20; ++i) CHECK((fm[i] - g * f[i]).norm() < 1e-9 * std::max(1.0, scale));
  }
}

TEST_CASE("lennard-jones forces are the negative energy gradient") {
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> u(0.0, 9.0);
  LJParams p;
  Positions x;
  while (x.size() < 12) {
    const Eigen::Vector3d c(u(rng), u(rng), u(rng));
    bool ok = true;
    for (const auto& q : x) ok = ok && (q - c).norm() > 2.6;
    if (ok) x.push_back(c);
  }
  // keep pairs away from the truncation radius so the energy is smooth there
  const Positions f = lj_forces(x, p);
  const double h = 1e-6;
  for (int i = 0; i < 12; ++i)
    for (int d = 0; d < 3; ++d) {
      bool near_cut = false;
      for (int j = 0; j < 12; ++j) near_cut = near_cut || (j != i && std::abs((x[i] - x[j]).norm() - p.cutoff) < 1e-3);
      if (near_cut) continue;
      Positions up = x, down = x;
      up[i][d] += h;
      down[i][d] -= h;
      const double numeric = -(lj_energy(up, p) - lj_energy(down, p)) / (2 * h);
      CHECK(std::abs(numeric - f[i][d]) <= 1e-5 * std::max(1.0, std::abs(f[i][d])));
    }
}

TEST_CASE("lj cluster generator") {
  LJClusterSettings s;
  s.n_systems = 5;
  s.seed = 3;
  const auto a = generate_lj_clusters(s), b = generate_lj_clusters(s);
  REQUIRE(a.size() == 5);
  for (int i = 0; i < 5; ++i) {
    CHECK(a[i].positions == b[i].positions);
    CHECK(a[i].elements == b[i].elements);
    CHECK(*a[i].targets == *b[i].targets);
    Eigen::Vector3d total = Eigen::Vector3d::Zero();
    for (const auto& f : *a[i].targets) total += f;
    CHECK(total.norm() < 1e-9 * 1e4);
    for (int x = 0; x < a[i].size(); ++x)
      for (int y = x + 1; y < a[i].size(); ++y) {
        const double sig = 0.5 * (lj_species(a[i].elements[x]).sigma_scale + lj_species(a[i].elements[y]).sigma_scale) *
                           s.params.sigma;
        CHECK((a[i].positions[x] - a[i].positions[y]).norm() > 0.8 * sig);
      }
  }
  std::vector<std::string> seen(a[0].elements);
  std::sort(seen.begin(), seen.end());
  seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
  CHECK(seen.size() > 1);

  LJClusterSettings solvent = s;
  solvent.solvent_fraction = 0.5;
  int masked = 0;
  for (const auto& sys : generate_lj_clusters(solvent)) masked += sys.size() - sys.masked_count();
  CHECK(masked > 0);
}

TEST_CASE("lj force magnitude distribution is stable across seeds") {
  auto magnitudes = [](std::uint64_t seed) {
    LJClusterSettings s;
    s.n_systems = 334;
    s.seed = seed;
    std::vector<double> m;
    for (const auto& sys : generate_lj_clusters(s))
      for (const auto& f : *sys.targets) m.push_back(f.norm());
    return m;
  };
  const auto a = magnitudes(1), b = magnitudes(2);
  CHECK(a.size() >= 10000);
  CHECK(ks_distance(a, b) < 0.05);
}

TEST_CASE("gravity toy") {
  const Positions two = {{0, 0, 0}, {2, 0, 0}};
  const std::vector<double> m = {1.0, 1.0};
  const Positions a = gravity_accelerations(two, m);
  CHECK(a[0].x() == doctest::Approx(0.25));
  CHECK(a[1].x() == doctest::Approx(-0.25));
  CHECK(a[0].y() == 0.0);

  const auto systems = gravity_toy(3, 15, 4);
  const std::vector<std::string> vocab = kProteinVocabulary;
  for (const auto& s : systems) {
    for (int i = 0; i < s.size(); ++i) {
      Eigen::Vector3d expected = Eigen::Vector3d::Zero();
      for (int j = 0; j < s.size(); ++j) {
        if (i == j) continue;
        const double mass = std::find(vocab.begin(), vocab.end(), s.elements[j]) - vocab.begin() + 1.0;
        const Eigen::Vector3d d = s.positions[j] - s.positions[i];
        expected += mass * d / std::pow(d.norm(), 3);
      }
      CHECK(((*s.targets)[i] - expected).norm() < 1e-12 * std::max(1.0, expected.norm()));
    }
    std::mt19937_64 rng(5);
    const Eigen::Matrix3d g = testing::quaternion_rotation(rng);
    Positions rotated;
    std::vector<double> masses;
    for (int i = 0; i < s.size(); ++i) {
      rotated.push_back(g * s.positions[i]);
      masses.push_back(std::find(vocab.begin(), vocab.end(), s.elements[i]) - vocab.begin() + 1.0);
    }
    const Positions ar = gravity_accelerations(rotated, masses);
    for (int i = 0; i < s.size(); ++i) CHECK((ar[i] - g * (*s.targets)[i]).norm() < 1e-9 * (1 + ar[i].norm()));
  }
  CHECK_THROWS_AS(gravity_accelerations(Positions{{0, 0, 0}, {0, 0, 0}}, m), Error);
  CHECK(gravity_toy(2, 10, 9)[1].positions == gravity_toy(2, 10, 9)[1].positions);
}

TEST_CASE("chain structures") {
  ChainSettings cs;
  cs.n_structures = 3;
  const auto chains = generate_chain_structures(cs);
  REQUIRE(chains.size() == 3);
  for (const auto& c : chains) {
    CHECK(c.size() == cs.atoms_per_structure);
    for (int i = 1; i < c.size(); ++i) CHECK((c.positions[i] - c.positions[i - 1]).norm() == doctest::Approx(1.5));
    for (int i = 1; i + 1 < c.size(); ++i) {
      const Eigen::Vector3d a = c.positions[i - 1] - c.positions[i], b = c.positions[i + 1] - c.positions[i];
      CHECK(std::acos(a.dot(b) / (a.norm() * b.norm())) * 180.0 / 3.141592653589793 == doctest::Approx(112.0));
    }
    for (int i = 0; i < c.size(); ++i)
      for (int j = i + 3; j < c.size(); ++j) CHECK((c.positions[i] - c.positions[j]).norm() >= cs.min_nonbonded);
  }
  CHECK(generate_chain_structures(cs)[2].positions == chains[2].positions);
}
