// Acceptance suite: one PASS/FAIL line per criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Dense>

#include "tfk/commands.hpp"
#include "tfk/error.hpp"
#include "tfk/generators.hpp"
#include "tfk/gradcheck.hpp"
#include "tfk/loss.hpp"
#include "tfk/metrics.hpp"
#include "tfk/refinement.hpp"
#include "tfk/so3.hpp"
#include "tfk/training.hpp"
#include "tfk/verification.hpp"

using namespace tfk;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string num(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

// Haar rotation from a normalized Gaussian quaternion.
Eigen::Matrix3d quaternion_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::Vector4d q(g(rng), g(rng), g(rng), g(rng));
  q.normalize();
  const double w = q(0), x = q(1), y = q(2), z = q(3);
  Eigen::Matrix3d r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
       2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
       2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

AtomSystem rigidly_moved(const AtomSystem& s, const Eigen::Matrix3d& r, const Eigen::Vector3d& t) {
  AtomSystem out = s;
  for (auto& p : out.positions) p = r * p + t;
  out.targets.reset();
  return out;
}

ModelConfig default_model(int L, std::uint64_t seed) {
  ModelConfig c;
  c.max_order = L;
  c.seed = seed;
  return c;
}

// ---------------------------------------------------------------- 1, 2, 3

Outcome equivariance_law() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::mt19937_64 rng(101);
  for (int L : {1, 2}) {
    const Model m(default_model(L, 7 + L));
    for (int s = 0; s < 10; ++s) {
      const AtomSystem sys = random_system(60, 12.0, kProteinVocabulary, 1000 + s);
      const Positions base = m.forward(sys).vectors;
      for (int r = 0; r < 100; ++r) {
        const Eigen::Matrix3d g = quaternion_rotation(rng);
        const Positions rot = m.forward(rigidly_moved(sys, g, Eigen::Vector3d::Zero())).vectors;
        for (int a = 0; a < sys.size(); ++a)
          worst = std::max(worst, (rot[a] - g * base[a]).norm() / base[a].norm());
      }
    }
  }
  const double t = seconds_since(t0);
  return {worst < 1e-6 && t < 120.0, "max relative deviation " + num(worst) + " (< 1e-6), " + num(t) + " s (< 120 s)"};
}

Outcome order0_invariance() {
  double worst = 0.0;
  std::mt19937_64 rng(202);
  const Model m(default_model(0, 3));
  for (int s = 0; s < 10; ++s) {
    const AtomSystem sys = random_system(60, 12.0, kProteinVocabulary, 2000 + s);
    const std::vector<double> base = m.forward(sys).scalars;
    for (int r = 0; r < 100; ++r) {
      const std::vector<double> rot = m.forward(rigidly_moved(sys, quaternion_rotation(rng), Eigen::Vector3d::Zero())).scalars;
      for (int a = 0; a < sys.size(); ++a) worst = std::max(worst, std::abs(rot[a] - base[a]));
    }
  }
  return {worst < 1e-9, "max scalar change " + num(worst) + " (< 1e-9)"};
}

Outcome translation_invariance() {
  double worst = 0.0;
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> shift(-100.0, 100.0);
  for (int L : {0, 1, 2}) {
    const Model m(default_model(L, 11 + L));
    for (int s = 0; s < 5; ++s) {
      const AtomSystem sys = random_system(60, 12.0, kProteinVocabulary, 3000 + s);
      const Prediction base = m.forward(sys);
      for (int r = 0; r < 20; ++r) {
        const Eigen::Vector3d t(shift(rng), shift(rng), shift(rng));
        const Prediction moved = m.forward(rigidly_moved(sys, Eigen::Matrix3d::Identity(), t));
        for (int a = 0; a < sys.size(); ++a) {
          const double d = L == 0 ? std::abs(moved.scalars[a] - base.scalars[a]) : (moved.vectors[a] - base.vectors[a]).norm();
          worst = std::max(worst, d);
        }
      }
    }
  }
  return {worst < 1e-9, "max output change " + num(worst) + " (< 1e-9) over shifts up to 100 A"};
}

// ---------------------------------------------------------------- 4

Outcome gradient_correctness() {
  double worst = 0.0;
  std::string where;
  int sampled = 0;
  for (int L : {0, 1, 2}) {
    Model m(default_model(L, 21 + L));
    AtomSystem sys = random_system(16, 7.0, kProteinVocabulary, 4000 + L);
    std::mt19937_64 rng(4100 + L);
    std::normal_distribution<double> g(0.0, 1.5);
    Positions t(sys.size());
    for (auto& v : t) v = Eigen::Vector3d(g(rng), g(rng), g(rng));
    sys.targets = t;
    GradientCheckSettings gs;
    gs.samples_per_kind = 200;
    gs.seed = 17 + L;
    const GradientCheckReport r = check_gradients(m, sys, gs);
    for (const auto& k : r.kinds) {
      sampled += k.sampled;
      if (k.max_relative_error >= worst) {
        worst = k.max_relative_error;
        where = "L" + std::to_string(L) + " " + k.kind + " " + k.worst_parameter;
      }
    }
  }
  return {worst < 1e-4, "max relative error " + num(worst) + " (< 1e-4) at " + where + ", " + std::to_string(sampled) +
                            " parameters sampled"};
}

// ---------------------------------------------------------------- 5

// Brute-force refinement field: full sort per atom and SVD superposition.
Positions brute_force_field(const StructurePair& pair, int k) {
  const auto& c = pair.candidate.positions;
  const auto& t = pair.target.positions;
  const int n = static_cast<int>(c.size());
  Positions v(n);
  for (int a = 0; a < n; ++a) {
    std::vector<int> idx;
    for (int j = 0; j < n; ++j)
      if (j != a) idx.push_back(j);
    std::sort(idx.begin(), idx.end(), [&](int x, int y) {
      const double dx = (c[x] - c[a]).squaredNorm(), dy = (c[y] - c[a]).squaredNorm();
      return dx < dy || (dx == dy && x < y);
    });
    idx.resize(std::min(k, n - 1));
    Eigen::Vector3d cm = Eigen::Vector3d::Zero(), ct = Eigen::Vector3d::Zero();
    for (int j : idx) {
      cm += t[j];
      ct += c[j];
    }
    cm /= static_cast<double>(idx.size());
    ct /= static_cast<double>(idx.size());
    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
    for (int j : idx) h += (t[j] - cm) * (c[j] - ct).transpose();
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
    if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0) d(2, 2) = -1;
    const Eigen::Matrix3d r = svd.matrixV() * d * svd.matrixU().transpose();
    v[a] = c[a] - (r * (t[a] - cm) + ct);
  }
  return v;
}

Outcome refinement_oracle() {
  std::mt19937_64 rng(505);
  std::normal_distribution<double> noise(0.0, 0.5);
  std::uniform_real_distribution<double> shift(-10.0, 10.0), size(0, 1);
  double worst_oracle = 0.0, worst_rigid = 0.0;
  const int ks[] = {3, 5, 8, 12, 50};
  for (int i = 0; i < 50; ++i) {
    ChainSettings cs;
    cs.n_structures = 1;
    cs.atoms_per_structure = 8 + static_cast<int>(size(rng) * 25);
    cs.seed = 600 + i;
    const AtomSystem native = generate_chain_structures(cs)[0];
    const int k = ks[i % 5];
    AtomSystem cand = native;
    for (auto& p : cand.positions) p += Eigen::Vector3d(noise(rng), noise(rng), noise(rng));
    cand = rigidly_moved(cand, quaternion_rotation(rng), Eigen::Vector3d(shift(rng), shift(rng), shift(rng)));
    const StructurePair pair{cand, native};
    const Positions lib = refinement_field(pair, k).vectors;
    const Positions ref = brute_force_field(pair, k);
    for (int a = 0; a < cand.size(); ++a) worst_oracle = std::max(worst_oracle, (lib[a] - ref[a]).norm());

    const AtomSystem rigid =
        rigidly_moved(native, quaternion_rotation(rng), Eigen::Vector3d(shift(rng), shift(rng), shift(rng)));
    for (const auto& v : refinement_field({rigid, native}, k).vectors) worst_rigid = std::max(worst_rigid, v.norm());
  }
  return {worst_oracle < 1e-10 && worst_rigid < 1e-8,
          "oracle difference " + num(worst_oracle) + " A (< 1e-10), rigid-motion field " + num(worst_rigid) + " A (< 1e-8)"};
}

// ---------------------------------------------------------------- 6

Outcome kabsch_exactness() {
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::normal_distribution<double> g;
  double worst_rmsd = 0.0, worst_det = 0.0, worst_rot = 0.0;
  int thin = 0;
  for (int i = 0; i < 100; ++i) {
    const int n = 3 + i % 20;
    Positions mobile(n);
    const int shape = i % 4;  // 0 bulk, 1 flat, 2 needle, 3 flat plus needle noise
    const Eigen::Vector3d axis = Eigen::Vector3d(g(rng), g(rng), g(rng)).normalized();
    for (auto& p : mobile) {
      p = Eigen::Vector3d(u(rng), u(rng), u(rng));
      if (shape == 1) p -= axis * axis.dot(p) * (1.0 - 1e-7);
      if (shape == 2) p = axis * axis.dot(p) + 1e-6 * Eigen::Vector3d(g(rng), g(rng), g(rng));
      if (shape == 3) p -= axis * axis.dot(p) * (1.0 - 1e-4);
    }
    if (shape != 0) ++thin;
    const Eigen::Matrix3d r = quaternion_rotation(rng);
    const Eigen::Vector3d t(u(rng), u(rng), u(rng));
    Positions target(n);
    for (int j = 0; j < n; ++j) target[j] = r * mobile[j] + t;
    const Superposition s = kabsch_align(mobile, target);
    Positions aligned(n);
    for (int j = 0; j < n; ++j) aligned[j] = s.transform.apply(mobile[j]);
    worst_rmsd = std::max(worst_rmsd, rmsd(aligned, target));
    worst_det = std::max(worst_det, std::abs(s.transform.rotation.matrix().determinant() - 1.0));
    if (shape == 0) worst_rot = std::max(worst_rot, (s.transform.rotation.matrix() - r).norm());
  }
  return {worst_rmsd < 1e-8 && worst_det < 1e-12 && worst_rot < 1e-8,
          "max post-alignment RMSD " + num(worst_rmsd) + " A (< 1e-8), |det - 1| " + num(worst_det) +
              ", bulk rotation error " + num(worst_rot) + ", " + std::to_string(thin) + " thin instances"};
}

// ---------------------------------------------------------------- 7

Outcome closed_forms() {
  std::vector<std::string> bad;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) bad.push_back(what);
  };
  const Eigen::Vector3d zero = Eigen::Vector3d::Zero();
  expect(std::abs(huber_tensor_loss(zero, zero, 1.0) - 0.0) < 1e-15, "huber(0)");
  expect(std::abs(huber_tensor_loss(Eigen::Vector3d(0, 0, 1), zero, 1.0) - 0.5) < 1e-15, "huber(delta)");
  expect(std::abs(huber_tensor_loss(Eigen::Vector3d(3, 0, 0), zero, 1.0) - 2.5) < 1e-15, "huber(3 delta)");
  const double h = 1e-6;
  const double slope_left = (huber(1.0, 1.0) - huber(1.0 - h, 1.0)) / h;
  const double slope_right = (huber(1.0 + h, 1.0) - huber(1.0, 1.0)) / h;
  expect(std::abs(huber(1.0 - 1e-12, 1.0) - huber(1.0 + 1e-12, 1.0)) < 1e-11, "huber continuity");
  expect(std::abs(slope_left - 1.0) < 1e-5 && std::abs(slope_right - 1.0) < 1e-5, "huber slope at junction");

  const Eigen::Vector3d x(1, 0, 0), y(0, 1, 0);
  expect(std::abs(angle_degrees(x, x)) < 1e-6, "angle 0");
  expect(std::abs(angle_degrees(x, y) - 90.0) < 1e-12, "angle 90");
  expect(std::abs(angle_degrees(x, -x) - 180.0) < 1e-6, "angle 180");

  std::mt19937_64 rng(707);
  std::normal_distribution<double> g;
  Positions targets(10000);
  for (auto& t : targets) t = Eigen::Vector3d(g(rng), g(rng), g(rng));
  const double baseline = naive_baseline(targets, BaselineKind::kRandomDirection, 7).angle_mean;
  expect(std::abs(baseline - 90.0) < 2.0, "random-direction baseline " + num(baseline));

  std::string detail = "huber {0, 0.5, 2.5}, junction slopes " + num(slope_left) + "/" + num(slope_right) +
                       ", random-direction angle " + num(baseline) + " deg";
  for (const auto& b : bad) detail += "; failed: " + b;
  return {bad.empty(), detail};
}

// ---------------------------------------------------------------- 8

struct RunResult {
  double validation_loss;
  MetricsReport test;
};

RunResult train_and_test(const ModelConfig& mc, const TrainConfig& tc, const std::vector<AtomSystem>& train_set,
                         const std::vector<AtomSystem>& val_set, const std::vector<AtomSystem>& test_set) {
  Model m(mc);
  const TrainState st = train(m, train_set, val_set, tc);
  m.parameters() = st.best_parameters;
  return {st.history.best_validation_loss, evaluate_metrics(m, test_set)};
}

Positions masked_targets(const std::vector<AtomSystem>& systems) {
  Positions out;
  for (const auto& s : systems)
    for (int a = 0; a < s.size(); ++a)
      if (s.predict_mask[a]) out.push_back((*s.targets)[a]);
  return out;
}

Outcome force_experiment() {
  const auto t0 = Clock::now();
  LJClusterSettings ls;
  ls.n_systems = 200;
  ls.atoms_per_system = 30;
  ls.seed = 0;
  const auto systems = generate_lj_clusters(ls);
  const std::vector<AtomSystem> train_set(systems.begin(), systems.begin() + 100);
  const std::vector<AtomSystem> val_set(systems.begin() + 100, systems.begin() + 150);
  const std::vector<AtomSystem> test_set(systems.begin() + 150, systems.end());

  TrainConfig tc;
  tc.total_batches = 5000;
  tc.huber_delta = 10.0;
  tc.optimizer = OptimizerKind::kAdam;
  tc.learning_rate = 3e-3;

  std::vector<std::vector<RunResult>> runs(3);
  for (int L = 0; L <= 2; ++L) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      ModelConfig mc = default_model(L, seed);
      mc.output_scale = target_rms(train_set);
      TrainConfig rc = tc;
      rc.seed = seed;
      runs[L].push_back(train_and_test(mc, rc, train_set, val_set, test_set));
      std::cerr << "  force L" << L << " seed " << seed << ": val " << runs[L].back().validation_loss << ", "
                << num(seconds_since(t0)) << " s\n";
    }
  }
  auto stat = [&](int L, auto field) {
    std::vector<double> v;
    for (const auto& r : runs[L]) v.push_back(field(r));
    return mean_sem(v);
  };
  const double zero_mae = naive_baseline(masked_targets(test_set), BaselineKind::kZero, 0).tensor_mae;
  const auto l1_tensor = stat(1, [](const RunResult& r) { return r.test.tensor_mae; });
  const auto l0_mag = stat(0, [](const RunResult& r) { return r.test.magnitude_mae; });
  const auto l1_mag = stat(1, [](const RunResult& r) { return r.test.magnitude_mae; });
  const auto l1_val = stat(1, [](const RunResult& r) { return r.validation_loss; });
  const auto l2_val = stat(2, [](const RunResult& r) { return r.validation_loss; });
  const auto l2_pearson = stat(2, [](const RunResult& r) { return r.test.pearson_magnitude; });
  double l2_pearson_min = 1.0;
  for (const auto& r : runs[2]) l2_pearson_min = std::min(l2_pearson_min, r.test.pearson_magnitude);
  const double minutes = seconds_since(t0) / 60.0;

  const bool a = l1_tensor.first < 0.5 * zero_mae;
  const bool b = l1_mag.first < l0_mag.first;
  const bool c = l2_val.first <= l1_val.first + l1_val.second;
  const bool d = l2_pearson_min > 0.8;
  const bool e = minutes < 60.0;
  return {a && b && c && d && e,
          "L1 tensor_mae " + num(l1_tensor.first) + " vs zero baseline " + num(zero_mae) + (a ? " ok" : " FAIL") +
              "; magnitude_mae L1 " + num(l1_mag.first) + " < L0 " + num(l0_mag.first) + (b ? " ok" : " FAIL") +
              "; val loss L2 " + num(l2_val.first) + " <= L1 " + num(l1_val.first) + " + " + num(l1_val.second) +
              (c ? " ok" : " FAIL") + "; L2 pearson mean " + num(l2_pearson.first) + " min " + num(l2_pearson_min) +
              (d ? " ok" : " FAIL") + "; L2 magnitude_mae " +
              num(stat(2, [](const RunResult& r) { return r.test.magnitude_mae; }).first) + ", tensor_mae " +
              num(stat(2, [](const RunResult& r) { return r.test.tensor_mae; }).first) + "; " + num(minutes) + " min"};
}

// ---------------------------------------------------------------- 9

Outcome refinement_experiment() {
  const auto t0 = Clock::now();
  ChainSettings cs;
  cs.n_structures = 21;
  cs.atoms_per_structure = 40;
  cs.seed = 0;
  const auto natives = generate_chain_structures(cs);
  const int k = 50;
  const auto examples = make_refinement_dataset(natives, 0.5, 4, 0, k);
  std::vector<AtomSystem> train_set, val_set, test_set;
  std::vector<StructurePair> test_pairs;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const std::size_t native = i / 4;
    if (native < 13) {
      train_set.push_back(examples[i].pair.candidate);
    } else if (native < 17) {
      val_set.push_back(examples[i].pair.candidate);
    } else {
      test_set.push_back(examples[i].pair.candidate);
      test_pairs.push_back(examples[i].pair);
    }
  }

  ModelConfig mc = default_model(1, 0);
  mc.vocabulary = kNucleicVocabulary;
  mc.neighbors = k;
  mc.output_scale = target_rms(train_set);
  TrainConfig tc;
  tc.total_batches = 5000;
  tc.huber_delta = 1.0;
  Model m(mc);
  const TrainState st = train(m, train_set, val_set, tc);
  m.parameters() = st.best_parameters;

  const MetricsReport model = evaluate_metrics(m, test_set);
  const Positions targets = masked_targets(test_set);
  const double zero_mae = naive_baseline(targets, BaselineKind::kZero, 0).tensor_mae;
  const double random_angle = naive_baseline(targets, BaselineKind::kRandomDirection, 0).angle_mean;

  double before = 0.0, after = 0.0;
  int improved = 0;
  for (const auto& pair : test_pairs) {
    const double b = mean_local_deviation(pair, k);
    const AtomSystem refined = apply_refinement(pair.candidate, m.forward(pair.candidate).vectors, 0.5);
    const double a = mean_local_deviation({refined, pair.target}, k);
    before += b / test_pairs.size();
    after += a / test_pairs.size();
    improved += a < b;
  }
  const bool ok_tensor = model.tensor_mae < zero_mae;
  const bool ok_angle = model.angle_mean <= random_angle - 10.0;
  const bool ok_step = after < before;
  return {ok_tensor && ok_angle && ok_step,
          "tensor_mae " + num(model.tensor_mae) + " vs zero " + num(zero_mae) + (ok_tensor ? " ok" : " FAIL") +
              "; angle " + num(model.angle_mean) + " vs random " + num(random_angle) + (ok_angle ? " ok" : " FAIL") +
              "; deviation " + num(before) + " -> " + num(after) + " A (" + std::to_string(improved) + "/" +
              std::to_string(test_pairs.size()) + " pairs improved)" + (ok_step ? " ok" : " FAIL") + "; " +
              num(seconds_since(t0)) + " s"};
}

// ---------------------------------------------------------------- 10

Outcome scaling() {
  const Model m(default_model(1, 5));
  std::vector<double> times;
  const int sizes[] = {250, 500, 1000};
  for (int n : sizes) {
    // Constant density: 250 atoms in a 16 A cube.
    const double box = 16.0 * std::cbrt(n / 250.0);
    const AtomSystem sys = random_system(n, box, kProteinVocabulary, 10 + n);
    double best = 1e300;
    for (int rep = 0; rep < 3; ++rep) {
      const auto t0 = Clock::now();
      const Prediction p = m.forward(sys);
      best = std::min(best, seconds_since(t0));
      if (p.vectors.size() != static_cast<std::size_t>(n)) return {false, "wrong output size"};
    }
    times.push_back(best);
  }
  const double r1 = times[1] / times[0], r2 = times[2] / times[1];
  return {r1 < 2.5 && r2 < 2.5, "forward times " + num(times[0]) + " / " + num(times[1]) + " / " + num(times[2]) +
                                    " s at N = 250/500/1000, doubling ratios " + num(r1) + ", " + num(r2) + " (< 2.5)"};
}

// ---------------------------------------------------------------- 11

Outcome so3_suite() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1111);
  std::normal_distribution<double> g;
  double sh = 0.0, hom = 0.0, cg = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const Rotation r1(quaternion_rotation(rng)), r2(quaternion_rotation(rng));
    const Eigen::Vector3d u = Eigen::Vector3d(g(rng), g(rng), g(rng)).normalized();
    for (int l = 0; l <= kMaxOrder; ++l) {
      const Eigen::MatrixXd d1 = wigner_matrix(l, r1);
      sh = std::max(sh, (real_spherical_harmonics(l, r1 * u) - d1 * real_spherical_harmonics(l, u)).cwiseAbs().maxCoeff());
      hom = std::max(hom, (wigner_matrix(l, r1 * r2) - d1 * wigner_matrix(l, r2)).cwiseAbs().maxCoeff());
    }
    for (int l1 = 0; l1 <= kMaxOrder; ++l1) {
      for (int l2 = 0; l2 <= kMaxOrder; ++l2) {
        for (int l3 = 0; l3 <= kMaxOrder; ++l3) {
          if (!coupling_allowed(l1, l2, l3)) continue;
          const CGTensor& c = clebsch_gordan(l1, l2, l3);
          const int n1 = 2 * l1 + 1, n2 = 2 * l2 + 1, n3 = 2 * l3 + 1;
          Eigen::VectorXd a(n1), b(n2);
          for (int i = 0; i < n1; ++i) a(i) = g(rng);
          for (int i = 0; i < n2; ++i) b(i) = g(rng);
          auto couple = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
            Eigen::VectorXd out = Eigen::VectorXd::Zero(n3);
            for (int i = 0; i < n1; ++i)
              for (int j = 0; j < n2; ++j)
                for (int k = 0; k < n3; ++k) out(k) += c(i, j, k) * x(i) * y(j);
            return out;
          };
          const Eigen::VectorXd lhs = couple(wigner_matrix(l1, r1) * a, wigner_matrix(l2, r1) * b);
          const Eigen::VectorXd rhs = wigner_matrix(l3, r1) * couple(a, b);
          cg = std::max(cg, (lhs - rhs).cwiseAbs().maxCoeff());
        }
      }
    }
  }
  const double t = seconds_since(t0);
  const bool ok = sh < 1e-12 && hom < 1e-12 && cg < 1e-12 && t < 10.0;
  return {ok, "harmonics " + num(sh) + ", homomorphism " + num(hom) + ", intertwiner " + num(cg) + " (each < 1e-12), " +
                  num(t) + " s (< 10 s)"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tfk acceptance suite"};
  std::vector<int> only;
  app.add_option("--criterion", only, "Run only these criteria (1-11)")->check(CLI::Range(1, 11));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"equivariance law, L=1,2, 10 systems x 100 rotations", equivariance_law},
      {"order-0 invariance", order0_invariance},
      {"translation invariance", translation_invariance},
      {"gradient correctness", gradient_correctness},
      {"refinement field oracle equivalence", refinement_oracle},
      {"Kabsch exactness", kabsch_exactness},
      {"loss and metric closed forms", closed_forms},
      {"desk-scale force experiment", force_experiment},
      {"desk-scale refinement experiment", refinement_experiment},
      {"forward-pass scaling", scaling},
      {"SO(3) algebra suite", so3_suite},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.passed;
    std::cout << (o.passed ? "PASS" : "FAIL") << " [" << id << "] " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
