#include "tfk/verification.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "tfk/error.hpp"
#include "tfk/gradcheck.hpp"
#include "tfk/random.hpp"

namespace tfk {

AtomSystem random_system(int atoms, double box, const std::vector<std::string>& vocabulary, std::uint64_t seed) {
  if (atoms < 1 || vocabulary.empty()) fail("random system needs atoms and a vocabulary");
  Rng rng = substream(seed, "random-system");
  std::uniform_real_distribution<double> u(0.0, box);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(vocabulary.size()) - 1);
  Positions pos;
  std::vector<std::string> el;
  int attempts = 0;
  while (static_cast<int>(pos.size()) < atoms) {
    if (++attempts > 1000 * atoms) fail("could not place random atoms; box too small");
    const Eigen::Vector3d p(u(rng), u(rng), u(rng));
    bool ok = true;
    for (const auto& q : pos) ok = ok && (p - q).norm() >= 0.5;
    if (!ok) continue;
    pos.push_back(p);
    el.push_back(vocabulary[pick(rng)]);
  }
  return make_system("random-" + std::to_string(seed), std::move(pos), std::move(el));
}

std::vector<LayerDeviation> layer_equivariance(const Model& model, const AtomSystem& system, int rotations,
                                               std::uint64_t seed) {
  const ForwardTape tape = model.forward_tape(system);
  std::vector<LayerDeviation> out;
  for (std::size_t i = 0; i < model.layers().size(); ++i) {
    out.push_back({model.layers()[i]->name(), std::string(layer_kind_name(model.layers()[i]->kind())), 0.0});
  }
  for (int r = 0; r < rotations; ++r) {
    RigidTransform t;
    t.rotation = random_rotation(substream(seed, "layer-rotation", r)());
    const Rotation& g = t.rotation;
    const SystemGraph rotated_graph = model.graph(transformed(system, t));
    for (std::size_t i = 0; i < model.layers().size(); ++i) {
      const FeatureMap& in = tape.activations[i];
      const FeatureMap& expected_plain = tape.activations[i + 1];
      const FeatureMap got = model.run_layer(i, rotate_features(in, g), rotated_graph);
      const FeatureMap expected = rotate_features(expected_plain, g);
      const double dev = max_abs_difference(got, expected) / (expected_plain.max_abs() + 1e-12);
      out[i].max_relative_deviation = std::max(out[i].max_relative_deviation, dev);
    }
  }
  return out;
}

double end_to_end_equivariance(const Model& model, const AtomSystem& system, int rotations, std::uint64_t seed) {
  const Prediction base = model.forward(system);
  double worst = 0.0;
  for (int r = 0; r < rotations; ++r) {
    RigidTransform t;
    t.rotation = random_rotation(substream(seed, "e2e-rotation", r)());
    const Prediction p = model.forward(transformed(system, t));
    if (model.config().output_order() == 1) {
      for (int a = 0; a < system.size(); ++a) {
        const double dev = (t.rotation * base.vectors[a] - p.vectors[a]).norm() / (base.vectors[a].norm() + 1e-12);
        worst = std::max(worst, dev);
      }
    } else {
      for (int a = 0; a < system.size(); ++a) worst = std::max(worst, std::abs(p.scalars[a] - base.scalars[a]));
    }
  }
  return worst;
}

double translation_deviation(const Model& model, const AtomSystem& system, int translations, double max_shift,
                             std::uint64_t seed) {
  const Prediction base = model.forward(system);
  Rng rng = substream(seed, "translation");
  std::uniform_real_distribution<double> u(-max_shift, max_shift);
  double worst = 0.0;
  for (int r = 0; r < translations; ++r) {
    RigidTransform t;
    t.translation = Eigen::Vector3d(u(rng), u(rng), u(rng));
    const Prediction p = model.forward(transformed(system, t));
    for (std::size_t a = 0; a < p.vectors.size(); ++a) worst = std::max(worst, (p.vectors[a] - base.vectors[a]).norm());
    for (std::size_t a = 0; a < p.scalars.size(); ++a) worst = std::max(worst, std::abs(p.scalars[a] - base.scalars[a]));
  }
  return worst;
}

namespace {

// Horn's closed-form quaternion superposition of mobile onto target.
std::pair<Eigen::Matrix3d, Eigen::Vector3d> horn_align(const Positions& mobile, const Positions& target) {
  Eigen::Vector3d cm = Eigen::Vector3d::Zero(), ct = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < mobile.size(); ++i) {
    cm += mobile[i];
    ct += target[i];
  }
  cm /= static_cast<double>(mobile.size());
  ct /= static_cast<double>(mobile.size());
  Eigen::Matrix3d s = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < mobile.size(); ++i) s += (mobile[i] - cm) * (target[i] - ct).transpose();
  const double sxx = s(0, 0), sxy = s(0, 1), sxz = s(0, 2);
  const double syx = s(1, 0), syy = s(1, 1), syz = s(1, 2);
  const double szx = s(2, 0), szy = s(2, 1), szz = s(2, 2);
  Eigen::Matrix4d n;
  n << sxx + syy + szz, syz - szy, szx - sxz, sxy - syx,
       syz - szy, sxx - syy - szz, sxy + syx, szx + sxz,
       szx - sxz, sxy + syx, -sxx + syy - szz, syz + szy,
       sxy - syx, szx + sxz, syz + szy, -sxx - syy + szz;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(n);
  const Eigen::Vector4d q = eig.eigenvectors().col(3);
  const Eigen::Quaterniond quat(q(0), q(1), q(2), q(3));
  const Eigen::Matrix3d r = quat.normalized().toRotationMatrix();
  return {r, ct - r * cm};
}

}  // namespace

Positions reference_refinement_field(const StructurePair& pair, int k) {
  const Positions& pc = pair.candidate.positions;
  const Positions& pt = pair.target.positions;
  const int n = static_cast<int>(pc.size());
  Positions out(n);
  for (int a = 0; a < n; ++a) {
    std::vector<int> idx;
    for (int j = 0; j < n; ++j) {
      if (j != a) idx.push_back(j);
    }
    std::sort(idx.begin(), idx.end(), [&](int i, int j) {
      const double di = (pc[i] - pc[a]).squaredNorm(), dj = (pc[j] - pc[a]).squaredNorm();
      return di != dj ? di < dj : i < j;
    });
    idx.resize(std::min<std::size_t>(idx.size(), k));
    Positions mobile, target;
    for (int j : idx) {
      mobile.push_back(pt[j]);
      target.push_back(pc[j]);
    }
    const auto [r, t] = horn_align(mobile, target);
    out[a] = pc[a] - (r * pt[a] + t);
  }
  return out;
}

bool VerificationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

VerificationSettings verification_level(const std::string& level) {
  VerificationSettings s;
  if (level == "quick") {
    s.systems = 1;
    s.rotations = 5;
    s.atoms = 30;
  } else if (level == "full") {
    s.systems = 10;
    s.rotations = 100;
    s.atoms = 60;
  } else {
    fail("unknown verification level '" + level + "' (expected quick or full)");
  }
  return s;
}

namespace {

CheckResult make_check(std::string name, double value, double threshold, std::string detail = {}) {
  return {std::move(name), std::isfinite(value) && value < threshold, value, threshold, std::move(detail)};
}

CheckResult check_sh(std::uint64_t seed) {
  Rng rng = substream(seed, "verify-sh");
  std::normal_distribution<double> gauss;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Rotation g = random_rotation(rng);
    const Eigen::Vector3d u = Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng)).normalized();
    for (int l = 0; l <= kMaxOrder; ++l) {
      const Eigen::VectorXd lhs = real_spherical_harmonics(l, (g * u).normalized());
      worst = std::max(worst, (lhs - wigner_matrix(l, g) * real_spherical_harmonics(l, u)).norm());
    }
  }
  return make_check("so3.sh_equivariance", worst, 1e-9);
}

CheckResult check_homomorphism(std::uint64_t seed) {
  Rng rng = substream(seed, "verify-hom");
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const Rotation a = random_rotation(rng), b = random_rotation(rng);
    for (int l = 0; l <= kMaxOrder; ++l) {
      worst = std::max(worst, (wigner_matrix(l, a * b) - wigner_matrix(l, a) * wigner_matrix(l, b)).cwiseAbs().maxCoeff());
    }
  }
  return make_check("so3.wigner_homomorphism", worst, 1e-9);
}

CheckResult check_cg(std::uint64_t seed) {
  Rng rng = substream(seed, "verify-cg");
  double worst = 0.0;
  for (int l1 = 0; l1 <= kMaxOrder; ++l1)
    for (int l2 = 0; l2 <= kMaxOrder; ++l2)
      for (int l3 = 0; l3 <= kMaxOrder; ++l3) {
        const CGTensor& c = clebsch_gordan(l1, l2, l3);
        if (c.is_zero()) continue;
        const int d1 = order_dim(l1), d2 = order_dim(l2), d3 = order_dim(l3);
        for (int r = 0; r < 20; ++r) {
          const Rotation g = random_rotation(rng);
          const Eigen::MatrixXd D1 = wigner_matrix(l1, g), D2 = wigner_matrix(l2, g), D3 = wigner_matrix(l3, g);
          // sum_{m1 m2} C(m1, m2, m3') D1[m1, i] D2[m2, j] = sum_m3 D3[m3', m3] C(i, j, m3)
          for (int i = 0; i < d1; ++i)
            for (int j = 0; j < d2; ++j)
              for (int m3p = 0; m3p < d3; ++m3p) {
                double lhs = 0.0, rhs = 0.0;
                for (int m1 = 0; m1 < d1; ++m1)
                  for (int m2 = 0; m2 < d2; ++m2) lhs += c(m1, m2, m3p) * D1(m1, i) * D2(m2, j);
                for (int m3 = 0; m3 < d3; ++m3) rhs += D3(m3p, m3) * c(i, j, m3);
                worst = std::max(worst, std::abs(lhs - rhs));
              }
        }
      }
  return make_check("so3.cg_intertwiner", worst, 1e-9);
}

CheckResult check_kabsch(std::uint64_t seed) {
  Rng rng = substream(seed, "verify-kabsch");
  std::normal_distribution<double> gauss;
  double worst = 0.0;
  double worst_det = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int n = 3 + i % 20;
    const double thin = (i % 4 == 0) ? 1e-4 : 1.0;
    Positions mobile(n), target(n);
    const Rotation g = random_rotation(rng);
    const Eigen::Vector3d t(10 * gauss(rng), 10 * gauss(rng), 10 * gauss(rng));
    for (int j = 0; j < n; ++j) {
      mobile[j] = Eigen::Vector3d(5 * gauss(rng), 5 * gauss(rng), 5 * thin * gauss(rng));
      target[j] = g * mobile[j] + t;
    }
    const Superposition s = kabsch_align(mobile, target);
    Positions moved(n);
    for (int j = 0; j < n; ++j) moved[j] = s.transform.apply(mobile[j]);
    worst = std::max(worst, rmsd(moved, target));
    worst_det = std::max(worst_det, std::abs(s.transform.rotation.matrix().determinant() - 1.0));
  }
  return make_check("geometry.kabsch_recovery", std::max(worst, worst_det), 1e-8,
                    "max post-alignment RMSD and |det - 1|");
}

StructurePair random_pair(Rng& rng, int n) {
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> u(0.0, 8.0);
  Positions native(n), cand(n);
  std::vector<std::string> el(n, "C");
  for (int j = 0; j < n; ++j) {
    native[j] = Eigen::Vector3d(u(rng), u(rng), u(rng));
    cand[j] = native[j] + 0.4 * Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
  }
  return {make_system("c", cand, el), make_system("t", native, el)};
}

std::vector<CheckResult> check_refinement(std::uint64_t seed) {
  Rng rng = substream(seed, "verify-refinement");
  const int ks[] = {3, 5, 10};
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const int n = 6 + static_cast<int>(rng() % 35);
    const StructurePair pair = random_pair(rng, n);
    const int k = ks[i % 3];
    const RefinementField f = refinement_field(pair, k);
    const Positions ref = reference_refinement_field(pair, k);
    for (int a = 0; a < n; ++a) worst = std::max(worst, (f.vectors[a] - ref[a]).norm());
  }
  double rigid = 0.0;
  for (int i = 0; i < 10; ++i) {
    StructurePair pair = random_pair(rng, 30);
    RigidTransform t;
    t.rotation = random_rotation(rng);
    t.translation = Eigen::Vector3d(50.0, -20.0, 7.0);
    pair.candidate = transformed(pair.target, t);
    for (const auto& v : refinement_field(pair, 10).vectors) rigid = std::max(rigid, v.norm());
  }
  return {make_check("refinement.oracle_equivalence", worst, 1e-10),
          make_check("refinement.rigid_annihilation", rigid, 1e-8)};
}

}  // namespace

VerificationReport run_verification(const VerificationSettings& settings) {
  VerificationReport report;
  const std::uint64_t seed = settings.seed;
  report.checks.push_back(check_sh(seed));
  report.checks.push_back(check_homomorphism(seed));
  report.checks.push_back(check_cg(seed));
  report.checks.push_back(check_kabsch(seed));
  for (auto& c : check_refinement(seed)) report.checks.push_back(std::move(c));

  for (int lmax = 0; lmax <= kMaxOrder; ++lmax) {
    ModelConfig cfg;
    cfg.max_order = lmax;
    cfg.seed = substream(seed, "verify-model", lmax)();
    cfg.inject_order1_bias = settings.inject_fault;
    const Model model(cfg);
    const std::string tag = "L" + std::to_string(lmax);

    std::vector<LayerDeviation> worst_layers;
    double e2e = 0.0, trans = 0.0;
    for (int s = 0; s < settings.systems; ++s) {
      const AtomSystem sys = random_system(settings.atoms, 12.0, cfg.vocabulary, substream(seed, "verify-system", s)());
      const auto layers = layer_equivariance(model, sys, std::max(1, settings.rotations / 10), seed + s);
      if (worst_layers.empty()) worst_layers = layers;
      for (std::size_t i = 0; i < layers.size(); ++i) {
        worst_layers[i].max_relative_deviation =
            std::max(worst_layers[i].max_relative_deviation, layers[i].max_relative_deviation);
      }
      e2e = std::max(e2e, end_to_end_equivariance(model, sys, settings.rotations, seed + s));
      trans = std::max(trans, translation_deviation(model, sys, 5, 100.0, seed + s));
    }
    const double layer_tol = lmax == 0 ? 1e-9 : 1e-6;
    std::string offending;
    double layer_worst = 0.0;
    for (const auto& l : worst_layers) {
      report.layers.emplace_back(tag, l);
      if (l.max_relative_deviation >= layer_tol && offending.empty()) offending = l.layer;
      layer_worst = std::max(layer_worst, l.max_relative_deviation);
    }
    report.checks.push_back(make_check("net." + tag + ".layer_equivariance", layer_worst, layer_tol,
                                       offending.empty() ? "" : "first failing layer: " + offending));
    if (lmax == 0) {
      report.checks.push_back(make_check("net.L0.rotation_invariance", e2e, 1e-9));
    } else {
      report.checks.push_back(make_check("net." + tag + ".equivariance", e2e, 1e-6));
    }
    report.checks.push_back(make_check("net." + tag + ".translation_invariance", trans, 1e-9));
  }

  ModelConfig gcfg;
  gcfg.max_order = 2;
  gcfg.conv_widths = {6, 4, 4};
  gcfg.filters = {6, 4, 1};
  gcfg.seed = substream(seed, "verify-grad-model")();
  gcfg.inject_order1_bias = settings.inject_fault;
  Model gmodel(gcfg);
  AtomSystem gsys = random_system(12, 6.0, gcfg.vocabulary, substream(seed, "verify-grad-system")());
  Rng trng = substream(seed, "verify-grad-targets");
  std::normal_distribution<double> gauss;
  Positions targets(gsys.size());
  for (auto& t : targets) t = Eigen::Vector3d(gauss(trng), gauss(trng), gauss(trng));
  gsys.targets = targets;
  GradientCheckSettings gs;
  gs.seed = seed;
  const GradientCheckReport gr = check_gradients(gmodel, gsys, gs);
  for (const auto& k : gr.kinds) {
    report.checks.push_back(make_check("training.gradient." + k.kind, k.max_relative_error, 1e-4,
                                       std::to_string(k.sampled) + " parameters, worst " + k.worst_parameter));
  }
  return report;
}

}  // namespace tfk
