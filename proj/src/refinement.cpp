#include "tfk/refinement.hpp"

#include <cmath>

#include "tfk/error.hpp"
#include "tfk/random.hpp"

namespace tfk {

void StructurePair::validate() const {
  candidate.validate();
  target.validate();
  if (candidate.size() != target.size()) fail("correspondence mismatch: candidate and target atom counts differ");
  for (int i = 0; i < candidate.size(); ++i) {
    if (candidate.elements[i] != target.elements[i]) {
      fail("correspondence mismatch: element differs at atom " + std::to_string(i));
    }
  }
}

RefinementField refinement_field(const StructurePair& pair, int k) {
  pair.validate();
  if (k < 3) fail("refinement neighborhood size must be at least 3");
  const int n = pair.candidate.size();
  if (n < 4) fail("refinement needs at least 4 atoms");
  const Positions& pc = pair.candidate.positions;
  const Positions& pt = pair.target.positions;
  const auto neighbors = k_nearest_all(pc, k);

  RefinementField field;
  field.vectors.resize(n);
  field.degenerate.assign(n, 0);
  Positions mobile, fixed;
  for (int a = 0; a < n; ++a) {
    mobile.clear();
    fixed.clear();
    for (int j : neighbors[a]) {
      mobile.push_back(pt[j]);
      fixed.push_back(pc[j]);
    }
    const Superposition sup = kabsch_align(mobile, fixed);
    field.vectors[a] = pc[a] - sup.transform.apply(pt[a]);
    field.degenerate[a] = sup.degenerate ? 1 : 0;
  }
  return field;
}

AtomSystem apply_refinement(const AtomSystem& candidate, const Positions& vectors, double step) {
  if (static_cast<int>(vectors.size()) != candidate.size()) fail("refinement field size mismatch");
  AtomSystem out = candidate;
  for (int a = 0; a < out.size(); ++a) out.positions[a] -= step * vectors[a];
  out.targets.reset();
  return out;
}

double mean_local_deviation(const StructurePair& pair, int k) {
  const RefinementField f = refinement_field(pair, k);
  double sum = 0.0;
  for (const auto& v : f.vectors) sum += v.norm();
  return sum / static_cast<double>(f.vectors.size());
}

std::vector<RefinementExample> make_refinement_dataset(const std::vector<AtomSystem>& natives, double noise,
                                                       int candidates_per_target, std::uint64_t seed, int k) {
  if (!(noise >= 0.0)) fail("noise must be >= 0");
  if (candidates_per_target < 1) fail("candidates per target must be at least 1");
  std::vector<RefinementExample> out;
  out.reserve(natives.size() * candidates_per_target);
  for (std::size_t i = 0; i < natives.size(); ++i) {
    for (int j = 0; j < candidates_per_target; ++j) {
      Rng rng = substream(seed, "refinement-candidate", i * 1000003ULL + static_cast<std::uint64_t>(j));
      std::normal_distribution<double> gauss(0.0, 1.0);
      AtomSystem native = natives[i];
      native.targets.reset();
      AtomSystem cand = native;
      for (auto& p : cand.positions) p += noise * Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
      RigidTransform motion;
      motion.rotation = random_rotation(rng);
      std::uniform_real_distribution<double> shift(-10.0, 10.0);
      motion.translation = Eigen::Vector3d(shift(rng), shift(rng), shift(rng));
      cand = transformed(cand, motion);
      cand.identifier = native.identifier + "_c" + std::to_string(j);

      StructurePair pair{cand, native};
      const RefinementField field = refinement_field(pair, k);
      pair.candidate.targets = field.vectors;
      for (int a = 0; a < pair.candidate.size(); ++a) {
        if (field.degenerate[a]) pair.candidate.predict_mask[a] = 0;
      }
      out.push_back({std::move(pair)});
    }
  }
  return out;
}

}  // namespace tfk
