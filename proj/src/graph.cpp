#include "tfk/graph.hpp"

#include <cmath>

#include "tfk/error.hpp"

namespace tfk {

void RadialBasis::evaluate(double r, double* out) const {
  if (!(r >= 0.0)) fail("radial basis needs r >= 0");
  const double inv = 1.0 / (2.0 * width() * width());
  for (int b = 0; b < size; ++b) {
    const double d = r - center(b);
    out[b] = std::exp(-d * d * inv);
  }
}

std::vector<double> radial_basis(double r, const RadialBasis& basis) {
  std::vector<double> out(basis.size);
  basis.evaluate(r, out.data());
  return out;
}

SystemGraph build_graph(const AtomSystem& system, std::vector<int> element_index, int k, int lmax,
                        const RadialBasis& basis) {
  const int n = system.size();
  if (static_cast<int>(element_index.size()) != n) fail("element index size mismatch");
  SystemGraph g;
  g.atoms = n;
  g.lmax = lmax;
  g.basis_size = basis.size;
  g.element_index = std::move(element_index);
  g.offsets.assign(n + 1, 0);
  if (n < 2) return g;

  const auto lists = k_nearest_all(system.positions, k);
  for (int a = 0; a < n; ++a) g.offsets[a + 1] = g.offsets[a] + static_cast<int>(lists[a].size());
  const int edges = g.offsets[n];
  const int nh = (lmax + 1) * (lmax + 1);
  g.neighbor.resize(edges);
  g.distance.resize(edges);
  g.harmonics.resize(static_cast<std::size_t>(edges) * nh);
  g.basis.resize(static_cast<std::size_t>(edges) * basis.size);
  for (int a = 0; a < n; ++a) {
    int e = g.offsets[a];
    for (int nb : lists[a]) {
      const Eigen::Vector3d rel = system.positions[nb] - system.positions[a];
      const double r = rel.norm();
      if (r <= 1e-9) fail("coincident atoms " + std::to_string(a) + " and " + std::to_string(nb));
      g.neighbor[e] = nb;
      g.distance[e] = r;
      spherical_harmonics_packed(lmax, rel / r, g.harmonics.data() + static_cast<std::size_t>(e) * nh);
      basis.evaluate(r, g.basis.data() + static_cast<std::size_t>(e) * basis.size);
      ++e;
    }
  }
  return g;
}

}  // namespace tfk
