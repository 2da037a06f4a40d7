#include "tfk/lennard_jones.hpp"

#include <cmath>
#include <vector>

#include "tfk/error.hpp"

namespace tfk {

namespace {

constexpr double kCoincident = 1e-6;

struct PairTerm {
  double energy;
  double force_over_r;  // F_i = force_over_r * (x_i - x_j)
};

PairTerm pair_term(double r2, double eps, double sigma) {
  const double s2 = sigma * sigma / r2;
  const double s6 = s2 * s2 * s2;
  const double s12 = s6 * s6;
  return {4.0 * eps * (s12 - s6), 24.0 * eps * (2.0 * s12 - s6) / r2};
}

std::vector<LJSpecies> species_of(std::span<const std::string> elements) {
  std::vector<LJSpecies> out;
  out.reserve(elements.size());
  for (const auto& e : elements) out.push_back(lj_species(e));
  return out;
}

template <typename Mix>
Positions forces_impl(PointSpan x, const LJParams& params, Mix&& mix) {
  params.validate();
  const std::size_t n = x.size();
  Positions f(n, Eigen::Vector3d::Zero());
  const double rc2 = params.cutoff * params.cutoff;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const Eigen::Vector3d d = x[i] - x[j];
      const double r2 = d.squaredNorm();
      if (r2 <= kCoincident * kCoincident) {
        fail("singularity: atoms " + std::to_string(i) + " and " + std::to_string(j) + " coincide");
      }
      if (r2 >= rc2) continue;
      const auto [eps, sigma] = mix(i, j);
      const Eigen::Vector3d fij = pair_term(r2, eps, sigma).force_over_r * d;
      f[i] += fij;
      f[j] -= fij;
    }
  }
  return f;
}

template <typename Mix>
double energy_impl(PointSpan x, const LJParams& params, Mix&& mix) {
  params.validate();
  const double rc2 = params.cutoff * params.cutoff;
  double e = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double r2 = (x[i] - x[j]).squaredNorm();
      if (r2 <= kCoincident * kCoincident) fail("singularity: coincident atoms");
      if (r2 >= rc2) continue;
      const auto [eps, sigma] = mix(i, j);
      e += pair_term(r2, eps, sigma).energy;
    }
  }
  return e;
}

}  // namespace

void LJParams::validate() const {
  if (!(epsilon > 0.0) || !(sigma > 0.0) || !(cutoff > sigma)) {
    fail("invalid Lennard-Jones parameters (need epsilon > 0, sigma > 0, cutoff > sigma)");
  }
}

LJSpecies lj_species(const std::string& element) {
  if (element == "C") return {1.0, 1.0};
  if (element == "H") return {0.5, 0.8};
  if (element == "O") return {1.3, 0.9};
  if (element == "N") return {1.1, 0.95};
  if (element == "S") return {1.6, 1.1};
  if (element == "P") return {1.5, 1.15};
  fail("no Lennard-Jones parameters for element '" + element + "'");
}

Positions lj_forces(PointSpan positions, const LJParams& params) {
  return forces_impl(positions, params, [&](std::size_t, std::size_t) { return std::pair{params.epsilon, params.sigma}; });
}

double lj_energy(PointSpan positions, const LJParams& params) {
  return energy_impl(positions, params, [&](std::size_t, std::size_t) { return std::pair{params.epsilon, params.sigma}; });
}

Positions lj_forces(PointSpan positions, std::span<const std::string> elements, const LJParams& params) {
  if (elements.size() != positions.size()) fail("element count does not match position count");
  const auto sp = species_of(elements);
  return forces_impl(positions, params, [&](std::size_t i, std::size_t j) {
    return std::pair{params.epsilon * std::sqrt(sp[i].epsilon_scale * sp[j].epsilon_scale),
                     params.sigma * 0.5 * (sp[i].sigma_scale + sp[j].sigma_scale)};
  });
}

double lj_energy(PointSpan positions, std::span<const std::string> elements, const LJParams& params) {
  if (elements.size() != positions.size()) fail("element count does not match position count");
  const auto sp = species_of(elements);
  return energy_impl(positions, params, [&](std::size_t i, std::size_t j) {
    return std::pair{params.epsilon * std::sqrt(sp[i].epsilon_scale * sp[j].epsilon_scale),
                     params.sigma * 0.5 * (sp[i].sigma_scale + sp[j].sigma_scale)};
  });
}

}  // namespace tfk
