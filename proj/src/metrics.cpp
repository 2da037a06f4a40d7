#include "tfk/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tfk/error.hpp"
#include "tfk/random.hpp"

namespace tfk {

double angle_degrees(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const double c = a.dot(b) / (a.norm() * b.norm());
  return std::acos(std::clamp(c, -1.0, 1.0)) * 180.0 / std::numbers::pi;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail("pearson: size mismatch");
  const std::size_t n = x.size();
  if (n < 2) return MetricsReport::kNaN;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return MetricsReport::kNaN;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

namespace {

void check_shapes(std::size_t a, std::size_t b, std::size_t mask) {
  if (a != b || b != mask) fail("metric inputs differ in length");
}

}  // namespace

MetricsReport metric_suite(PointSpan predictions, PointSpan targets, std::span<const std::uint8_t> mask) {
  check_shapes(predictions.size(), targets.size(), mask.size());
  MetricsReport r;
  double mag = 0.0, tensor = 0.0, angle = 0.0, rel = 0.0;
  int rel_count = 0;
  std::vector<double> pm, tm;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (!mask[i]) continue;
    const Eigen::Vector3d& p = predictions[i];
    const Eigen::Vector3d& t = targets[i];
    const double np = p.norm(), nt = t.norm(), diff = (p - t).norm();
    ++r.n_atoms;
    mag += std::abs(np - nt);
    tensor += diff;
    pm.push_back(np);
    tm.push_back(nt);
    if (np < kAngleEpsilon || nt < kAngleEpsilon) {
      ++r.n_angle_skipped;
    } else {
      angle += angle_degrees(p, t);
      ++r.n_angle_pairs;
    }
    if (nt > kAngleEpsilon) {
      rel += diff / nt;
      ++rel_count;
    }
  }
  if (r.n_atoms == 0) fail("all atoms are masked out");
  r.magnitude_mae = mag / r.n_atoms;
  r.tensor_mae = tensor / r.n_atoms;
  if (r.n_angle_pairs > 0) r.angle_mean = angle / r.n_angle_pairs;
  if (rel_count > 0) r.relative_tensor_error = rel / rel_count;
  r.pearson_magnitude = pearson(pm, tm);
  return r;
}

MetricsReport magnitude_metrics(std::span<const double> predicted, PointSpan targets,
                                std::span<const std::uint8_t> mask) {
  check_shapes(predicted.size(), targets.size(), mask.size());
  MetricsReport r;
  double mag = 0.0;
  std::vector<double> pm, tm;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (!mask[i]) continue;
    const double nt = targets[i].norm();
    ++r.n_atoms;
    mag += std::abs(predicted[i] - nt);
    pm.push_back(predicted[i]);
    tm.push_back(nt);
  }
  if (r.n_atoms == 0) fail("all atoms are masked out");
  r.magnitude_mae = mag / r.n_atoms;
  r.pearson_magnitude = pearson(pm, tm);
  return r;
}

std::string baseline_name(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kMeanMagnitude: return "naive_mean_magnitude";
    case BaselineKind::kRandomDirection: return "naive_random_direction";
    case BaselineKind::kZero: return "naive_zero";
  }
  return "naive";
}

MetricsReport naive_baseline(PointSpan targets, BaselineKind kind, std::uint64_t seed,
                             std::optional<double> reference_mean_magnitude) {
  if (targets.empty()) fail("naive baseline needs targets");
  MetricsReport r;
  r.n_atoms = static_cast<int>(targets.size());
  switch (kind) {
    case BaselineKind::kMeanMagnitude: {
      double mean = 0.0;
      for (const auto& t : targets) mean += t.norm();
      mean /= targets.size();
      const double constant = reference_mean_magnitude.value_or(mean);
      double mae = 0.0;
      for (const auto& t : targets) mae += std::abs(constant - t.norm());
      r.magnitude_mae = mae / targets.size();
      break;
    }
    case BaselineKind::kRandomDirection: {
      Rng rng = substream(seed, "baseline-direction");
      std::normal_distribution<double> normal(0.0, 1.0);
      double angle = 0.0;
      for (const auto& t : targets) {
        Eigen::Vector3d d;
        do {
          d = Eigen::Vector3d(normal(rng), normal(rng), normal(rng));
        } while (d.norm() < 1e-12);
        if (t.norm() < kAngleEpsilon) {
          ++r.n_angle_skipped;
          continue;
        }
        angle += angle_degrees(d, t);
        ++r.n_angle_pairs;
      }
      if (r.n_angle_pairs > 0) r.angle_mean = angle / r.n_angle_pairs;
      break;
    }
    case BaselineKind::kZero: {
      double tensor = 0.0;
      for (const auto& t : targets) tensor += t.norm();
      r.tensor_mae = tensor / targets.size();
      break;
    }
  }
  return r;
}

}  // namespace tfk
