#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>

#include "tfk/geometry.hpp"

namespace tfk {

/// Pairs where either vector is shorter than this are left out of the
/// angle and relative-error means.
inline constexpr double kAngleEpsilon = 1e-9;

struct MetricsReport {
  static constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

  double magnitude_mae = kNaN;          // mean | |p| - |t| |
  double angle_mean = kNaN;             // degrees
  double tensor_mae = kNaN;             // mean |p - t|
  double pearson_magnitude = kNaN;
  double relative_tensor_error = kNaN;  // mean |p - t| / |t|
  int n_atoms = 0;
  int n_angle_pairs = 0;
  int n_angle_skipped = 0;
};

/// Angle between two vectors in degrees, clamped to [0, 180].
double angle_degrees(const Eigen::Vector3d& a, const Eigen::Vector3d& b);

/// Pearson correlation; NaN when either side has zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

/// Full metric suite over masked atoms. Throws when nothing is masked in.
MetricsReport metric_suite(PointSpan predictions, PointSpan targets, std::span<const std::uint8_t> mask);

/// Magnitude-only metrics for scalar (order-0) predictions.
MetricsReport magnitude_metrics(std::span<const double> predicted_magnitudes, PointSpan targets,
                                std::span<const std::uint8_t> mask);

enum class BaselineKind { kMeanMagnitude, kRandomDirection, kZero };

std::string baseline_name(BaselineKind kind);

/// Naive predictors. Mean-magnitude scores only the magnitude metric (the
/// constant is `reference_mean_magnitude`, defaulting to the targets' own
/// mean); random-direction scores only the angle; zero scores only the
/// tensor error.
MetricsReport naive_baseline(PointSpan targets, BaselineKind kind, std::uint64_t seed,
                             std::optional<double> reference_mean_magnitude = std::nullopt);

}  // namespace tfk
