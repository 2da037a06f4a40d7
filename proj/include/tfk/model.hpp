#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "tfk/generators.hpp"
#include "tfk/graph.hpp"
#include "tfk/layers.hpp"

namespace tfk {

/// Network configuration. The default layer sequence is
///
///   embed
///   3 x [ si_in -> conv -> norm -> gate -> si_out ]
///
/// i.e. six self-interaction layers. Convolutions run at `conv_widths`
/// channels; each block's closing self-interaction emits `filters` channels,
/// the last one a single channel at the output order (1 for vector models,
/// 0 for the max_order = 0 magnitude model).
struct ModelConfig {
  int max_order = 1;
  std::vector<std::string> vocabulary = kProteinVocabulary;
  std::array<int, 3> conv_widths = {24, 12, 12};
  std::array<int, 3> filters = {24, 12, 1};
  int neighbors = 50;
  RadialBasis radial;
  double norm_epsilon = 1e-6;
  /// Multiplies the raw network output (task units per unit activation).
  double output_scale = 1.0;
  std::uint64_t seed = 0;
  /// Debug fault: adds a constant to every order-1 component in the first
  /// self-interaction after a convolution. Breaks equivariance on purpose.
  bool inject_order1_bias = false;

  void validate() const;
  int output_order() const { return max_order >= 1 ? 1 : 0; }
};

/// Per-atom network output: vectors for max_order >= 1, scalars otherwise.
struct Prediction {
  Positions vectors;
  std::vector<double> scalars;
};

/// Activations recorded by a forward pass for reverse-mode differentiation.
struct ForwardTape {
  SystemGraph graph;
  std::vector<FeatureMap> activations;  // activations[i] is the input of layer i
  Prediction prediction;
};

class Model {
 public:
  explicit Model(ModelConfig config);

  const ModelConfig& config() const { return config_; }
  const std::vector<std::shared_ptr<const Layer>>& layers() const { return layers_; }
  const ParameterStore& parameters() const { return params_; }
  ParameterStore& parameters() { return params_; }
  void set_output_scale(double scale) { config_.output_scale = scale; }

  /// Resets parameters to the seed-determined initialization.
  void initialize(std::uint64_t seed);

  std::vector<int> element_indices(const AtomSystem& system) const;
  SystemGraph graph(const AtomSystem& system) const;

  Prediction forward(const AtomSystem& system) const;
  ForwardTape forward_tape(const AtomSystem& system) const;

  /// Parameter gradients given dL/d(prediction), in the same layout as the
  /// prediction (vectors or scalars).
  ParameterStore backward(const ForwardTape& tape, const Prediction& grad_prediction) const;

  /// Runs a single layer on explicit inputs (used by layer-level checks).
  FeatureMap run_layer(std::size_t index, const FeatureMap& in, const SystemGraph& graph) const;

 private:
  Prediction read_output(const FeatureMap& out) const;

  ModelConfig config_;
  std::vector<std::shared_ptr<const Layer>> layers_;
  ParameterStore params_;
};

/// Builds and initializes a model from `config.seed`.
Model build_model(const ModelConfig& config);

}  // namespace tfk
