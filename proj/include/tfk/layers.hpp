#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "tfk/features.hpp"
#include "tfk/graph.hpp"
#include "tfk/parameters.hpp"

namespace tfk {

enum class LayerKind { kEmbedding, kConvolution, kSelfInteraction, kNonlinearity, kNorm };

std::string_view layer_kind_name(LayerKind kind);

/// One stage of the network. Layers are immutable after construction and
/// hold only shapes and parameter ids; values live in a ParameterStore.
class Layer {
 public:
  Layer(std::string name, Channels input) : name_(std::move(name)), input_(input) {}
  virtual ~Layer() = default;

  const std::string& name() const { return name_; }
  const Channels& input_channels() const { return input_; }
  const Channels& output_channels() const { return output_; }
  virtual LayerKind kind() const = 0;

  virtual FeatureMap forward(const FeatureMap& in, const SystemGraph& graph, const ParameterStore& params) const = 0;

  /// Accumulates parameter gradients into `grads` and returns dL/d(in).
  virtual FeatureMap backward(const FeatureMap& in, const FeatureMap& out, const FeatureMap& grad_out,
                              const SystemGraph& graph, const ParameterStore& params,
                              ParameterStore& grads) const = 0;

 protected:
  void check_input(const FeatureMap& in) const;

  std::string name_;
  Channels input_;
  Channels output_{};
};

/// One-hot order-0 encoding of each atom's element index.
class Embedding final : public Layer {
 public:
  Embedding(std::string name, int vocabulary_size);
  LayerKind kind() const override { return LayerKind::kEmbedding; }
  FeatureMap forward(const FeatureMap& in, const SystemGraph& graph, const ParameterStore& params) const override;
  FeatureMap backward(const FeatureMap& in, const FeatureMap& out, const FeatureMap& grad_out, const SystemGraph& graph,
                      const ParameterStore& params, ParameterStore& grads) const override;
};

/// Per-order channel mixing shared by all 2l+1 components; bias only at
/// order 0. Output orders must be a subset of input orders.
class SelfInteraction final : public Layer {
 public:
  SelfInteraction(std::string name, Channels input, Channels output, ParameterStore& store,
                  bool inject_order1_bias = false);
  LayerKind kind() const override { return LayerKind::kSelfInteraction; }
  FeatureMap forward(const FeatureMap& in, const SystemGraph& graph, const ParameterStore& params) const override;
  FeatureMap backward(const FeatureMap& in, const FeatureMap& out, const FeatureMap& grad_out, const SystemGraph& graph,
                      const ParameterStore& params, ParameterStore& grads) const override;

 private:
  std::array<int, kMaxOrder + 1> weight_id_{-1, -1, -1};
  int bias_id_ = -1;
  bool fault_ = false;
};

/// Point convolution over graph edges. For each path (l_in, l_f, l_out)
/// allowed by the selection rule with l_f, l_out <= lmax:
///   out[a, c, l_out] += sum_n R_{path,c}(r_an) CG(x[n, c, l_in] (x) Y_{l_f}(r_hat_an)),
/// with R a learned combination of the radial basis. Channels are mixed
/// only by the surrounding self-interactions. A learned per-channel self
/// term keeps each atom's own features: out[a, c, l] += s_{l,c} x[a, c, l].
class Convolution final : public Layer {
 public:
  struct Path {
    int l_in;
    int l_filter;
    int l_out;
  };

  Convolution(std::string name, Channels input, int lmax, int basis_size, ParameterStore& store);
  LayerKind kind() const override { return LayerKind::kConvolution; }
  FeatureMap forward(const FeatureMap& in, const SystemGraph& graph, const ParameterStore& params) const override;
  FeatureMap backward(const FeatureMap& in, const FeatureMap& out, const FeatureMap& grad_out, const SystemGraph& graph,
                      const ParameterStore& params, ParameterStore& grads) const override;

  const std::vector<Path>& paths() const { return paths_; }

 private:
  // Fills per-path (2l_out+1) x (2l_in+1) coupling matrices for one edge.
  void edge_matrices(const double* harmonics, int lmax_graph, double* buffer) const;

  int width_ = 0;
  int basis_size_ = 0;
  std::vector<Path> paths_;
  std::vector<int> matrix_offset_;
  int matrix_total_ = 0;
  int radial_id_ = -1;
  std::array<int, kMaxOrder + 1> self_id_{-1, -1, -1};
};

/// Per-atom normalization across channels, acting on norms only.
/// Order 0: y_c = g_c (x_c - mean) / sqrt(var + eps) + b_c.
/// Order l > 0: y_c = g_c v_c / sqrt(mean_c |v_c|^2 + eps).
class EquivariantNorm final : public Layer {
 public:
  EquivariantNorm(std::string name, Channels input, double epsilon, ParameterStore& store);
  LayerKind kind() const override { return LayerKind::kNorm; }
  FeatureMap forward(const FeatureMap& in, const SystemGraph& graph, const ParameterStore& params) const override;
  FeatureMap backward(const FeatureMap& in, const FeatureMap& out, const FeatureMap& grad_out, const SystemGraph& graph,
                      const ParameterStore& params, ParameterStore& grads) const override;

 private:
  double epsilon_;
  std::array<int, kMaxOrder + 1> gain_id_{-1, -1, -1};
  int shift_id_ = -1;
};

/// Shifted softplus eta(x) = log(1 + e^x) - log 2.
double shifted_softplus(double x);

/// Order 0: eta(x + b). Order l > 0: eta(|v| + b) v / (|v| + eps_norm).
class GatedNonlinearity final : public Layer {
 public:
  static constexpr double kEpsNorm = 1e-8;

  GatedNonlinearity(std::string name, Channels input, ParameterStore& store);
  LayerKind kind() const override { return LayerKind::kNonlinearity; }
  FeatureMap forward(const FeatureMap& in, const SystemGraph& graph, const ParameterStore& params) const override;
  FeatureMap backward(const FeatureMap& in, const FeatureMap& out, const FeatureMap& grad_out, const SystemGraph& graph,
                      const ParameterStore& params, ParameterStore& grads) const override;

 private:
  std::array<int, kMaxOrder + 1> bias_id_{-1, -1, -1};
};

}  // namespace tfk
