#include "tfk/model.hpp"

#include <cmath>

#include "tfk/error.hpp"
#include "tfk/random.hpp"

namespace tfk {

namespace {

Channels uniform_channels(const Channels& present, int width) {
  Channels c{};
  for (int l = 0; l <= kMaxOrder; ++l) c[l] = present[l] > 0 ? width : 0;
  return c;
}

}  // namespace

void ModelConfig::validate() const {
  if (max_order < 0 || max_order > kMaxOrder) fail("max order must be in 0..2");
  if (vocabulary.empty()) fail("empty element vocabulary");
  for (int b = 0; b < 3; ++b) {
    if (conv_widths[b] < 1 || filters[b] < 1) fail("filter counts must be at least 1");
  }
  if (neighbors < 1) fail("neighbor count must be at least 1");
  if (radial.size < 1 || !(radial.cutoff > 0.0)) fail("invalid radial basis");
  if (!(norm_epsilon > 0.0)) fail("norm epsilon must be positive");
  if (!std::isfinite(output_scale) || output_scale == 0.0) fail("output scale must be finite and nonzero");
}

Model::Model(ModelConfig config) : config_(std::move(config)) {
  config_.validate();
  const int lmax = config_.max_order;
  auto embed = std::make_shared<Embedding>("embed", static_cast<int>(config_.vocabulary.size()));
  Channels current = embed->output_channels();
  layers_.push_back(embed);

  int si_count = 0;
  for (int b = 0; b < 3; ++b) {
    const bool last = b == 2;
    const std::string tag = std::to_string(b + 1);
    ++si_count;
    auto si_in = std::make_shared<SelfInteraction>("si" + std::to_string(si_count), current,
                                                   uniform_channels(current, config_.conv_widths[b]), params_,
                                                   config_.inject_order1_bias && si_count == 2);
    current = si_in->output_channels();
    layers_.push_back(si_in);

    auto conv = std::make_shared<Convolution>("conv" + tag, current, lmax, config_.radial.size, params_);
    current = conv->output_channels();
    layers_.push_back(conv);

    auto norm = std::make_shared<EquivariantNorm>("norm" + tag, current, config_.norm_epsilon, params_);
    layers_.push_back(norm);
    auto gate = std::make_shared<GatedNonlinearity>("gate" + tag, current, params_);
    layers_.push_back(gate);

    Channels out_channels = uniform_channels(current, config_.filters[b]);
    if (last) {
      out_channels = Channels{};
      out_channels[config_.output_order()] = config_.filters[b];
    }
    ++si_count;
    auto si_out = std::make_shared<SelfInteraction>("si" + std::to_string(si_count), current, out_channels, params_,
                                                    config_.inject_order1_bias && si_count == 2);
    current = si_out->output_channels();
    layers_.push_back(si_out);
  }
  initialize(config_.seed);
}

void Model::initialize(std::uint64_t seed) {
  config_.seed = seed;
  for (int i = 0; i < params_.size(); ++i) {
    ParameterArray& p = params_[i];
    switch (p.init) {
      case ParamInit::kZeros: std::fill(p.values.begin(), p.values.end(), 0.0); break;
      case ParamInit::kOnes: std::fill(p.values.begin(), p.values.end(), 1.0); break;
      case ParamInit::kUniformFanIn: {
        Rng rng = substream(seed, "init", static_cast<std::uint64_t>(i));
        const double bound = 1.0 / std::sqrt(static_cast<double>(p.fan_in));
        std::uniform_real_distribution<double> u(-bound, bound);
        for (double& v : p.values) v = u(rng);
        break;
      }
    }
  }
}

std::vector<int> Model::element_indices(const AtomSystem& system) const {
  std::vector<int> idx(system.elements.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    int found = -1;
    for (std::size_t v = 0; v < config_.vocabulary.size(); ++v) {
      if (config_.vocabulary[v] == system.elements[i]) found = static_cast<int>(v);
    }
    if (found < 0) fail("unknown element '" + system.elements[i] + "' not in model vocabulary");
    idx[i] = found;
  }
  return idx;
}

SystemGraph Model::graph(const AtomSystem& system) const {
  return build_graph(system, element_indices(system), config_.neighbors, config_.max_order, config_.radial);
}

Prediction Model::read_output(const FeatureMap& out) const {
  Prediction p;
  const double s = config_.output_scale;
  if (config_.output_order() == 1) {
    p.vectors.resize(out.atoms());
    for (int a = 0; a < out.atoms(); ++a) {
      const double* v = out.at(a, 1, 0);  // harmonic order (y, z, x)
      p.vectors[a] = s * Eigen::Vector3d(v[2], v[0], v[1]);
    }
  } else {
    p.scalars.resize(out.atoms());
    for (int a = 0; a < out.atoms(); ++a) p.scalars[a] = s * out.at(a, 0, 0)[0];
  }
  return p;
}

ForwardTape Model::forward_tape(const AtomSystem& system) const {
  if (system.size() < 2) fail("forward pass needs at least 2 atoms");
  ForwardTape tape;
  tape.graph = graph(system);
  tape.activations.reserve(layers_.size() + 1);
  tape.activations.emplace_back();
  for (const auto& layer : layers_) {
    tape.activations.push_back(layer->forward(tape.activations.back(), tape.graph, params_));
  }
  tape.prediction = read_output(tape.activations.back());
  return tape;
}

Prediction Model::forward(const AtomSystem& system) const {
  if (system.size() < 2) fail("forward pass needs at least 2 atoms");
  const SystemGraph g = graph(system);
  FeatureMap x;
  for (const auto& layer : layers_) x = layer->forward(x, g, params_);
  return read_output(x);
}

ParameterStore Model::backward(const ForwardTape& tape, const Prediction& grad_prediction) const {
  ParameterStore grads = params_.zeros_like();
  const FeatureMap& out = tape.activations.back();
  FeatureMap grad(out.atoms(), out.channels());
  const double s = config_.output_scale;
  if (config_.output_order() == 1) {
    if (static_cast<int>(grad_prediction.vectors.size()) != out.atoms()) fail("gradient size mismatch");
    for (int a = 0; a < out.atoms(); ++a) {
      const Eigen::Vector3d& g = grad_prediction.vectors[a];
      double* d = grad.at(a, 1, 0);
      d[0] = s * g.y();
      d[1] = s * g.z();
      d[2] = s * g.x();
    }
  } else {
    if (static_cast<int>(grad_prediction.scalars.size()) != out.atoms()) fail("gradient size mismatch");
    for (int a = 0; a < out.atoms(); ++a) grad.at(a, 0, 0)[0] = s * grad_prediction.scalars[a];
  }
  for (std::size_t i = layers_.size(); i-- > 0;) {
    grad = layers_[i]->backward(tape.activations[i], tape.activations[i + 1], grad, tape.graph, params_, grads);
  }
  return grads;
}

FeatureMap Model::run_layer(std::size_t index, const FeatureMap& in, const SystemGraph& graph) const {
  return layers_.at(index)->forward(in, graph, params_);
}

Model build_model(const ModelConfig& config) { return Model(config); }

}  // namespace tfk
