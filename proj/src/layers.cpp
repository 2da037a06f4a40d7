#include "tfk/layers.hpp"

#include <cmath>

#include <Eigen/Core>

#include "tfk/error.hpp"

namespace tfk {

namespace {

using ColMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::string order_suffix(int l) { return std::to_string(l); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

std::string_view layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::kEmbedding: return "embedding";
    case LayerKind::kConvolution: return "convolution";
    case LayerKind::kSelfInteraction: return "self_interaction";
    case LayerKind::kNonlinearity: return "nonlinearity";
    case LayerKind::kNorm: return "norm";
  }
  return "unknown";
}

void Layer::check_input(const FeatureMap& in) const {
  if (in.channels() != input_) fail("layer '" + name_ + "': input channel layout does not match configuration");
}

// ---------------------------------------------------------------- embedding

Embedding::Embedding(std::string name, int vocabulary_size) : Layer(std::move(name), Channels{}) {
  if (vocabulary_size < 1) fail("empty vocabulary");
  output_ = {vocabulary_size, 0, 0};
}

FeatureMap Embedding::forward(const FeatureMap&, const SystemGraph& graph, const ParameterStore&) const {
  FeatureMap out(graph.atoms, output_);
  for (int a = 0; a < graph.atoms; ++a) {
    const int e = graph.element_index[a];
    if (e < 0 || e >= output_[0]) fail("layer '" + name_ + "': element index out of range");
    out.at(a, 0, e)[0] = 1.0;
  }
  return out;
}

FeatureMap Embedding::backward(const FeatureMap& in, const FeatureMap&, const FeatureMap&, const SystemGraph&,
                               const ParameterStore&, ParameterStore&) const {
  return FeatureMap(in.atoms(), in.channels());
}

// --------------------------------------------------------- self-interaction

SelfInteraction::SelfInteraction(std::string name, Channels input, Channels output, ParameterStore& store,
                                 bool inject_order1_bias)
    : Layer(std::move(name), input), fault_(inject_order1_bias) {
  output_ = output;
  for (int l = 0; l <= kMaxOrder; ++l) {
    if (output[l] < 0) fail("layer '" + name_ + "': negative filter count");
    if (output[l] > 0 && input[l] == 0) fail("layer '" + name_ + "': output order " + order_suffix(l) + " has no input");
    if (output[l] > 0) {
      weight_id_[l] = store.add(name_ + ".weight" + order_suffix(l), {output[l], input[l]}, ParamInit::kUniformFanIn,
                                input[l]);
    }
  }
  if (output[0] > 0) bias_id_ = store.add(name_ + ".bias", {output[0]}, ParamInit::kZeros);
}

FeatureMap SelfInteraction::forward(const FeatureMap& in, const SystemGraph&, const ParameterStore& params) const {
  check_input(in);
  FeatureMap out(in.atoms(), output_);
  for (int l = 0; l <= kMaxOrder; ++l) {
    if (output_[l] == 0) continue;
    const int dim = order_dim(l);
    const int cin = input_[l], cout = output_[l];
    Eigen::Map<const RowMat> w(params[weight_id_[l]].values.data(), cout, cin);
    for (int a = 0; a < in.atoms(); ++a) {
      Eigen::Map<const ColMat> x(in.at(a, l, 0), dim, cin);
      Eigen::Map<ColMat> y(out.at(a, l, 0), dim, cout);
      y.noalias() = x * w.transpose();
      if (l == 0) {
        for (int c = 0; c < cout; ++c) y(0, c) += params[bias_id_].values[c];
      }
      if (l == 1 && fault_) y.array() += 0.3;
    }
  }
  return out;
}

FeatureMap SelfInteraction::backward(const FeatureMap& in, const FeatureMap&, const FeatureMap& grad_out,
                                     const SystemGraph&, const ParameterStore& params, ParameterStore& grads) const {
  FeatureMap grad_in(in.atoms(), input_);
  for (int l = 0; l <= kMaxOrder; ++l) {
    if (output_[l] == 0) continue;
    const int dim = order_dim(l);
    const int cin = input_[l], cout = output_[l];
    Eigen::Map<const RowMat> w(params[weight_id_[l]].values.data(), cout, cin);
    Eigen::Map<RowMat> gw(grads[weight_id_[l]].values.data(), cout, cin);
    for (int a = 0; a < in.atoms(); ++a) {
      Eigen::Map<const ColMat> x(in.at(a, l, 0), dim, cin);
      Eigen::Map<const ColMat> g(grad_out.at(a, l, 0), dim, cout);
      Eigen::Map<ColMat> gx(grad_in.at(a, l, 0), dim, cin);
      gw.noalias() += g.transpose() * x;
      gx.noalias() = g * w;
      if (l == 0) {
        for (int c = 0; c < cout; ++c) grads[bias_id_].values[c] += g(0, c);
      }
    }
  }
  return grad_in;
}

// -------------------------------------------------------------- convolution

Convolution::Convolution(std::string name, Channels input, int lmax, int basis_size, ParameterStore& store)
    : Layer(std::move(name), input), basis_size_(basis_size) {
  if (lmax < 0 || lmax > kMaxOrder) fail("layer '" + name_ + "': unsupported max order");
  for (int l = 0; l <= kMaxOrder; ++l) {
    if (input[l] == 0) continue;
    if (l > lmax) fail("layer '" + name_ + "': input order exceeds max order");
    if (width_ != 0 && input[l] != width_) fail("layer '" + name_ + "': input orders must share one channel count");
    width_ = input[l];
  }
  if (width_ == 0) fail("layer '" + name_ + "': no input channels");

  for (int li = 0; li <= kMaxOrder; ++li) {
    if (input[li] == 0) continue;
    for (int lf = 0; lf <= lmax; ++lf)
      for (int lo = 0; lo <= lmax; ++lo)
        if (coupling_allowed(li, lf, lo)) paths_.push_back({li, lf, lo});
  }
  for (const auto& p : paths_) {
    matrix_offset_.push_back(matrix_total_);
    matrix_total_ += order_dim(p.l_out) * order_dim(p.l_in);
    output_[p.l_out] = width_;
  }
  radial_id_ = store.add(name_ + ".radial", {static_cast<int>(paths_.size()), width_, basis_size_},
                         ParamInit::kUniformFanIn, basis_size_);
  for (int l = 0; l <= kMaxOrder; ++l) {
    if (input[l] > 0) self_id_[l] = store.add(name_ + ".self" + order_suffix(l), {width_}, ParamInit::kUniformFanIn, 1);
  }
}

void Convolution::edge_matrices(const double* harmonics, int lmax_graph, double* buffer) const {
  for (std::size_t p = 0; p < paths_.size(); ++p) {
    const auto& path = paths_[p];
    if (path.l_filter > lmax_graph) fail("layer '" + name_ + "': graph harmonics below filter order");
    const CGTensor& cg = clebsch_gordan(path.l_in, path.l_filter, path.l_out);
    const int di = order_dim(path.l_in), df = order_dim(path.l_filter), dout = order_dim(path.l_out);
    const double* y = harmonics + order_offset(path.l_filter);
    double* m = buffer + matrix_offset_[p];
    for (int mo = 0; mo < dout; ++mo) {
      for (int mi = 0; mi < di; ++mi) {
        double s = 0.0;
        for (int mf = 0; mf < df; ++mf) s += cg(mi, mf, mo) * y[mf];
        m[mo * di + mi] = s;
      }
    }
  }
}

FeatureMap Convolution::forward(const FeatureMap& in, const SystemGraph& graph, const ParameterStore& params) const {
  check_input(in);
  if (graph.basis_size != basis_size_) fail("layer '" + name_ + "': radial basis size mismatch");
  FeatureMap out(in.atoms(), output_);
  const std::vector<double>& radial = params[radial_id_].values;
  std::vector<double> mats(matrix_total_);
  std::vector<double> r(width_);
  const int nb = basis_size_;

  for (int a = 0; a < graph.atoms; ++a) {
    for (int e = graph.offsets[a]; e < graph.offsets[a + 1]; ++e) {
      const int n = graph.neighbor[e];
      const double* basis = graph.edge_basis(e);
      edge_matrices(graph.edge_harmonics(e), graph.lmax, mats.data());
      for (std::size_t p = 0; p < paths_.size(); ++p) {
        const auto& path = paths_[p];
        const int di = order_dim(path.l_in), dout = order_dim(path.l_out);
        const double* m = mats.data() + matrix_offset_[p];
        const double* w = radial.data() + p * width_ * nb;
        for (int c = 0; c < width_; ++c) {
          double rc = 0.0;
          for (int b = 0; b < nb; ++b) rc += w[c * nb + b] * basis[b];
          const double* x = in.at(n, path.l_in, c);
          double* o = out.at(a, path.l_out, c);
          for (int mo = 0; mo < dout; ++mo) {
            double s = 0.0;
            for (int mi = 0; mi < di; ++mi) s += m[mo * di + mi] * x[mi];
            o[mo] += rc * s;
          }
        }
      }
    }
    for (int l = 0; l <= kMaxOrder; ++l) {
      if (self_id_[l] < 0) continue;
      const std::vector<double>& s = params[self_id_[l]].values;
      for (int c = 0; c < width_; ++c) {
        const double* x = in.at(a, l, c);
        double* o = out.at(a, l, c);
        for (int m = 0; m < order_dim(l); ++m) o[m] += s[c] * x[m];
      }
    }
  }
  return out;
}

FeatureMap Convolution::backward(const FeatureMap& in, const FeatureMap&, const FeatureMap& grad_out,
                                 const SystemGraph& graph, const ParameterStore& params, ParameterStore& grads) const {
  FeatureMap grad_in(in.atoms(), input_);
  const std::vector<double>& radial = params[radial_id_].values;
  std::vector<double>& grad_radial = grads[radial_id_].values;
  std::vector<double> mats(matrix_total_);
  const int nb = basis_size_;

  for (int a = 0; a < graph.atoms; ++a) {
    for (int e = graph.offsets[a]; e < graph.offsets[a + 1]; ++e) {
      const int n = graph.neighbor[e];
      const double* basis = graph.edge_basis(e);
      edge_matrices(graph.edge_harmonics(e), graph.lmax, mats.data());
      for (std::size_t p = 0; p < paths_.size(); ++p) {
        const auto& path = paths_[p];
        const int di = order_dim(path.l_in), dout = order_dim(path.l_out);
        const double* m = mats.data() + matrix_offset_[p];
        const double* w = radial.data() + p * width_ * nb;
        double* gw = grad_radial.data() + p * width_ * nb;
        for (int c = 0; c < width_; ++c) {
          double rc = 0.0;
          for (int b = 0; b < nb; ++b) rc += w[c * nb + b] * basis[b];
          const double* x = in.at(n, path.l_in, c);
          const double* g = grad_out.at(a, path.l_out, c);
          double* gx = grad_in.at(n, path.l_in, c);
          double grad_r = 0.0;
          for (int mo = 0; mo < dout; ++mo) {
            double s = 0.0;
            for (int mi = 0; mi < di; ++mi) {
              s += m[mo * di + mi] * x[mi];
              gx[mi] += rc * m[mo * di + mi] * g[mo];
            }
            grad_r += g[mo] * s;
          }
          for (int b = 0; b < nb; ++b) gw[c * nb + b] += grad_r * basis[b];
        }
      }
    }
    for (int l = 0; l <= kMaxOrder; ++l) {
      if (self_id_[l] < 0) continue;
      const std::vector<double>& s = params[self_id_[l]].values;
      std::vector<double>& gs = grads[self_id_[l]].values;
      for (int c = 0; c < width_; ++c) {
        const double* x = in.at(a, l, c);
        const double* g = grad_out.at(a, l, c);
        double* gx = grad_in.at(a, l, c);
        double dot = 0.0;
        for (int m = 0; m < order_dim(l); ++m) {
          dot += g[m] * x[m];
          gx[m] += s[c] * g[m];
        }
        gs[c] += dot;
      }
    }
  }
  return grad_in;
}

// --------------------------------------------------------------------- norm

EquivariantNorm::EquivariantNorm(std::string name, Channels input, double epsilon, ParameterStore& store)
    : Layer(std::move(name), input), epsilon_(epsilon) {
  if (!(epsilon > 0.0)) fail("layer '" + name_ + "': epsilon must be positive");
  output_ = input;
  for (int l = 0; l <= kMaxOrder; ++l) {
    if (input[l] > 0) gain_id_[l] = store.add(name_ + ".gain" + order_suffix(l), {input[l]}, ParamInit::kOnes);
  }
  if (input[0] > 0) shift_id_ = store.add(name_ + ".shift", {input[0]}, ParamInit::kZeros);
}

FeatureMap EquivariantNorm::forward(const FeatureMap& in, const SystemGraph&, const ParameterStore& params) const {
  check_input(in);
  FeatureMap out(in.atoms(), output_);
  for (int l = 0; l <= kMaxOrder; ++l) {
    const int nc = input_[l];
    if (nc == 0) continue;
    const int dim = order_dim(l);
    const std::vector<double>& gain = params[gain_id_[l]].values;
    for (int a = 0; a < in.atoms(); ++a) {
      const double* x = in.at(a, l, 0);
      double* y = out.at(a, l, 0);
      if (l == 0) {
        double mean = 0.0;
        for (int c = 0; c < nc; ++c) mean += x[c];
        mean /= nc;
        double var = 0.0;
        for (int c = 0; c < nc; ++c) var += (x[c] - mean) * (x[c] - mean);
        var /= nc;
        const double inv = 1.0 / std::sqrt(var + epsilon_);
        const std::vector<double>& shift = params[shift_id_].values;
        for (int c = 0; c < nc; ++c) y[c] = gain[c] * (x[c] - mean) * inv + shift[c];
      } else {
        double q = 0.0;
        for (int i = 0; i < nc * dim; ++i) q += x[i] * x[i];
        q /= nc;
        const double inv = 1.0 / std::sqrt(q + epsilon_);
        for (int c = 0; c < nc; ++c)
          for (int m = 0; m < dim; ++m) y[c * dim + m] = gain[c] * x[c * dim + m] * inv;
      }
    }
  }
  return out;
}

FeatureMap EquivariantNorm::backward(const FeatureMap& in, const FeatureMap&, const FeatureMap& grad_out,
                                     const SystemGraph&, const ParameterStore& params, ParameterStore& grads) const {
  FeatureMap grad_in(in.atoms(), input_);
  std::vector<double> xhat, gxhat;
  for (int l = 0; l <= kMaxOrder; ++l) {
    const int nc = input_[l];
    if (nc == 0) continue;
    const int dim = order_dim(l);
    const std::vector<double>& gain = params[gain_id_[l]].values;
    std::vector<double>& ggain = grads[gain_id_[l]].values;
    for (int a = 0; a < in.atoms(); ++a) {
      const double* x = in.at(a, l, 0);
      const double* g = grad_out.at(a, l, 0);
      double* gx = grad_in.at(a, l, 0);
      if (l == 0) {
        double mean = 0.0;
        for (int c = 0; c < nc; ++c) mean += x[c];
        mean /= nc;
        double var = 0.0;
        for (int c = 0; c < nc; ++c) var += (x[c] - mean) * (x[c] - mean);
        var /= nc;
        const double inv = 1.0 / std::sqrt(var + epsilon_);
        xhat.resize(nc);
        gxhat.resize(nc);
        double mean_g = 0.0, mean_gx = 0.0;
        std::vector<double>& gshift = grads[shift_id_].values;
        for (int c = 0; c < nc; ++c) {
          xhat[c] = (x[c] - mean) * inv;
          gxhat[c] = gain[c] * g[c];
          ggain[c] += g[c] * xhat[c];
          gshift[c] += g[c];
          mean_g += gxhat[c];
          mean_gx += gxhat[c] * xhat[c];
        }
        mean_g /= nc;
        mean_gx /= nc;
        for (int c = 0; c < nc; ++c) gx[c] = inv * (gxhat[c] - mean_g - xhat[c] * mean_gx);
      } else {
        double q = 0.0;
        for (int i = 0; i < nc * dim; ++i) q += x[i] * x[i];
        q /= nc;
        const double s = std::sqrt(q + epsilon_);
        const double inv = 1.0 / s;
        double total = 0.0;
        for (int c = 0; c < nc; ++c) {
          double dot = 0.0;
          for (int m = 0; m < dim; ++m) dot += g[c * dim + m] * x[c * dim + m];
          ggain[c] += dot * inv;
          total += gain[c] * dot;
        }
        const double k = total / (nc * s * s * s);
        for (int c = 0; c < nc; ++c)
          for (int m = 0; m < dim; ++m) gx[c * dim + m] = gain[c] * g[c * dim + m] * inv - k * x[c * dim + m];
      }
    }
  }
  return grad_in;
}

// ------------------------------------------------------------- nonlinearity

double shifted_softplus(double x) {
  const double sp = std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
  return sp - std::log(2.0);
}

GatedNonlinearity::GatedNonlinearity(std::string name, Channels input, ParameterStore& store)
    : Layer(std::move(name), input) {
  output_ = input;
  for (int l = 0; l <= kMaxOrder; ++l) {
    if (input[l] > 0) bias_id_[l] = store.add(name_ + ".bias" + order_suffix(l), {input[l]}, ParamInit::kZeros);
  }
}

FeatureMap GatedNonlinearity::forward(const FeatureMap& in, const SystemGraph&, const ParameterStore& params) const {
  check_input(in);
  FeatureMap out(in.atoms(), output_);
  for (int l = 0; l <= kMaxOrder; ++l) {
    const int nc = input_[l];
    if (nc == 0) continue;
    const int dim = order_dim(l);
    const std::vector<double>& bias = params[bias_id_[l]].values;
    for (int a = 0; a < in.atoms(); ++a) {
      for (int c = 0; c < nc; ++c) {
        const double* x = in.at(a, l, c);
        double* y = out.at(a, l, c);
        if (l == 0) {
          y[0] = shifted_softplus(x[0] + bias[c]);
          continue;
        }
        double n2 = 0.0;
        for (int m = 0; m < dim; ++m) n2 += x[m] * x[m];
        const double norm = std::sqrt(n2);
        const double f = shifted_softplus(norm + bias[c]) / (norm + kEpsNorm);
        for (int m = 0; m < dim; ++m) y[m] = f * x[m];
      }
    }
  }
  return out;
}

FeatureMap GatedNonlinearity::backward(const FeatureMap& in, const FeatureMap&, const FeatureMap& grad_out,
                                       const SystemGraph&, const ParameterStore& params, ParameterStore& grads) const {
  FeatureMap grad_in(in.atoms(), input_);
  for (int l = 0; l <= kMaxOrder; ++l) {
    const int nc = input_[l];
    if (nc == 0) continue;
    const int dim = order_dim(l);
    const std::vector<double>& bias = params[bias_id_[l]].values;
    std::vector<double>& gbias = grads[bias_id_[l]].values;
    for (int a = 0; a < in.atoms(); ++a) {
      for (int c = 0; c < nc; ++c) {
        const double* x = in.at(a, l, c);
        const double* g = grad_out.at(a, l, c);
        double* gx = grad_in.at(a, l, c);
        if (l == 0) {
          const double d = sigmoid(x[0] + bias[c]) * g[0];
          gx[0] = d;
          gbias[c] += d;
          continue;
        }
        double n2 = 0.0, gv = 0.0;
        for (int m = 0; m < dim; ++m) {
          n2 += x[m] * x[m];
          gv += g[m] * x[m];
        }
        const double norm = std::sqrt(n2);
        const double denom = norm + kEpsNorm;
        const double eta = shifted_softplus(norm + bias[c]);
        const double deta = sigmoid(norm + bias[c]);
        const double f = eta / denom;
        const double df_dn = deta / denom - eta / (denom * denom);
        gbias[c] += gv * deta / denom;
        const double radial = norm > 0.0 ? df_dn * gv / norm : 0.0;
        for (int m = 0; m < dim; ++m) gx[m] = f * g[m] + radial * x[m];
      }
    }
  }
  return grad_in;
}

}  // namespace tfk
