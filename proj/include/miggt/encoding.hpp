#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "miggt/error.hpp"
#include "miggt/matrix.hpp"
#include "miggt/random.hpp"

namespace miggt {

enum class ModalityKind { kEmbedding, kText, kVisual, kOther };

/// Identifies a modality. Built-in kinds carry fixed labels; kOther carries a
/// free-form label so extra feature sources can be added.
struct ModalityId {
  ModalityKind kind = ModalityKind::kEmbedding;
  std::string label = "embedding";

  static ModalityId embedding() { return {ModalityKind::kEmbedding, "embedding"}; }
  static ModalityId text() { return {ModalityKind::kText, "text"}; }
  static ModalityId visual() { return {ModalityKind::kVisual, "visual"}; }
  static ModalityId from_label(const std::string& label) {
    if (label == "embedding") return embedding();
    if (label == "text") return text();
    if (label == "visual") return visual();
    return {ModalityKind::kOther, label};
  }

  friend bool operator==(const ModalityId&, const ModalityId&) = default;
};

/// Raw per-vertex features of one modality. Rows of vertices without a
/// feature are zero.
struct FeatureStore {
  ModalityId modality;
  Matrix rows;
  std::vector<bool> has_feature;

  std::size_t dim() const { return rows.cols(); }
  std::size_t num_vertices() const { return rows.rows(); }

  /// Throws when dim is zero, the mask length is wrong or a masked row is nonzero.
  void validate() const {
    if (rows.cols() == 0) throw RangeError("feature dimension must be positive");
    if (has_feature.size() != rows.rows()) {
      throw DimensionError("feature mask length " + std::to_string(has_feature.size()) +
                           " does not match " + std::to_string(rows.rows()) + " rows");
    }
    for (std::size_t r = 0; r < rows.rows(); ++r) {
      if (has_feature[r]) continue;
      for (const double v : rows.row(r))
        if (v != 0.0) throw Error("featureless row " + std::to_string(r) + " is not zero");
    }
  }
};

enum class Activation { kNone, kTanh };

struct AffineLayer {
  Matrix weight;  // in_dim x out_dim
  Matrix bias;    // 1 x out_dim
};

/// MLP encoder: affine layers with an activation between consecutive layers.
struct EncoderParams {
  std::vector<AffineLayer> layers;
  Activation hidden_activation = Activation::kTanh;

  std::size_t in_dim() const { return layers.front().weight.rows(); }
  std::size_t out_dim() const { return layers.back().weight.cols(); }

  void validate() const {
    if (layers.empty()) throw Error("encoder needs at least one layer");
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto& layer = layers[l];
      if (layer.bias.rows() != 1 || layer.bias.cols() != layer.weight.cols()) {
        throw DimensionError("encoder layer " + std::to_string(l) + " bias shape " +
                             shape_string(layer.bias));
      }
      if (l > 0 && layers[l - 1].weight.cols() != layer.weight.rows()) {
        throw DimensionError("encoder layer " + std::to_string(l) + " input " +
                             std::to_string(layer.weight.rows()) + " does not chain with " +
                             std::to_string(layers[l - 1].weight.cols()));
      }
    }
  }
};

/// Learnable |N| x d table, used verbatim as the encoded features.
struct EmbeddingTable {
  Matrix table;
};

/// Intermediates of encode_modality needed for its backward pass.
struct EncoderTrace {
  std::vector<Matrix> hidden_pre;   // pre-activation output of every layer but the last
  std::vector<Matrix> hidden_post;  // activated input of every layer but the first
};

namespace detail {

inline double activate(Activation a, double x) { return a == Activation::kTanh ? std::tanh(x) : x; }

inline double activate_grad_from_pre(Activation a, double pre) {
  if (a == Activation::kNone) return 1.0;
  const double t = std::tanh(pre);
  return 1.0 - t * t;
}

/// out[r] = in[r] * W + b for rows with a feature, zero elsewhere.
inline Matrix masked_affine(const Matrix& in, const AffineLayer& layer,
                            const std::vector<bool>& mask) {
  Matrix out(in.rows(), layer.weight.cols());
  for (std::size_t r = 0; r < in.rows(); ++r) {
    if (!mask[r]) continue;
    auto o = out.row(r);
    std::copy(layer.bias.row(0).begin(), layer.bias.row(0).end(), o.begin());
    for (std::size_t k = 0; k < in.cols(); ++k) {
      const double v = in(r, k);
      if (v != 0.0) axpy(v, layer.weight.row(k), o);
    }
  }
  return out;
}

}  // namespace detail

/// Encodes raw features into |N| x d. Featureless rows are exactly zero in the
/// output whatever the bias, because only featured rows are computed.
inline Matrix encode_modality(const FeatureStore& store, const EncoderParams& params,
                              EncoderTrace* trace = nullptr) {
  params.validate();
  if (store.has_feature.size() != store.rows.rows()) {
    throw DimensionError("feature mask length does not match feature rows");
  }
  if (store.dim() != params.in_dim()) {
    throw DimensionError("feature dim " + std::to_string(store.dim()) +
                         " does not match encoder input " + std::to_string(params.in_dim()));
  }
  if (trace) *trace = {};
  Matrix current = detail::masked_affine(store.rows, params.layers[0], store.has_feature);
  for (std::size_t l = 1; l < params.layers.size(); ++l) {
    Matrix post(current.rows(), current.cols());
    for (std::size_t r = 0; r < current.rows(); ++r) {
      if (!store.has_feature[r]) continue;
      for (std::size_t c = 0; c < current.cols(); ++c)
        post(r, c) = detail::activate(params.hidden_activation, current(r, c));
    }
    Matrix next = detail::masked_affine(post, params.layers[l], store.has_feature);
    if (trace) {
      trace->hidden_pre.push_back(std::move(current));
      trace->hidden_post.push_back(std::move(post));
    }
    current = std::move(next);
  }
  return current;
}

inline const Matrix& encode_embedding(const EmbeddingTable& table) { return table.table; }

/// Gradients of one encoder, laid out like EncoderParams.
struct EncoderGrad {
  std::vector<AffineLayer> layers;

  static EncoderGrad zeros_like(const EncoderParams& p) {
    EncoderGrad g;
    for (const auto& l : p.layers)
      g.layers.push_back({Matrix(l.weight.rows(), l.weight.cols()), Matrix(1, l.bias.cols())});
    return g;
  }
};

/// Accumulates d(loss)/d(params) into grads given d(loss)/d(encoded output).
inline void encode_modality_backward(const FeatureStore& store, const EncoderParams& params,
                                     const EncoderTrace& trace, const Matrix& d_out,
                                     EncoderGrad& grads) {
  const std::size_t num_layers = params.layers.size();
  if (trace.hidden_pre.size() + 1 != num_layers) throw Error("encoder trace does not match params");
  Matrix delta(d_out.rows(), d_out.cols());
  for (std::size_t r = 0; r < d_out.rows(); ++r) {
    if (!store.has_feature[r]) continue;
    std::copy(d_out.row(r).begin(), d_out.row(r).end(), delta.row(r).begin());
  }
  for (std::size_t l = num_layers; l-- > 0;) {
    const Matrix& input = l == 0 ? store.rows : trace.hidden_post[l - 1];
    auto& g = grads.layers[l];
    for (std::size_t r = 0; r < delta.rows(); ++r) {
      if (!store.has_feature[r]) continue;
      const auto dr = delta.row(r);
      axpy(1.0, dr, g.bias.row(0));
      for (std::size_t k = 0; k < input.cols(); ++k) {
        const double v = input(r, k);
        if (v != 0.0) axpy(v, dr, g.weight.row(k));
      }
    }
    if (l == 0) break;
    const Matrix& w = params.layers[l].weight;
    const Matrix& pre = trace.hidden_pre[l - 1];
    Matrix prev(delta.rows(), w.rows());
    for (std::size_t r = 0; r < delta.rows(); ++r) {
      if (!store.has_feature[r]) continue;
      for (std::size_t k = 0; k < w.rows(); ++k)
        prev(r, k) = dot(delta.row(r), w.row(k)) *
                     detail::activate_grad_from_pre(params.hidden_activation, pre(r, k));
    }
    delta = std::move(prev);
  }
}

/// Scaled-uniform bound sqrt(6 / (in + out)).
inline double uniform_init_bound(std::size_t in_dim, std::size_t out_dim) {
  return std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
}

/// Encoder with `num_layers` affine layers; hidden layers have width hidden_dim.
inline EncoderParams init_encoder(std::size_t in_dim, std::size_t out_dim, Rng& rng,
                                  std::size_t num_layers = 1, std::size_t hidden_dim = 0,
                                  Activation hidden_activation = Activation::kTanh) {
  if (in_dim == 0 || out_dim == 0) throw RangeError("encoder dimensions must be positive");
  if (num_layers == 0) throw RangeError("encoder needs at least one layer");
  if (num_layers > 1 && hidden_dim == 0) hidden_dim = out_dim;
  EncoderParams p;
  p.hidden_activation = hidden_activation;
  for (std::size_t l = 0; l < num_layers; ++l) {
    const std::size_t in = l == 0 ? in_dim : hidden_dim;
    const std::size_t out = l + 1 == num_layers ? out_dim : hidden_dim;
    const double bound = uniform_init_bound(in, out);
    std::uniform_real_distribution<double> dist(-bound, bound);
    AffineLayer layer{Matrix(in, out), Matrix(1, out)};
    for (auto& v : layer.weight.data()) v = dist(rng);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

inline EmbeddingTable init_embedding(std::size_t num_vertices, std::size_t dim, Rng& rng,
                                     double stddev = 0.01) {
  if (num_vertices == 0 || dim == 0) throw RangeError("embedding dimensions must be positive");
  EmbeddingTable t{Matrix(num_vertices, dim)};
  std::normal_distribution<double> dist(0.0, stddev);
  for (auto& v : t.table.data()) v = dist(rng);
  return t;
}

}  // namespace miggt
