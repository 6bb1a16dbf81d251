#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "miggt/error.hpp"
#include "miggt/graph.hpp"
#include "miggt/matrix.hpp"

namespace miggt {

inline constexpr std::size_t kDefaultMaxHops = 4;

/// Hop mixing weights and receptive field of one modality's propagation.
struct PropagationConfig {
  double alpha = 1.0;
  double beta = 1.0;
  std::size_t k_hops = 2;

  void validate(std::size_t max_hops = kDefaultMaxHops) const {
    if (!(alpha >= 0.0) || !(beta >= 0.0)) throw RangeError("alpha and beta must be >= 0");
    if (!(alpha + beta > 0.0)) throw RangeError("alpha + beta must be positive");
    if (k_hops > max_hops) {
      throw RangeError("k_hops " + std::to_string(k_hops) + " exceeds maximum " +
                       std::to_string(max_hops));
    }
  }
};

/// Normalizer beta^K + sum_{k<K} alpha beta^k.
inline double gamma(const PropagationConfig& config) {
  double sum = 0.0;
  double beta_pow = 1.0;
  for (std::size_t k = 0; k < config.k_hops; ++k) {
    sum += config.alpha * beta_pow;
    beta_pow *= config.beta;
  }
  return beta_pow + sum;
}

/// Weight of A^k X in the propagated output, k = 0..K.
inline std::vector<double> coefficients(const PropagationConfig& config) {
  const double g = gamma(config);
  std::vector<double> out(config.k_hops + 1);
  double beta_pow = 1.0;
  for (std::size_t k = 0; k < config.k_hops; ++k) {
    out[k] = config.alpha * beta_pow / g;
    beta_pow *= config.beta;
  }
  out[config.k_hops] = beta_pow / g;
  return out;
}

/// H0 = X; Hk = beta * A * H(k-1) + alpha * H0; returns HK / gamma.
inline Matrix propagate(const NormalizedAdjacency& adjacency, const Matrix& encoded,
                        const PropagationConfig& config) {
  if (adjacency.num_vertices() != encoded.rows()) {
    throw DimensionError("propagate: " + std::to_string(adjacency.num_vertices()) +
                         " vertices but encoded has " + std::to_string(encoded.rows()) + " rows");
  }
  Matrix h = encoded;
  for (std::size_t k = 0; k < config.k_hops; ++k) {
    Matrix next = spmm(adjacency.matrix, h);
    auto& nd = next.data();
    const auto& x = encoded.data();
    for (std::size_t i = 0; i < nd.size(); ++i) nd[i] = config.beta * nd[i] + config.alpha * x[i];
    h = std::move(next);
  }
  const double g = gamma(config);
  for (auto& v : h.data()) v /= g;
  return h;
}

/// Adjoint of propagate. The operator is a polynomial in a symmetric matrix,
/// so it is self-adjoint.
inline Matrix propagate_adjoint(const NormalizedAdjacency& adjacency, const Matrix& d_output,
                                const PropagationConfig& config) {
  return propagate(adjacency, d_output, config);
}

/// Sum pooling across modalities.
inline Matrix fuse(std::span<const Matrix> per_modality) {
  if (per_modality.empty()) throw Error("fuse needs at least one modality");
  Matrix out = per_modality.front();
  for (std::size_t m = 1; m < per_modality.size(); ++m) {
    require_same_shape(out, per_modality[m], "fuse");
    add_scaled(out, per_modality[m]);
  }
  return out;
}

}  // namespace miggt
