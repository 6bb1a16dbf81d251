#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "miggt/error.hpp"
#include "miggt/matrix.hpp"
#include "miggt/random.hpp"

namespace miggt {

/// Single-head global attention with a gamma-weighted residual.
struct AttentionParams {
  Matrix w_query;  // d x d_att
  Matrix w_key;    // d x d_att
  double gamma = 0.9;
  std::size_t c_samples = 10;

  std::size_t d_att() const { return w_query.cols(); }

  void validate(std::size_t d) const {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw RangeError("gamma must lie in [0, 1]");
    if (w_query.cols() == 0) throw RangeError("d_att must be positive");
    if (w_query.rows() != d || !w_query.same_shape(w_key)) {
      throw DimensionError("attention projections " + shape_string(w_query) + " / " +
                           shape_string(w_key) + " do not match model dim " + std::to_string(d));
    }
  }
};

/// An anchor vertex stacked with C uniformly sampled vertices. Row 0 of
/// `stacked` is the anchor's fused representation.
struct SampledBlock {
  std::size_t anchor = 0;
  std::vector<std::size_t> sampled;
  Matrix stacked;  // (C+1) x d
  Matrix output;   // (C+1) x d, or 1 x d when only the anchor row was attended
};

inline Matrix gather_rows(const Matrix& source, std::size_t first,
                          const std::vector<std::size_t>& rest) {
  Matrix out(rest.size() + 1, source.cols());
  std::copy(source.row(first).begin(), source.row(first).end(), out.row(0).begin());
  for (std::size_t j = 0; j < rest.size(); ++j)
    std::copy(source.row(rest[j]).begin(), source.row(rest[j]).end(), out.row(j + 1).begin());
  return out;
}

/// C indices drawn uniformly with replacement from [0, num_vertices).
inline std::vector<std::size_t> sample_vertices(std::size_t num_vertices, std::size_t c, Rng& rng) {
  std::vector<std::size_t> out(c);
  for (auto& v : out) v = uniform_index(rng, num_vertices);
  return out;
}

inline SampledBlock sample_block(const Matrix& fused, std::size_t anchor, std::size_t c, Rng& rng) {
  if (anchor >= fused.rows()) {
    throw RangeError("anchor " + std::to_string(anchor) + " out of range for " +
                     std::to_string(fused.rows()) + " vertices");
  }
  SampledBlock block;
  block.anchor = anchor;
  block.sampled = sample_vertices(fused.rows(), c, rng);
  block.stacked = gather_rows(fused, anchor, block.sampled);
  return block;
}

struct AttentionTrace {
  Matrix probs;  // q x (C+1) row-stochastic attention weights
};

/// Row-wise softmax in place.
inline void softmax_rows(Matrix& m) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (auto& v : row) {
      v = std::exp(v - mx);
      sum += v;
    }
    for (auto& v : row) v /= sum;
  }
}

/// Attention over a stacked block given precomputed projections. `query` may
/// hold only the first q rows of the block; the output then has q rows:
///   T = S_q + (1 - gamma) * (softmax(Q K' / sqrt(d)) S - S_q).
/// Written as a correction to S_q so gamma = 1 and single-row blocks return S_q exactly.
inline Matrix attend_projected(const Matrix& stacked, const Matrix& query, const Matrix& key,
                               double gamma, AttentionTrace* trace = nullptr) {
  if (key.rows() != stacked.rows() || query.rows() > stacked.rows() || query.cols() != key.cols()) {
    throw DimensionError("attend: block " + shape_string(stacked) + " with Q " + shape_string(query) +
                         " and K " + shape_string(key));
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(stacked.cols()));
  Matrix probs = matmul_nt(query, key);
  for (auto& v : probs.data()) v *= scale;
  softmax_rows(probs);
  Matrix out = matmul(probs, stacked);
  for (std::size_t r = 0; r < out.rows(); ++r) {
    const auto s = stacked.row(r);
    auto o = out.row(r);
    for (std::size_t c = 0; c < o.size(); ++c) o[c] = s[c] + (1.0 - gamma) * (o[c] - s[c]);
  }
  if (trace) trace->probs = std::move(probs);
  return out;
}

inline Matrix attend(const Matrix& stacked, const AttentionParams& params,
                     AttentionTrace* trace = nullptr) {
  params.validate(stacked.cols());
  return attend_projected(stacked, matmul(stacked, params.w_query), matmul(stacked, params.w_key),
                          params.gamma, trace);
}

inline void attend(SampledBlock& block, const AttentionParams& params) {
  block.output = attend(block.stacked, params);
}

/// Accumulates gradients of attend_projected w.r.t. S, Q and K.
inline void attend_projected_backward(const Matrix& stacked, const Matrix& query,
                                      const Matrix& key, double gamma,
                                      const AttentionTrace& trace, const Matrix& d_out,
                                      Matrix& d_stacked, Matrix& d_query, Matrix& d_key) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(stacked.cols()));
  const Matrix& p = trace.probs;
  const std::size_t q = query.rows();
  const std::size_t n = stacked.rows();
  // d_stacked += (1 - gamma) P' dT, plus gamma dT on the first q rows
  const Matrix via_mix = matmul_tn(p, d_out);
  for (std::size_t i = 0; i < d_stacked.size(); ++i) d_stacked.data()[i] += (1.0 - gamma) * via_mix.data()[i];
  for (std::size_t i = 0; i < d_out.size(); ++i) d_stacked.data()[i] += gamma * d_out.data()[i];
  // dP = (1 - gamma) dT S', then through the row softmax
  Matrix d_logits = matmul_nt(d_out, stacked);
  for (std::size_t r = 0; r < q; ++r) {
    double inner = 0.0;
    for (std::size_t c = 0; c < n; ++c) inner += d_logits(r, c) * p(r, c);
    for (std::size_t c = 0; c < n; ++c)
      d_logits(r, c) = (1.0 - gamma) * p(r, c) * (d_logits(r, c) - inner) * scale;
  }
  add_scaled(d_query, matmul(d_logits, key));
  add_scaled(d_key, matmul_tn(d_logits, query));
}

struct AttentionGrad {
  Matrix d_stacked;
  Matrix d_w_query;
  Matrix d_w_key;
};

inline AttentionGrad attend_backward(const Matrix& stacked, const AttentionParams& params,
                                     const AttentionTrace& trace, const Matrix& d_out) {
  const Matrix query = matmul(stacked, params.w_query);
  const Matrix key = matmul(stacked, params.w_key);
  AttentionGrad g{Matrix(stacked.rows(), stacked.cols()), {}, {}};
  Matrix d_query(query.rows(), query.cols());
  Matrix d_key(key.rows(), key.cols());
  attend_projected_backward(stacked, query, key, params.gamma, trace, d_out, g.d_stacked, d_query,
                            d_key);
  g.d_w_query = matmul_tn(stacked, d_query);
  g.d_w_key = matmul_tn(stacked, d_key);
  add_scaled(g.d_stacked, matmul_nt(d_query, params.w_query));
  add_scaled(g.d_stacked, matmul_nt(d_key, params.w_key));
  return g;
}

/// Row 0 of the attended block: the anchor's final representation.
inline std::vector<double> final_representation(const SampledBlock& block) {
  if (block.output.empty()) throw Error("block has not been attended");
  const auto r = block.output.row(0);
  return {r.begin(), r.end()};
}

/// Deterministic inference: each vertex averages its final representation over
/// `repeats` blocks sampled from a generator seeded by (eval_seed, vertex).
inline Matrix evaluate_representations(const Matrix& fused, const AttentionParams& params,
                                       std::uint64_t eval_seed, std::size_t repeats = 1) {
  if (repeats == 0) throw RangeError("repeats must be at least 1");
  params.validate(fused.cols());
  const Matrix query = matmul(fused, params.w_query);
  const Matrix key = matmul(fused, params.w_key);
  Matrix out(fused.rows(), fused.cols());
  for (std::size_t v = 0; v < fused.rows(); ++v) {
    Rng rng(derive_seed(eval_seed, static_cast<std::uint64_t>(Stream::kEval), v));
    auto mean = out.row(v);
    for (std::size_t r = 0; r < repeats; ++r) {
      const auto sampled = sample_vertices(fused.rows(), params.c_samples, rng);
      const Matrix t = attend_projected(gather_rows(fused, v, sampled), gather_rows(query, v, {}),
                                        gather_rows(key, v, sampled), params.gamma);
      // Running mean keeps identical repeats bitwise identical to one repeat.
      const double w = 1.0 / static_cast<double>(r + 1);
      for (std::size_t c = 0; c < mean.size(); ++c)
        mean[c] = r == 0 ? t(0, c) : mean[c] + (t(0, c) - mean[c]) * w;
    }
  }
  return out;
}

}  // namespace miggt
