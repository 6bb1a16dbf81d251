#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "miggt/error.hpp"
#include "miggt/graph.hpp"
#include "miggt/matrix.hpp"
#include "miggt/random.hpp"
#include "miggt/sgt.hpp"

namespace miggt {

/// (user, observed item, unobserved item), item indices local to the item range.
struct TrainingTriple {
  std::size_t user = 0;
  std::size_t pos_item = 0;
  std::size_t neg_item = 0;
};

struct LossBreakdown {
  double bpr = 0.0;
  double tur = 0.0;
  double l2 = 0.0;
  double total = 0.0;
  double l2_coefficient = 0.0;

  friend bool operator==(const LossBreakdown&, const LossBreakdown&) = default;
};

/// Uniform negative item sampler over the items a user has not interacted with.
class NegativeSampler {
 public:
  explicit NegativeSampler(const InteractionSet& interactions)
      : num_items_(interactions.num_items), observed_(interactions.items_by_user()) {}

  std::size_t sample(std::size_t user, Rng& rng) const {
    if (user >= observed_.size()) throw RangeError("user " + std::to_string(user) + " out of range");
    const auto& seen = observed_[user];
    if (seen.size() >= num_items_) {
      throw Error("user " + std::to_string(user) + " has interacted with every item");
    }
    while (true) {
      const std::size_t item = uniform_index(rng, num_items_);
      if (!std::binary_search(seen.begin(), seen.end(), item)) return item;
    }
  }

 private:
  std::size_t num_items_;
  std::vector<std::vector<std::size_t>> observed_;
};

inline std::size_t sample_negative(const InteractionSet& interactions, std::size_t user, Rng& rng) {
  return NegativeSampler(interactions).sample(user, rng);
}

/// log(1 + exp(x)) without overflow.
inline double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

struct BprResult {
  double loss = 0.0;
  Matrix d_user, d_pos, d_neg;
};

/// Mean of -log sigmoid(u.p - u.n) over the batch, with gradients.
inline BprResult bpr_loss_with_grad(const Matrix& users, const Matrix& pos, const Matrix& neg) {
  require_same_shape(users, pos, "bpr_loss");
  require_same_shape(users, neg, "bpr_loss");
  const std::size_t b = users.rows();
  BprResult r{0.0, Matrix(b, users.cols()), Matrix(b, users.cols()), Matrix(b, users.cols())};
  if (b == 0) return r;
  const double inv_b = 1.0 / static_cast<double>(b);
  for (std::size_t i = 0; i < b; ++i) {
    const double margin = dot(users.row(i), pos.row(i)) - dot(users.row(i), neg.row(i));
    r.loss += softplus(-margin);
    const double g = -sigmoid(-margin) * inv_b;  // d loss / d margin
    for (std::size_t c = 0; c < users.cols(); ++c) {
      r.d_user(i, c) = g * (pos(i, c) - neg(i, c));
      r.d_pos(i, c) = g * users(i, c);
      r.d_neg(i, c) = -g * users(i, c);
    }
  }
  r.loss *= inv_b;
  return r;
}

inline double bpr_loss(const Matrix& users, const Matrix& pos, const Matrix& neg) {
  return bpr_loss_with_grad(users, pos, neg).loss;
}

struct TurResult {
  double loss = 0.0;
  std::size_t skipped = 0;               // anchors without a neighbor
  std::vector<Matrix> d_outputs;         // per block, shaped like its output
  std::vector<std::vector<double>> d_neighbor;  // per block, empty when skipped
};

/// Mean over anchors with a neighbor of
///   -log softmax_j(z_k . T_ij) evaluated at j = 0,
/// where z_k is the sampled neighbor's final representation.
inline TurResult tur_loss_with_grad(const std::vector<SampledBlock>& blocks,
                                    const std::vector<std::optional<std::vector<double>>>& neighbor) {
  if (blocks.size() != neighbor.size()) {
    throw DimensionError("tur_loss: " + std::to_string(blocks.size()) + " blocks but " +
                         std::to_string(neighbor.size()) + " neighbor representations");
  }
  TurResult r;
  r.d_outputs.resize(blocks.size());
  r.d_neighbor.resize(blocks.size());
  std::size_t counted = 0;
  for (const auto& n : neighbor) counted += n.has_value();
  r.skipped = blocks.size() - counted;
  if (counted == 0) return r;
  const double inv = 1.0 / static_cast<double>(counted);

  std::vector<double> logits;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const Matrix& t = blocks[b].output;
    if (t.empty()) throw Error("tur_loss: block " + std::to_string(b) + " has not been attended");
    r.d_outputs[b] = Matrix(t.rows(), t.cols());
    if (!neighbor[b]) continue;
    const std::span<const double> z(*neighbor[b]);
    if (z.size() != t.cols()) throw DimensionError("tur_loss: neighbor dimension mismatch");
    logits.resize(t.rows());
    for (std::size_t j = 0; j < t.rows(); ++j) logits[j] = dot(z, t.row(j));
    const double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (const double l : logits) sum += std::exp(l - mx);
    const double lse = mx + std::log(sum);
    r.loss += lse - logits[0];

    auto& dz = r.d_neighbor[b];
    dz.assign(t.cols(), 0.0);
    for (std::size_t j = 0; j < t.rows(); ++j) {
      const double g = (std::exp(logits[j] - lse) - (j == 0 ? 1.0 : 0.0)) * inv;
      axpy(g, z, r.d_outputs[b].row(j));
      axpy(g, t.row(j), dz);
    }
  }
  r.loss *= inv;
  return r;
}

inline double tur_loss(const std::vector<SampledBlock>& blocks,
                       const std::vector<std::optional<std::vector<double>>>& neighbor) {
  return tur_loss_with_grad(blocks, neighbor).loss;
}

/// Half the mean squared norm of the rows.
inline double l2_loss(const Matrix& reps) {
  if (reps.rows() == 0) return 0.0;
  double s = 0.0;
  for (const double v : reps.data()) s += v * v;
  return 0.5 * s / static_cast<double>(reps.rows());
}

inline Matrix l2_loss_grad(const Matrix& reps) {
  Matrix g = reps;
  if (reps.rows() == 0) return g;
  const double inv = 1.0 / static_cast<double>(reps.rows());
  for (auto& v : g.data()) v *= inv;
  return g;
}

inline LossBreakdown combined_loss(double bpr, double tur, double l2, double psi_l2) {
  auto check = [](double v, const char* name) {
    if (!std::isfinite(v)) throw NumericError(std::string("non-finite ") + name + " loss component");
  };
  check(bpr, "bpr");
  check(tur, "tur");
  check(l2, "l2");
  check(psi_l2, "psi_l2");
  return {bpr, tur, l2, bpr + tur + psi_l2 * l2, psi_l2};
}

}  // namespace miggt
