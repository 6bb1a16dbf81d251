#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "miggt/config.hpp"
#include "miggt/encoding.hpp"
#include "miggt/error.hpp"
#include "miggt/graph.hpp"
#include "miggt/matrix.hpp"
#include "miggt/mgdn.hpp"
#include "miggt/objective.hpp"
#include "miggt/parameters.hpp"
#include "miggt/random.hpp"
#include "miggt/sgt.hpp"

namespace miggt {

/// Training graph and raw features, shared read-only between models.
struct GraphData {
  InteractionSet train;
  SparseMatrix adjacency;
  NormalizedAdjacency normalized;
  std::vector<FeatureStore> features;

  std::size_t num_users() const { return train.num_users; }
  std::size_t num_items() const { return train.num_items; }
  std::size_t num_vertices() const { return train.num_vertices(); }

  static std::shared_ptr<const GraphData> build(InteractionSet train,
                                                std::vector<FeatureStore> features) {
    auto g = std::make_shared<GraphData>();
    g->adjacency = build_bipartite_adjacency(train);
    g->normalized = normalize_adjacency(g->adjacency);
    for (const auto& f : features) {
      f.validate();
      if (f.num_vertices() != train.num_vertices()) {
        throw DimensionError("features '" + f.modality.label + "' have " +
                             std::to_string(f.num_vertices()) + " rows for " +
                             std::to_string(train.num_vertices()) + " vertices");
      }
      if (f.modality.kind == ModalityKind::kEmbedding) {
        throw Error("the embedding modality cannot carry raw features");
      }
    }
    g->train = std::move(train);
    g->features = std::move(features);
    return g;
  }
};

/// One modality pipeline. `feature_index` is empty for the learnable embedding.
struct Modality {
  ModalityId id;
  PropagationConfig propagation;
  std::optional<std::size_t> feature_index;
};

inline std::string encoder_weight_name(const std::string& label, std::size_t layer) {
  return "encoder." + label + "." + std::to_string(layer) + ".weight";
}
inline std::string encoder_bias_name(const std::string& label, std::size_t layer) {
  return "encoder." + label + "." + std::to_string(layer) + ".bias";
}

/// Per-modality encoders and propagation, sum fusion and the sampled global
/// transformer, with all trainables in one ParameterStore.
class Model {
 public:
  Model(std::shared_ptr<const GraphData> graph, TrainConfig config)
      : graph_(std::move(graph)), config_(std::move(config)) {
    config_.validate();
    modalities_.push_back({ModalityId::embedding(), config_.propagation_for("embedding"), {}});
    for (std::size_t i = 0; i < graph_->features.size(); ++i) {
      const auto& id = graph_->features[i].modality;
      for (const auto& m : modalities_)
        if (m.id.label == id.label) throw Error("duplicate modality '" + id.label + "'");
      modalities_.push_back({id, config_.propagation_for(id.label), i});
    }
    for (const auto& m : modalities_) m.propagation.validate(config_.max_hops);

    Rng rng = make_stream(config_.seed, Stream::kInit);
    params_.add("embedding", init_embedding(graph_->num_vertices(), config_.d, rng).table);
    for (const auto& m : modalities_) {
      if (!m.feature_index) continue;
      auto enc = init_encoder(graph_->features[*m.feature_index].dim(), config_.d, rng,
                              config_.encoder_layers, config_.hidden_dim);
      for (std::size_t l = 0; l < enc.layers.size(); ++l) {
        params_.add(encoder_weight_name(m.id.label, l), std::move(enc.layers[l].weight));
        params_.add(encoder_bias_name(m.id.label, l), std::move(enc.layers[l].bias));
      }
    }
    const double bound = uniform_init_bound(config_.d, config_.d_att);
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (const char* name : {"sgt.w_query", "sgt.w_key"}) {
      Matrix w(config_.d, config_.d_att);
      for (auto& v : w.data()) v = dist(rng);
      params_.add(name, std::move(w));
    }
  }

  const GraphData& graph() const { return *graph_; }
  std::shared_ptr<const GraphData> graph_ptr() const { return graph_; }
  const TrainConfig& config() const { return config_; }
  const std::vector<Modality>& modalities() const { return modalities_; }
  ParameterStore& params() { return params_; }
  const ParameterStore& params() const { return params_; }

  /// Changes a modality's propagation without touching parameters.
  void set_propagation(const std::string& label, const PropagationConfig& p) {
    p.validate(config_.max_hops);
    for (auto& m : modalities_) {
      if (m.id.label == label) {
        m.propagation = p;
        config_.propagation[label] = p;
        return;
      }
    }
    throw Error("unknown modality '" + label + "'");
  }

  EncoderParams encoder(const Modality& m) const {
    EncoderParams enc;
    for (std::size_t l = 0; l < std::max<std::size_t>(config_.encoder_layers, 1); ++l) {
      enc.layers.push_back({params_.get(encoder_weight_name(m.id.label, l)).value,
                            params_.get(encoder_bias_name(m.id.label, l)).value});
    }
    return enc;
  }

  AttentionParams attention() const {
    return {params_.get("sgt.w_query").value, params_.get("sgt.w_key").value, config_.gamma,
            config_.c_samples};
  }

  /// Encoded features of a modality. Fills `trace` for encoder modalities.
  Matrix encoded(const Modality& m, EncoderTrace* trace = nullptr) const {
    if (!m.feature_index) return encode_embedding(EmbeddingTable{params_.get("embedding").value});
    return encode_modality(graph_->features[*m.feature_index], encoder(m), trace);
  }

  /// Z^(M) for every modality, in modality order.
  std::vector<Matrix> modality_outputs() const {
    std::vector<Matrix> out;
    for (const auto& m : modalities_)
      out.push_back(propagate(graph_->normalized, encoded(m), m.propagation));
    return out;
  }

  Matrix fused() const { return fuse(modality_outputs()); }

  /// Representations used for scoring. Without the transformer these are the
  /// fused representations themselves.
  Matrix final_representations(std::uint64_t eval_seed) const {
    Matrix z = fused();
    if (!config_.use_sgt) return z;
    return evaluate_representations(z, attention(), eval_seed, config_.eval_repeats);
  }

  std::uint64_t eval_seed() const {
    return derive_seed(config_.seed, static_cast<std::uint64_t>(Stream::kEval));
  }

 private:
  std::shared_ptr<const GraphData> graph_;
  TrainConfig config_;
  std::vector<Modality> modalities_;
  ParameterStore params_;
};

/// All randomness consumed by one training step, drawn up front so the step
/// can be replayed exactly (e.g. by the finite-difference checker).
struct BatchPlan {
  std::vector<TrainingTriple> triples;
  /// Three anchors per triple: user, positive item, negative item (vertex ids).
  std::vector<std::size_t> anchors;
  std::vector<std::vector<std::size_t>> anchor_samples;
  std::vector<std::optional<std::size_t>> neighbors;
  std::vector<std::vector<std::size_t>> neighbor_samples;
};

inline BatchPlan plan_batch(const Model& model, std::vector<TrainingTriple> triples,
                            Rng& sgt_rng, Rng& tur_rng) {
  const auto& g = model.graph();
  BatchPlan plan;
  plan.triples = std::move(triples);
  for (const auto& t : plan.triples) {
    if (t.user >= g.num_users() || t.pos_item >= g.num_items() || t.neg_item >= g.num_items())
      throw RangeError("training triple out of range");
    plan.anchors.push_back(t.user);
    plan.anchors.push_back(g.train.item_vertex(t.pos_item));
    plan.anchors.push_back(g.train.item_vertex(t.neg_item));
  }
  if (!model.config().use_sgt) return plan;
  const std::size_t n = g.num_vertices();
  const std::size_t c = model.config().c_samples;
  for (std::size_t a = 0; a < plan.anchors.size(); ++a)
    plan.anchor_samples.push_back(sample_vertices(n, c, sgt_rng));
  for (const std::size_t a : plan.anchors) {
    const auto nb = g.adjacency.row_columns(a);
    if (nb.empty()) {
      plan.neighbors.emplace_back();
      plan.neighbor_samples.emplace_back();
      continue;
    }
    plan.neighbors.emplace_back(nb[uniform_index(tur_rng, nb.size())]);
    plan.neighbor_samples.push_back(sample_vertices(n, c, sgt_rng));
  }
  return plan;
}

/// Everything forward() computed that backward() needs.
struct ForwardTape {
  bool recorded = false;
  std::vector<EncoderTrace> encoder_traces;
  Matrix fused;
  Matrix query_all;  // fused * W_Q
  Matrix key_all;    // fused * W_K
  std::vector<SampledBlock> anchor_blocks;
  std::vector<AttentionTrace> anchor_traces;
  std::vector<SampledBlock> neighbor_blocks;  // empty stacked when no neighbor
  std::vector<AttentionTrace> neighbor_traces;
  Matrix final_reps;  // one row per anchor
  BprResult bpr;
  TurResult tur;
  LossBreakdown loss;
};

namespace detail {

inline const std::vector<std::size_t> kNoRows;

/// Attends one block from the tape's projections. Neighbor blocks only need
/// the anchor row, so `full` = false restricts the queries to row 0.
inline Matrix block_query(const ForwardTape& tape, const SampledBlock& block, bool full) {
  return gather_rows(tape.query_all, block.anchor, full ? block.sampled : kNoRows);
}

inline void run_block(const ForwardTape& tape, SampledBlock& block, double gamma,
                      AttentionTrace& trace, bool full) {
  block.stacked = gather_rows(tape.fused, block.anchor, block.sampled);
  block.output = attend_projected(block.stacked, block_query(tape, block, full),
                                  gather_rows(tape.key_all, block.anchor, block.sampled), gamma, &trace);
}

/// Adds row 0 of `rows` to the anchor's row and row j + 1 to sampled vertex j.
inline void scatter_rows(Matrix& target, const Matrix& rows, const SampledBlock& block) {
  axpy(1.0, rows.row(0), target.row(block.anchor));
  for (std::size_t j = 0; j + 1 < rows.rows(); ++j)
    axpy(1.0, rows.row(j + 1), target.row(block.sampled[j]));
}

}  // namespace detail

inline ForwardTape forward(const Model& model, const BatchPlan& plan) {
  const auto& cfg = model.config();
  ForwardTape tape;
  std::vector<Matrix> outputs;
  for (const auto& m : model.modalities()) {
    EncoderTrace trace;
    outputs.push_back(propagate(model.graph().normalized, model.encoded(m, &trace), m.propagation));
    tape.encoder_traces.push_back(std::move(trace));
  }
  tape.fused = fuse(outputs);

  const std::size_t num_anchors = plan.anchors.size();
  tape.final_reps = Matrix(num_anchors, cfg.d);
  if (cfg.use_sgt) {
    if (plan.anchor_samples.size() != num_anchors || plan.neighbors.size() != num_anchors)
      throw Error("batch plan lacks transformer samples");
    tape.query_all = matmul(tape.fused, model.params().get("sgt.w_query").value);
    tape.key_all = matmul(tape.fused, model.params().get("sgt.w_key").value);
    tape.anchor_blocks.resize(num_anchors);
    tape.anchor_traces.resize(num_anchors);
    tape.neighbor_blocks.resize(num_anchors);
    tape.neighbor_traces.resize(num_anchors);
    std::vector<std::optional<std::vector<double>>> neighbor_reps(num_anchors);
    for (std::size_t a = 0; a < num_anchors; ++a) {
      auto& block = tape.anchor_blocks[a];
      block.anchor = plan.anchors[a];
      block.sampled = plan.anchor_samples[a];
      detail::run_block(tape, block, cfg.gamma, tape.anchor_traces[a], true);
      std::copy(block.output.row(0).begin(), block.output.row(0).end(), tape.final_reps.row(a).begin());
      if (!plan.neighbors[a]) continue;
      auto& nb = tape.neighbor_blocks[a];
      nb.anchor = *plan.neighbors[a];
      nb.sampled = plan.neighbor_samples[a];
      detail::run_block(tape, nb, cfg.gamma, tape.neighbor_traces[a], false);
      neighbor_reps[a] = final_representation(nb);
    }
    tape.tur = tur_loss_with_grad(tape.anchor_blocks, neighbor_reps);
  } else {
    for (std::size_t a = 0; a < num_anchors; ++a)
      std::copy(tape.fused.row(plan.anchors[a]).begin(), tape.fused.row(plan.anchors[a]).end(),
                tape.final_reps.row(a).begin());
  }

  const std::size_t b = plan.triples.size();
  Matrix users(b, cfg.d), pos(b, cfg.d), neg(b, cfg.d);
  for (std::size_t i = 0; i < b; ++i) {
    std::copy(tape.final_reps.row(3 * i).begin(), tape.final_reps.row(3 * i).end(), users.row(i).begin());
    std::copy(tape.final_reps.row(3 * i + 1).begin(), tape.final_reps.row(3 * i + 1).end(), pos.row(i).begin());
    std::copy(tape.final_reps.row(3 * i + 2).begin(), tape.final_reps.row(3 * i + 2).end(), neg.row(i).begin());
  }
  tape.bpr = bpr_loss_with_grad(users, pos, neg);
  tape.loss = combined_loss(tape.bpr.loss, tape.tur.loss, l2_loss(tape.final_reps), cfg.psi_l2);
  tape.recorded = true;
  return tape;
}

/// Accumulates d(loss_scale * total loss)/d(parameter) into every gradient buffer.
inline void backward(Model& model, const BatchPlan& plan, const ForwardTape& tape,
                     double loss_scale = 1.0) {
  if (!tape.recorded) throw Error("backward called without a recorded forward pass");
  const auto& cfg = model.config();
  const auto& graph = model.graph();
  const std::size_t num_anchors = plan.anchors.size();

  Matrix d_final = l2_loss_grad(tape.final_reps);
  for (auto& v : d_final.data()) v *= cfg.psi_l2;
  for (std::size_t i = 0; i < plan.triples.size(); ++i) {
    axpy(1.0, tape.bpr.d_user.row(i), d_final.row(3 * i));
    axpy(1.0, tape.bpr.d_pos.row(i), d_final.row(3 * i + 1));
    axpy(1.0, tape.bpr.d_neg.row(i), d_final.row(3 * i + 2));
  }
  for (auto& v : d_final.data()) v *= loss_scale;

  Matrix d_fused(tape.fused.rows(), tape.fused.cols());
  if (cfg.use_sgt) {
    Matrix d_query_all(tape.query_all.rows(), tape.query_all.cols());
    Matrix d_key_all(tape.key_all.rows(), tape.key_all.cols());
    auto block_backward = [&](const SampledBlock& block, const AttentionTrace& trace,
                              const Matrix& d_out, bool full) {
      const Matrix q = detail::block_query(tape, block, full);
      const Matrix k = gather_rows(tape.key_all, block.anchor, block.sampled);
      Matrix d_s(block.stacked.rows(), block.stacked.cols());
      Matrix d_q(q.rows(), q.cols());
      Matrix d_k(k.rows(), k.cols());
      attend_projected_backward(block.stacked, q, k, cfg.gamma, trace, d_out, d_s, d_q, d_k);
      detail::scatter_rows(d_fused, d_s, block);
      detail::scatter_rows(d_query_all, d_q, block);
      detail::scatter_rows(d_key_all, d_k, block);
    };
    for (std::size_t a = 0; a < num_anchors; ++a) {
      const auto& block = tape.anchor_blocks[a];
      Matrix d_out = tape.tur.d_outputs[a];
      for (auto& v : d_out.data()) v *= loss_scale;
      axpy(1.0, d_final.row(a), d_out.row(0));
      block_backward(block, tape.anchor_traces[a], d_out, true);
      if (!plan.neighbors[a]) continue;
      const auto& nb = tape.neighbor_blocks[a];
      Matrix d_nb(1, nb.stacked.cols());
      axpy(loss_scale, tape.tur.d_neighbor[a], d_nb.row(0));
      block_backward(nb, tape.neighbor_traces[a], d_nb, false);
    }
    auto& wq = model.params().get("sgt.w_query");
    auto& wk = model.params().get("sgt.w_key");
    add_scaled(wq.grad, matmul_tn(tape.fused, d_query_all));
    add_scaled(wk.grad, matmul_tn(tape.fused, d_key_all));
    add_scaled(d_fused, matmul_nt(d_query_all, wq.value));
    add_scaled(d_fused, matmul_nt(d_key_all, wk.value));
  } else {
    for (std::size_t a = 0; a < num_anchors; ++a)
      axpy(1.0, d_final.row(a), d_fused.row(plan.anchors[a]));
  }

  const auto& modalities = model.modalities();
  for (std::size_t mi = 0; mi < modalities.size(); ++mi) {
    const auto& m = modalities[mi];
    const Matrix d_encoded = propagate_adjoint(graph.normalized, d_fused, m.propagation);
    if (!m.feature_index) {
      add_scaled(model.params().get("embedding").grad, d_encoded);
      continue;
    }
    const EncoderParams enc = model.encoder(m);
    EncoderGrad g = EncoderGrad::zeros_like(enc);
    encode_modality_backward(graph.features[*m.feature_index], enc, tape.encoder_traces[mi],
                             d_encoded, g);
    for (std::size_t l = 0; l < g.layers.size(); ++l) {
      add_scaled(model.params().get(encoder_weight_name(m.id.label, l)).grad, g.layers[l].weight);
      add_scaled(model.params().get(encoder_bias_name(m.id.label, l)).grad, g.layers[l].bias);
    }
  }
}

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t entries_checked = 0;
};

/// Compares backward() with central finite differences of the total loss over
/// every parameter entry. Relative error is |a - n| / max(|a|, |n|, floor).
inline GradientCheckResult gradient_check(Model& model, const BatchPlan& plan, double step = 1e-5,
                                          double floor = 1e-6) {
  model.params().zero_grad();
  backward(model, plan, forward(model, plan));
  GradientCheckResult result;
  for (auto& p : model.params().all()) {
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      double& w = p.value.data()[i];
      const double saved = w;
      w = saved + step;
      const double up = forward(model, plan).loss.total;
      w = saved - step;
      const double down = forward(model, plan).loss.total;
      w = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double analytic = p.grad.data()[i];
      const double rel = std::abs(analytic - numeric) /
                         std::max({std::abs(analytic), std::abs(numeric), floor});
      ++result.entries_checked;
      if (rel >= result.max_relative_error) {
        result = {rel, p.name, i, analytic, numeric, result.entries_checked};
      }
    }
  }
  model.params().zero_grad();
  return result;
}

}  // namespace miggt
