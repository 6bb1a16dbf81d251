#pragma once

#include <algorithm>
#include <chrono>
#include <exception>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "miggt/config.hpp"
#include "miggt/evaluation.hpp"
#include "miggt/model.hpp"
#include "miggt/objective.hpp"
#include "miggt/random.hpp"

namespace miggt {

/// Train/validation/test interactions plus raw features of every non-embedding modality.
struct Dataset {
  InteractionSet train;
  InteractionSet valid;
  InteractionSet test;
  std::vector<FeatureStore> features;
};

inline constexpr std::size_t kEvalCutoffs[] = {10, 20};

struct EpochRecord {
  std::size_t epoch = 0;
  LossBreakdown loss;  // batch means
  MetricReport valid;
  double elapsed_seconds = 0.0;
};

struct TrainResult {
  std::vector<Parameter> best_params;
  std::vector<EpochRecord> log;
  std::size_t best_epoch = 0;  // 0 when no epoch ran
  MetricReport best_valid;
  std::size_t epochs_run = 0;
};

/// Optional per-epoch callback, e.g. for streaming the log.
using EpochObserver = std::function<void(const EpochRecord&)>;

/// The random streams one training run consumes.
struct TrainingStreams {
  Rng shuffle, negative, sgt, tur;

  explicit TrainingStreams(std::uint64_t seed)
      : shuffle(make_stream(seed, Stream::kShuffle)),
        negative(make_stream(seed, Stream::kNegative)),
        sgt(make_stream(seed, Stream::kSgtSample)),
        tur(make_stream(seed, Stream::kTurNeighbor)) {}
};

inline void restore_params(Model& model, const std::vector<Parameter>& saved) {
  for (const auto& s : saved) model.params().get(s.name).value = s.value;
}

inline MetricReport evaluate_model(const Model& model, const EvalSplit& split) {
  return evaluate(model.final_representations(model.eval_seed()), model.graph().num_users(), split,
                  kEvalCutoffs);
}

/// One pass over the shuffled positive training edges in mini-batches.
inline LossBreakdown run_epoch(Model& model, TrainingStreams& streams,
                               const NegativeSampler& negatives) {
  const auto& cfg = model.config();
  auto positives = model.graph().train.pairs;
  std::shuffle(positives.begin(), positives.end(), streams.shuffle);
  LossBreakdown mean;
  std::size_t batches = 0;
  for (std::size_t start = 0; start < positives.size(); start += cfg.batch_size) {
    const std::size_t end = std::min(positives.size(), start + cfg.batch_size);
    std::vector<TrainingTriple> triples;
    triples.reserve(end - start);
    for (std::size_t i = start; i < end; ++i) {
      const auto& p = positives[i];
      triples.push_back({p.user, p.item, negatives.sample(p.user, streams.negative)});
    }
    const BatchPlan plan = plan_batch(model, std::move(triples), streams.sgt, streams.tur);
    const ForwardTape tape = forward(model, plan);
    backward(model, plan, tape);
    model.params().adam_step(cfg.learning_rate);
    mean.bpr += tape.loss.bpr;
    mean.tur += tape.loss.tur;
    mean.l2 += tape.loss.l2;
    mean.total += tape.loss.total;
    ++batches;
  }
  if (batches > 0) {
    const double n = static_cast<double>(batches);
    mean.bpr /= n;
    mean.tur /= n;
    mean.l2 /= n;
    mean.total /= n;
  }
  mean.l2_coefficient = cfg.psi_l2;
  return mean;
}

/// Trains with early stopping on validation NDCG@20 and leaves the model
/// holding the best-validation parameters.
inline TrainResult train(Model& model, const Dataset& data, const EpochObserver& observer = {}) {
  const auto& cfg = model.config();
  if (model.graph().train.pairs.empty()) throw Error("training split is empty");
  const EvalSplit valid_split = make_validation_split(data.train, data.valid);
  const NegativeSampler negatives(model.graph().train);
  TrainingStreams streams(cfg.seed);

  TrainResult result;
  result.best_params = model.params().all();
  double best = -std::numeric_limits<double>::infinity();
  std::size_t stale = 0;
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss = run_epoch(model, streams, negatives);
    rec.valid = evaluate_model(model, valid_split);
    rec.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.log.push_back(rec);
    result.epochs_run = epoch;
    if (observer) observer(rec);
    if (rec.valid.ndcg(20) > best) {
      best = rec.valid.ndcg(20);
      result.best_epoch = epoch;
      result.best_valid = rec.valid;
      result.best_params = model.params().all();
      stale = 0;
    } else if (++stale >= cfg.patience) {
      break;
    }
  }
  restore_params(model, result.best_params);
  return result;
}

/// Hyperparameter axes, each a config key with candidate values.
struct GridSpec {
  std::vector<std::pair<std::string, std::vector<std::string>>> axes;
  std::size_t max_cells = 256;

  std::size_t cell_count() const {
    std::size_t n = 1;
    for (const auto& [key, values] : axes) n *= values.size();
    return n;
  }
};

struct GridRow {
  std::vector<std::pair<std::string, std::string>> settings;
  TrainConfig config;
  MetricReport valid;
  MetricReport test;
  std::size_t best_epoch = 0;
};

struct GridResult {
  std::vector<GridRow> rows;
  std::size_t best = 0;  // argmax of validation NDCG@20
};

/// Index of the row with the best validation NDCG@20. Ties go to the
/// lexicographically smallest settings so the choice is independent of row order.
inline std::size_t select_best(const std::vector<GridRow>& rows) {
  if (rows.empty()) throw Error("select_best: empty grid");
  std::size_t best = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double a = rows[i].valid.ndcg(20);
    const double b = rows[best].valid.ndcg(20);
    if (a > b || (a == b && rows[i].settings < rows[best].settings)) best = i;
  }
  return best;
}

/// Cartesian product of the axes in row-major order (last axis fastest).
inline std::vector<std::vector<std::pair<std::string, std::string>>> grid_cells(const GridSpec& spec) {
  if (spec.axes.empty()) throw Error("grid has no axes");
  for (const auto& [key, values] : spec.axes)
    if (values.empty()) throw Error("grid axis '" + key + "' has no values");
  if (spec.cell_count() > spec.max_cells) {
    throw RangeError("grid has " + std::to_string(spec.cell_count()) + " cells, cap is " +
                     std::to_string(spec.max_cells));
  }
  std::vector<std::vector<std::pair<std::string, std::string>>> cells{{}};
  for (const auto& [key, values] : spec.axes) {
    std::vector<std::vector<std::pair<std::string, std::string>>> next;
    for (const auto& cell : cells) {
      for (const auto& v : values) {
        auto c = cell;
        c.emplace_back(key, v);
        next.push_back(std::move(c));
      }
    }
    cells = std::move(next);
  }
  return cells;
}

/// Trains and scores one configuration: best-validation parameters, then test metrics.
inline GridRow train_and_score(std::shared_ptr<const GraphData> graph, const Dataset& data,
                               const TrainConfig& config) {
  Model model(std::move(graph), config);
  const TrainResult r = train(model, data);
  GridRow row;
  row.config = config;
  row.best_epoch = r.best_epoch;
  row.valid = evaluate_model(model, make_validation_split(data.train, data.valid));
  row.test = evaluate_model(model, make_test_split(data.train, data.valid, data.test));
  return row;
}

/// One training per grid cell. Cells are independent and run on up to
/// `workers` threads; results do not depend on the worker count.
inline GridResult grid_search(const GridSpec& spec, const TrainConfig& base, const Dataset& data,
                              std::size_t workers = 1) {
  const auto cells = grid_cells(spec);
  std::vector<TrainConfig> configs;
  for (const auto& cell : cells) {
    TrainConfig c = base;
    for (const auto& [key, value] : cell)
      if (!set_train_option(c, key, value)) throw Error("unknown grid key '" + key + "'");
    c.validate();
    configs.push_back(std::move(c));
  }
  const auto graph = GraphData::build(data.train, data.features);
  GridResult result;
  result.rows.resize(cells.size());
  auto run = [&](std::size_t i) {
    result.rows[i] = train_and_score(graph, data, configs[i]);
    result.rows[i].settings = cells[i];
  };
  workers = std::clamp<std::size_t>(workers, 1, cells.size());
  if (workers == 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) run(i);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < cells.size(); i += workers) run(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  result.best = select_best(result.rows);
  return result;
}

/// Sweep over the number of sampled vertices C, everything else fixed.
inline GridResult sweep_samples(const std::vector<std::size_t>& values, const TrainConfig& base,
                                const Dataset& data, std::size_t workers = 1) {
  GridSpec spec;
  std::vector<std::string> text;
  for (const auto v : values) text.push_back(std::to_string(v));
  spec.axes.emplace_back("c_samples", std::move(text));
  spec.max_cells = std::max<std::size_t>(values.size(), 1);
  return grid_search(spec, base, data, workers);
}

}  // namespace miggt
