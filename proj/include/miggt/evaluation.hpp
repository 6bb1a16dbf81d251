#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "miggt/error.hpp"
#include "miggt/graph.hpp"
#include "miggt/matrix.hpp"

namespace miggt {

/// Held-out items per user and the items excluded from that user's ranking.
/// All lists are sorted ascending.
struct EvalSplit {
  std::vector<std::vector<std::size_t>> ground_truth;
  std::vector<std::vector<std::size_t>> mask;

  std::size_t num_users() const { return ground_truth.size(); }
};

inline EvalSplit make_eval_split(const InteractionSet& truth,
                                 std::span<const InteractionSet* const> masked) {
  EvalSplit s;
  s.ground_truth = truth.items_by_user();
  s.mask.assign(truth.num_users, {});
  for (const auto* m : masked) {
    for (const auto& p : m->pairs) s.mask[p.user].push_back(p.item);
  }
  for (auto& m : s.mask) {
    std::sort(m.begin(), m.end());
    m.erase(std::unique(m.begin(), m.end()), m.end());
  }
  for (std::size_t u = 0; u < s.num_users(); ++u) {
    for (const std::size_t item : s.ground_truth[u]) {
      if (std::binary_search(s.mask[u].begin(), s.mask[u].end(), item)) {
        throw Error("user " + std::to_string(u) + " has item " + std::to_string(item) +
                    " in both ground truth and mask");
      }
    }
  }
  return s;
}

/// Validation: rank against the validation items with training items masked.
inline EvalSplit make_validation_split(const InteractionSet& train, const InteractionSet& valid) {
  const InteractionSet* masked[] = {&train};
  return make_eval_split(valid, masked);
}

/// Test: rank against the test items with training and validation items masked.
inline EvalSplit make_test_split(const InteractionSet& train, const InteractionSet& valid,
                                 const InteractionSet& test) {
  const InteractionSet* masked[] = {&train, &valid};
  return make_eval_split(test, masked);
}

struct MetricReport {
  std::map<std::size_t, double> recall_at;
  std::map<std::size_t, double> ndcg_at;
  std::size_t users_evaluated = 0;

  double recall(std::size_t k) const { return recall_at.at(k); }
  double ndcg(std::size_t k) const { return ndcg_at.at(k); }

  friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

/// Score order: descending score, ties by ascending item index.
inline bool ranks_before(std::span<const double> scores, std::size_t a, std::size_t b) {
  if (scores[a] != scores[b]) return scores[a] > scores[b];
  return a < b;
}

/// Top-k unmasked items by score. `mask` must be sorted.
inline std::vector<std::size_t> rank_by_scores(std::span<const double> scores,
                                               std::span<const std::size_t> mask, std::size_t k) {
  std::vector<std::size_t> candidates;
  candidates.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (!std::binary_search(mask.begin(), mask.end(), i)) candidates.push_back(i);
  if (k > candidates.size()) {
    throw RangeError("k = " + std::to_string(k) + " exceeds " + std::to_string(candidates.size()) +
                     " rankable items");
  }
  const auto mid = candidates.begin() + static_cast<std::ptrdiff_t>(k);
  std::partial_sort(candidates.begin(), mid, candidates.end(),
                    [&](std::size_t a, std::size_t b) { return ranks_before(scores, a, b); });
  candidates.resize(k);
  return candidates;
}

/// Items ranked by dot product with the user representation.
inline std::vector<std::size_t> rank_items(std::span<const double> user_rep,
                                           const Matrix& item_reps,
                                           std::span<const std::size_t> mask, std::size_t k) {
  if (user_rep.size() != item_reps.cols()) throw DimensionError("rank_items: dimension mismatch");
  std::vector<double> scores(item_reps.rows());
  for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = dot(user_rep, item_reps.row(i));
  return rank_by_scores(scores, mask, k);
}

/// |topk ∩ truth| / |truth|. `truth` must be sorted and nonempty.
inline double recall_at_k(std::span<const std::size_t> topk, std::span<const std::size_t> truth) {
  if (truth.empty()) throw Error("recall_at_k: empty ground truth");
  std::size_t hits = 0;
  for (const std::size_t item : topk) hits += std::binary_search(truth.begin(), truth.end(), item);
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

/// DCG of the first k positions over the ideal DCG of min(k, |truth|) hits.
inline double ndcg_at_k(std::span<const std::size_t> topk, std::span<const std::size_t> truth,
                        std::size_t k) {
  if (truth.empty()) throw Error("ndcg_at_k: empty ground truth");
  double dcg = 0.0;
  for (std::size_t p = 0; p < std::min(k, topk.size()); ++p)
    if (std::binary_search(truth.begin(), truth.end(), topk[p]))
      dcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
  double idcg = 0.0;
  for (std::size_t p = 0; p < std::min(k, truth.size()); ++p)
    idcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
  return dcg / idcg;
}

/// Full-catalog Recall@K and NDCG@K. `final_reps` holds users first, then items.
inline MetricReport evaluate(const Matrix& final_reps, std::size_t num_users,
                             const EvalSplit& split, std::span<const std::size_t> ks) {
  if (num_users != split.num_users() || num_users > final_reps.rows()) {
    throw DimensionError("evaluate: representation rows do not match the split");
  }
  if (ks.empty()) throw Error("evaluate: no cutoffs requested");
  const std::size_t num_items = final_reps.rows() - num_users;
  const std::size_t max_k = *std::max_element(ks.begin(), ks.end());

  MetricReport report;
  for (const std::size_t k : ks) report.recall_at[k] = report.ndcg_at[k] = 0.0;
  std::vector<double> scores(num_items);
  for (std::size_t u = 0; u < num_users; ++u) {
    const auto& truth = split.ground_truth[u];
    if (truth.empty()) continue;
    const auto& mask = split.mask[u];
    const auto user = final_reps.row(u);
    for (std::size_t i = 0; i < num_items; ++i) scores[i] = dot(user, final_reps.row(num_users + i));
    const std::size_t rankable = num_items - mask.size();
    const auto top = rank_by_scores(scores, mask, std::min(max_k, rankable));
    for (const std::size_t k : ks) {
      const std::span<const std::size_t> prefix(top.data(), std::min(k, top.size()));
      report.recall_at[k] += recall_at_k(prefix, truth);
      report.ndcg_at[k] += ndcg_at_k(prefix, truth, k);
    }
    ++report.users_evaluated;
  }
  if (report.users_evaluated == 0) throw Error("evaluate: no users with held-out items");
  const double n = static_cast<double>(report.users_evaluated);
  for (auto& [k, v] : report.recall_at) v /= n;
  for (auto& [k, v] : report.ndcg_at) v /= n;
  return report;
}

/// Reference metrics from a dense user x item score matrix: every user's
/// catalog is fully sorted, then cut. Meant for small instances.
inline MetricReport brute_force_metrics_oracle(const Matrix& scores, const EvalSplit& split,
                                               std::span<const std::size_t> ks) {
  MetricReport report;
  for (const std::size_t k : ks) report.recall_at[k] = report.ndcg_at[k] = 0.0;
  for (std::size_t u = 0; u < scores.rows(); ++u) {
    const auto& truth = split.ground_truth[u];
    if (truth.empty()) continue;
    std::vector<std::size_t> order(scores.cols());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return scores(u, a) > scores(u, b) || (scores(u, a) == scores(u, b) && a < b);
    });
    std::vector<std::size_t> ranked;
    for (const std::size_t i : order)
      if (std::find(split.mask[u].begin(), split.mask[u].end(), i) == split.mask[u].end())
        ranked.push_back(i);
    for (const std::size_t k : ks) {
      std::size_t hits = 0;
      double dcg = 0.0;
      for (std::size_t p = 0; p < k && p < ranked.size(); ++p) {
        if (std::find(truth.begin(), truth.end(), ranked[p]) != truth.end()) {
          ++hits;
          dcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
        }
      }
      double idcg = 0.0;
      for (std::size_t p = 0; p < k && p < truth.size(); ++p)
        idcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
      report.recall_at[k] += static_cast<double>(hits) / static_cast<double>(truth.size());
      report.ndcg_at[k] += dcg / idcg;
    }
    ++report.users_evaluated;
  }
  if (report.users_evaluated == 0) return report;
  const double n = static_cast<double>(report.users_evaluated);
  for (auto& [k, v] : report.recall_at) v /= n;
  for (auto& [k, v] : report.ndcg_at) v /= n;
  return report;
}

/// Element-wise mean of reports sharing the same cutoffs (e.g. across seeds).
inline MetricReport mean_report(std::span<const MetricReport> reports) {
  if (reports.empty()) throw Error("mean_report: no reports");
  MetricReport out = reports.front();
  for (std::size_t i = 1; i < reports.size(); ++i) {
    for (auto& [k, v] : out.recall_at) v += reports[i].recall_at.at(k);
    for (auto& [k, v] : out.ndcg_at) v += reports[i].ndcg_at.at(k);
    out.users_evaluated += reports[i].users_evaluated;
  }
  const double n = static_cast<double>(reports.size());
  for (auto& [k, v] : out.recall_at) v /= n;
  for (auto& [k, v] : out.ndcg_at) v /= n;
  out.users_evaluated = static_cast<std::size_t>(static_cast<double>(out.users_evaluated) / n);
  return out;
}

}  // namespace miggt
