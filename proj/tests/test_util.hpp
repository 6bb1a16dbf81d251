#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <random>
#include <set>
#include <vector>

#include "miggt/miggt.hpp"

namespace miggt::testutil {

inline Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(r, c);
  for (auto& v : m.data()) v = n(rng);
  return m;
}

/// Random bipartite interactions; each user gets at least one item.
inline InteractionSet random_interactions(std::size_t users, std::size_t items, double density,
                                          Rng& rng) {
  InteractionSet s{users, items, {}};
  std::bernoulli_distribution edge(density);
  for (std::size_t u = 0; u < users; ++u) {
    bool any = false;
    for (std::size_t i = 0; i < items; ++i) {
      if (edge(rng)) {
        s.pairs.push_back({u, i});
        any = true;
      }
    }
    if (!any) s.pairs.push_back({u, uniform_index(rng, items)});
  }
  return s;
}

inline Matrix dense_power_sum(const Matrix& a, const Matrix& x, const std::vector<double>& coef) {
  Matrix out(x.rows(), x.cols());
  Matrix term = x;
  for (std::size_t k = 0; k < coef.size(); ++k) {
    if (k > 0) term = matmul(a, term);
    add_scaled(out, term, coef[k]);
  }
  return out;
}

/// Central finite-difference gradient of a scalar function of one matrix.
template <typename F>
Matrix numeric_gradient(Matrix& x, F&& f, double step = 1e-5) {
  Matrix g(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x.data()[i];
    x.data()[i] = saved + step;
    const double up = f();
    x.data()[i] = saved - step;
    const double down = f();
    x.data()[i] = saved;
    g.data()[i] = (up - down) / (2.0 * step);
  }
  return g;
}

inline double max_relative_error(const Matrix& analytic, const Matrix& numeric,
                                 double floor = 1e-6) {
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double a = analytic.data()[i];
    const double n = numeric.data()[i];
    worst = std::max(worst, std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor}));
  }
  return worst;
}

/// Independent metric reference: an item's rank is the number of unmasked
/// items that beat it, so no sorting is involved.
inline MetricReport counting_metrics(const Matrix& scores, const EvalSplit& split,
                                     std::span<const std::size_t> ks) {
  MetricReport report;
  for (const std::size_t k : ks) report.recall_at[k] = report.ndcg_at[k] = 0.0;
  for (std::size_t u = 0; u < scores.rows(); ++u) {
    const auto& truth = split.ground_truth[u];
    if (truth.empty()) continue;
    auto masked = [&](std::size_t i) {
      return std::count(split.mask[u].begin(), split.mask[u].end(), i) > 0;
    };
    std::vector<std::size_t> rank_of_hit;  // 0-based
    for (const std::size_t t : truth) {
      std::size_t rank = 0;
      for (std::size_t j = 0; j < scores.cols(); ++j) {
        if (j == t || masked(j)) continue;
        if (scores(u, j) > scores(u, t) || (scores(u, j) == scores(u, t) && j < t)) ++rank;
      }
      rank_of_hit.push_back(rank);
    }
    std::sort(rank_of_hit.begin(), rank_of_hit.end());
    for (const std::size_t k : ks) {
      std::size_t hits = 0;
      double dcg = 0.0, idcg = 0.0;
      for (const std::size_t r : rank_of_hit) {
        if (r < k) {
          ++hits;
          dcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
        }
      }
      for (std::size_t p = 0; p < std::min(k, truth.size()); ++p)
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

}  // namespace miggt::testutil
