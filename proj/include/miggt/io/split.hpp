#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <tuple>
#include <vector>

#include "miggt/error.hpp"
#include "miggt/graph.hpp"
#include "miggt/random.hpp"

namespace miggt::io {

struct SplitSpec {
  double train = 0.8;
  double valid = 0.1;
  double test = 0.1;
  std::uint64_t seed = 2024;

  void validate() const {
    if (train < 0 || valid < 0 || test < 0) throw RangeError("split ratios must be >= 0");
    if (std::abs(train + valid + test - 1.0) > 1e-9) throw RangeError("split ratios must sum to 1");
  }
};

struct Splits {
  InteractionSet train;
  InteractionSet valid;
  InteractionSet test;
};

/// Per-user split: each user's items are shuffled, floor(n * valid) go to
/// validation, floor(n * test) to test and the rest to training. Users with
/// fewer than three interactions keep everything in training.
inline Splits split_interactions(const InteractionSet& all, const SplitSpec& spec) {
  spec.validate();
  Splits s;
  for (auto* part : {&s.train, &s.valid, &s.test}) {
    part->num_users = all.num_users;
    part->num_items = all.num_items;
  }
  std::vector<std::vector<std::size_t>> by_user(all.num_users);
  for (const auto& p : all.pairs) by_user[p.user].push_back(p.item);
  Rng rng = make_stream(spec.seed, Stream::kSplit);
  for (std::size_t u = 0; u < all.num_users; ++u) {
    auto& items = by_user[u];
    const std::size_t n = items.size();
    if (n < 3) {
      for (const auto i : items) s.train.pairs.push_back({u, i});
      continue;
    }
    std::shuffle(items.begin(), items.end(), rng);
    auto count = [n](double r) { return static_cast<std::size_t>(std::floor(n * r + 1e-9)); };
    std::size_t n_valid = count(spec.valid);
    std::size_t n_test = count(spec.test);
    if (n_valid + n_test >= n) {
      // keep at least one training interaction
      if (n_test > 0) --n_test; else --n_valid;
    }
    for (std::size_t k = 0; k < n; ++k) {
      InteractionSet& dst = k < n_valid ? s.valid : (k < n_valid + n_test ? s.test : s.train);
      dst.pairs.push_back({u, items[k]});
    }
  }
  return s;
}

}  // namespace miggt::io
