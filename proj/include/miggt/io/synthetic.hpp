#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "miggt/encoding.hpp"
#include "miggt/error.hpp"
#include "miggt/graph.hpp"
#include "miggt/io/dataset.hpp"
#include "miggt/io/features.hpp"
#include "miggt/io/interactions.hpp"
#include "miggt/io/keyvalue.hpp"
#include "miggt/random.hpp"

namespace miggt::io {

/// Block-structured dataset: user group g prefers item group g mod item_groups.
struct SyntheticSpec {
  std::size_t user_groups = 2;
  std::size_t item_groups = 2;
  std::size_t users_per_group = 100;
  std::size_t items_per_group = 100;
  /// Probability of an edge between a user and an item of its preferred group.
  /// Other groups share 1 - affinity evenly.
  double affinity = 0.9;
  std::vector<std::pair<std::string, std::size_t>> modalities{{"text", 16}, {"visual", 24}};
  double noise = 0.1;
  /// Each user also likes one extra item drawn uniformly from the whole catalog.
  bool global_likes = false;
  std::uint64_t seed = 1;

  void validate() const {
    if (user_groups == 0 || item_groups == 0 || users_per_group == 0 || items_per_group == 0)
      throw RangeError("synthetic group counts and sizes must be positive");
    if (!(affinity > 0.5 && affinity <= 1.0)) throw RangeError("affinity must lie in (0.5, 1]");
    if (!(noise >= 0.0)) throw RangeError("noise must be >= 0");
    for (const auto& [label, dim] : modalities) {
      if (dim == 0) throw RangeError("feature dim of '" + label + "' must be positive");
      if (label.empty() || label == "embedding") throw RangeError("invalid modality label '" + label + "'");
    }
  }

  std::size_t num_users() const { return user_groups * users_per_group; }
  std::size_t num_items() const { return item_groups * items_per_group; }
  std::size_t user_group(std::size_t u) const { return u / users_per_group; }
  std::size_t item_group(std::size_t i) const { return i / items_per_group; }
  std::size_t preferred_group(std::size_t u) const { return user_group(u) % item_groups; }
};

struct SyntheticData {
  InteractionSet interactions;
  std::vector<std::string> user_ids;
  std::vector<std::string> item_ids;
  /// num_items x dim per modality, rows in item index order.
  std::vector<std::pair<std::string, Matrix>> item_features;
  std::size_t in_group_edges = 0;
};

inline SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng = make_stream(spec.seed, Stream::kSynthetic);
  // Separate stream so toggling global_likes leaves the block edges unchanged.
  Rng extra = make_stream(spec.seed, Stream::kSynthetic, 1);
  SyntheticData out;
  auto& set = out.interactions;
  set.num_users = spec.num_users();
  set.num_items = spec.num_items();
  for (std::size_t u = 0; u < set.num_users; ++u) out.user_ids.push_back("u" + std::to_string(u));
  for (std::size_t i = 0; i < set.num_items; ++i) out.item_ids.push_back("i" + std::to_string(i));

  const double out_prob =
      spec.item_groups > 1 ? (1.0 - spec.affinity) / static_cast<double>(spec.item_groups - 1) : 0.0;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t u = 0; u < set.num_users; ++u) {
    std::vector<bool> liked(set.num_items, false);
    std::size_t count = 0;
    for (std::size_t i = 0; i < set.num_items; ++i) {
      const bool in_group = spec.item_group(i) == spec.preferred_group(u);
      if (unit(rng) < (in_group ? spec.affinity : out_prob)) {
        liked[i] = true;
        ++count;
        out.in_group_edges += in_group;
      }
    }
    if (count == 0) {
      const std::size_t i = spec.preferred_group(u) * spec.items_per_group +
                            uniform_index(rng, spec.items_per_group);
      liked[i] = true;
      ++count;
      ++out.in_group_edges;
    }
    if (spec.global_likes && count < set.num_items) {
      std::size_t i = uniform_index(extra, set.num_items);
      while (liked[i]) i = uniform_index(extra, set.num_items);
      liked[i] = true;
      out.in_group_edges += spec.item_group(i) == spec.preferred_group(u);
    }
    for (std::size_t i = 0; i < set.num_items; ++i)
      if (liked[i]) set.pairs.push_back({u, i});
  }

  std::normal_distribution<double> normal(0.0, 1.0);
  for (const auto& [label, dim] : spec.modalities) {
    Matrix centroids(spec.item_groups, dim);
    for (auto& v : centroids.data()) v = normal(rng);
    Matrix features(set.num_items, dim);
    for (std::size_t i = 0; i < set.num_items; ++i)
      for (std::size_t c = 0; c < dim; ++c)
        features(i, c) = centroids(spec.item_group(i), c) + spec.noise * normal(rng);
    out.item_features.emplace_back(label, std::move(features));
  }
  return out;
}

/// Writes interactions.tsv, items.txt, one <label>.mmft per modality and
/// manifest.cfg into `dir`. Returns the manifest path.
inline std::string write_synthetic(const SyntheticData& data, const std::string& dir,
                                   const std::string& name = "synthetic") {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  write_interactions((base / "interactions.tsv").string(), data.interactions, data.user_ids,
                     data.item_ids);
  write_id_list((base / "items.txt").string(), data.item_ids);
  KeyValueDocument manifest;
  manifest.set("name", name);
  manifest.set("interactions", "interactions.tsv");
  // Users without any interaction never appear in the file.
  std::vector<bool> user_seen(data.interactions.num_users, false), item_seen(data.interactions.num_items, false);
  for (const auto& p : data.interactions.pairs) user_seen[p.user] = item_seen[p.item] = true;
  manifest.set("num_users", std::to_string(std::count(user_seen.begin(), user_seen.end(), true)));
  manifest.set("num_items", std::to_string(std::count(item_seen.begin(), item_seen.end(), true)));
  manifest.set("num_interactions", std::to_string(data.interactions.pairs.size()));
  for (const auto& [label, features] : data.item_features) {
    write_feature_matrix((base / (label + ".mmft")).string(), features, ElementType::kFloat32);
    manifest.set("feature." + label + ".path", label + ".mmft");
    manifest.set("feature." + label + ".dim", std::to_string(features.cols()));
    manifest.set("feature." + label + ".range", "items");
    manifest.set("feature." + label + ".ids", "items.txt");
  }
  const std::string path = (base / "manifest.cfg").string();
  manifest.save(path);
  return path;
}

/// In-memory Dataset straight from generated data, without touching disk.
inline Dataset synthetic_dataset(const SyntheticData& data, const SplitSpec& split) {
  Dataset d;
  auto parts = split_interactions(data.interactions, split);
  d.train = std::move(parts.train);
  d.valid = std::move(parts.valid);
  d.test = std::move(parts.test);
  const std::size_t nu = data.interactions.num_users;
  const std::size_t n = data.interactions.num_vertices();
  for (const auto& [label, features] : data.item_features) {
    FeatureStore store{ModalityId::from_label(label), Matrix(n, features.cols()),
                       std::vector<bool>(n, false)};
    for (std::size_t i = 0; i < features.rows(); ++i) {
      std::copy(features.row(i).begin(), features.row(i).end(), store.rows.row(nu + i).begin());
      store.has_feature[nu + i] = true;
    }
    d.features.push_back(std::move(store));
  }
  return d;
}

}  // namespace miggt::io
