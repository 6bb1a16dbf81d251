#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "miggt/config.hpp"
#include "miggt/error.hpp"
#include "miggt/io/features.hpp"
#include "miggt/io/interactions.hpp"
#include "miggt/io/keyvalue.hpp"
#include "miggt/io/split.hpp"
#include "miggt/training.hpp"

namespace miggt::io {

namespace fs = std::filesystem;

inline std::string resolve_path(const fs::path& base_dir, const std::string& p) {
  const fs::path path(p);
  return (path.is_absolute() ? path : base_dir / path).lexically_normal().string();
}

/// A feature file and where its rows go.
struct FeatureEntry {
  ModalityId modality;
  std::string path;
  std::size_t dim = 0;
  std::string range = "items";  // items | users | all
  std::string ids_path;         // optional: one id per file row
};

/// Where a dataset lives and what it should contain. Stored as a flat
/// key = value document; relative paths are relative to the manifest.
struct DatasetManifest {
  std::string name;
  std::string interactions_path;
  std::vector<FeatureEntry> features;
  std::optional<std::size_t> num_users;
  std::optional<std::size_t> num_items;
  std::optional<std::size_t> num_interactions;

  static DatasetManifest from_document(const KeyValueDocument& doc, const fs::path& base_dir) {
    DatasetManifest m;
    m.name = doc.find("name") ? *doc.find("name") : "dataset";
    m.interactions_path = resolve_path(base_dir, doc.require("interactions"));
    auto count = [&](const char* key) -> std::optional<std::size_t> {
      if (const auto* v = doc.find(key)) return miggt::detail::parse_value<std::size_t>(key, *v);
      return std::nullopt;
    };
    m.num_users = count("num_users");
    m.num_items = count("num_items");
    m.num_interactions = count("num_interactions");
    for (const auto& [key, value] : doc.entries()) {
      if (key == "name" || key == "interactions" || key == "num_users" || key == "num_items" ||
          key == "num_interactions")
        continue;
      if (!key.starts_with("feature.")) throw FormatError("unknown manifest key '" + key + "'");
      const auto dot = key.rfind('.');
      const std::string label = key.substr(8, dot - 8);
      const std::string field = key.substr(dot + 1);
      if (label.empty() || dot < 8) throw FormatError("malformed manifest key '" + key + "'");
      FeatureEntry* entry = nullptr;
      for (auto& f : m.features)
        if (f.modality.label == label) entry = &f;
      if (!entry) {
        m.features.push_back({ModalityId::from_label(label), {}, 0, "items", {}});
        entry = &m.features.back();
      }
      if (field == "path") entry->path = resolve_path(base_dir, value);
      else if (field == "dim") entry->dim = miggt::detail::parse_value<std::size_t>(key, value);
      else if (field == "range") entry->range = value;
      else if (field == "ids") entry->ids_path = resolve_path(base_dir, value);
      else throw FormatError("unknown manifest key '" + key + "'");
    }
    for (const auto& f : m.features) {
      if (f.modality.kind == ModalityKind::kEmbedding)
        throw FormatError("the embedding modality cannot have a feature file");
      if (f.path.empty()) throw FormatError("feature '" + f.modality.label + "' has no path");
      if (f.dim == 0) throw RangeError("feature '" + f.modality.label + "' needs a positive dim");
      if (f.range != "items" && f.range != "users" && f.range != "all")
        throw FormatError("feature '" + f.modality.label + "' has unknown range '" + f.range + "'");
    }
    return m;
  }

  static DatasetManifest load(const std::string& path) {
    return from_document(KeyValueDocument::load(path), fs::path(path).parent_path());
  }
};

struct LoadedDataset {
  Dataset data;
  IdMap users;
  IdMap items;
  std::size_t duplicates = 0;
};

inline FeatureStore load_feature_entry(const FeatureEntry& f, const InteractionSet& all,
                                       const IdMap& users, const IdMap& items) {
  VertexRange range{0, all.num_vertices(), all.num_vertices()};
  const IdMap* ids = nullptr;
  if (f.range == "items") {
    range = {all.num_users, all.num_items, all.num_vertices()};
    ids = &items;
  } else if (f.range == "users") {
    range = {0, all.num_users, all.num_vertices()};
    ids = &users;
  }
  if (f.ids_path.empty()) return load_features(f.path, f.modality, f.dim, range);
  if (!ids) throw FormatError("feature '" + f.modality.label + "': ids need range items or users");
  std::vector<std::ptrdiff_t> mapping;
  for (const auto& id : read_id_list(f.ids_path)) {
    const auto* idx = ids->find(id);
    mapping.push_back(idx ? static_cast<std::ptrdiff_t>(*idx) : -1);
  }
  return load_features(f.path, f.modality, f.dim, range, &mapping);
}

/// Loads interactions and features, checks declared counts, then splits.
inline LoadedDataset load_dataset(const DatasetManifest& manifest, const SplitSpec& split) {
  auto loaded = load_interactions(manifest.interactions_path);
  const auto& all = loaded.interactions;
  auto check = [&](const std::optional<std::size_t>& declared, std::size_t actual, const char* what) {
    if (declared && *declared != actual) {
      throw FormatError(manifest.name + ": declared " + std::to_string(*declared) + " " + what +
                        " but found " + std::to_string(actual));
    }
  };
  check(manifest.num_users, all.num_users, "users");
  check(manifest.num_items, all.num_items, "items");
  check(manifest.num_interactions, all.pairs.size(), "interactions");

  LoadedDataset out;
  auto parts = split_interactions(all, split);
  out.data.train = std::move(parts.train);
  out.data.valid = std::move(parts.valid);
  out.data.test = std::move(parts.test);
  for (const auto& f : manifest.features)
    out.data.features.push_back(load_feature_entry(f, all, loaded.users, loaded.items));
  out.users = std::move(loaded.users);
  out.items = std::move(loaded.items);
  out.duplicates = loaded.duplicates;
  return out;
}

/// Everything a CLI run needs: dataset, split, hyperparameters and output location.
struct RunConfig {
  std::string manifest_path;
  std::string output_dir = "out";
  SplitSpec split;
  TrainConfig train;
  std::size_t workers = 1;

  static RunConfig from_document(const KeyValueDocument& doc, const fs::path& base_dir) {
    RunConfig c;
    c.manifest_path = resolve_path(base_dir, doc.require("manifest"));
    if (!fs::exists(c.manifest_path)) throw Error("manifest '" + c.manifest_path + "' does not exist");
    for (const auto& [key, value] : doc.entries()) {
      if (key == "manifest") continue;
      if (key == "output_dir") c.output_dir = resolve_path(base_dir, value);
      else if (key == "workers") c.workers = miggt::detail::parse_value<std::size_t>(key, value);
      else if (key == "split.train") c.split.train = miggt::detail::parse_value<double>(key, value);
      else if (key == "split.valid") c.split.valid = miggt::detail::parse_value<double>(key, value);
      else if (key == "split.test") c.split.test = miggt::detail::parse_value<double>(key, value);
      else if (key == "split.seed") c.split.seed = miggt::detail::parse_value<std::uint64_t>(key, value);
      else if (!set_train_option(c.train, key, value)) throw FormatError("unknown config key '" + key + "'");
    }
    c.split.validate();
    c.train.validate();
    return c;
  }

  static RunConfig load(const std::string& path) {
    return from_document(KeyValueDocument::load(path), fs::path(path).parent_path());
  }
};

/// TrainConfig as key = value entries understood by set_train_option.
inline KeyValueDocument train_config_document(const TrainConfig& c) {
  KeyValueDocument d;
  d.set("learning_rate", format_double(c.learning_rate));
  d.set("psi_l2", format_double(c.psi_l2));
  d.set("batch_size", std::to_string(c.batch_size));
  d.set("max_epochs", std::to_string(c.max_epochs));
  d.set("patience", std::to_string(c.patience));
  d.set("c_samples", std::to_string(c.c_samples));
  d.set("gamma", format_double(c.gamma));
  d.set("d", std::to_string(c.d));
  d.set("d_att", std::to_string(c.d_att));
  d.set("encoder_layers", std::to_string(c.encoder_layers));
  d.set("hidden_dim", std::to_string(c.hidden_dim));
  d.set("max_hops", std::to_string(c.max_hops));
  d.set("eval_repeats", std::to_string(c.eval_repeats));
  d.set("use_sgt", c.use_sgt ? "true" : "false");
  d.set("seed", std::to_string(c.seed));
  d.set("k", std::to_string(c.default_propagation.k_hops));
  d.set("alpha", format_double(c.default_propagation.alpha));
  d.set("beta", format_double(c.default_propagation.beta));
  for (const auto& [label, p] : c.propagation) {
    d.set("k." + label, std::to_string(p.k_hops));
    d.set("alpha." + label, format_double(p.alpha));
    d.set("beta." + label, format_double(p.beta));
  }
  return d;
}

}  // namespace miggt::io
