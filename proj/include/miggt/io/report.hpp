#pragma once

#include <string>

#include "miggt/evaluation.hpp"
#include "miggt/io/keyvalue.hpp"
#include "miggt/training.hpp"
#include "json.hpp"

namespace miggt::io {

/// Flat record: recall@K, ndcg@K, users_evaluated.
inline KeyValueDocument report_document(const MetricReport& r) {
  KeyValueDocument d;
  for (const auto& [k, v] : r.recall_at) d.set("recall@" + std::to_string(k), format_double(v));
  for (const auto& [k, v] : r.ndcg_at) d.set("ndcg@" + std::to_string(k), format_double(v));
  d.set("users_evaluated", std::to_string(r.users_evaluated));
  return d;
}

/// One line of the training log.
inline std::string epoch_log_line(const EpochRecord& rec) {
  nlohmann::ordered_json j;
  j["epoch"] = rec.epoch;
  j["bpr"] = rec.loss.bpr;
  j["tur"] = rec.loss.tur;
  j["l2"] = rec.loss.l2;
  j["total"] = rec.loss.total;
  j["val_recall@10"] = rec.valid.recall(10);
  j["val_recall@20"] = rec.valid.recall(20);
  j["val_ndcg@10"] = rec.valid.ndcg(10);
  j["val_ndcg@20"] = rec.valid.ndcg(20);
  j["elapsed_seconds"] = rec.elapsed_seconds;
  return j.dump();
}

}  // namespace miggt::io
