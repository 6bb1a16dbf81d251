#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "miggt/error.hpp"
#include "miggt/mgdn.hpp"

namespace miggt {

/// Hyperparameters of one training run.
struct TrainConfig {
  double learning_rate = 1e-3;
  double psi_l2 = 1e-4;
  std::size_t batch_size = 2048;
  std::size_t max_epochs = 100;
  std::size_t patience = 10;
  std::size_t c_samples = 10;
  double gamma = 0.9;
  std::size_t d = 64;
  std::size_t d_att = 32;
  /// Propagation per modality label ("embedding", "text", "visual", ...).
  std::map<std::string, PropagationConfig> propagation;
  /// Used for modalities without an entry in `propagation`.
  PropagationConfig default_propagation;
  std::size_t encoder_layers = 1;
  std::size_t hidden_dim = 0;
  std::size_t max_hops = kDefaultMaxHops;
  std::size_t eval_repeats = 1;
  bool use_sgt = true;
  std::uint64_t seed = 42;

  PropagationConfig propagation_for(const std::string& label) const {
    const auto it = propagation.find(label);
    return it == propagation.end() ? default_propagation : it->second;
  }

  void validate() const {
    if (!(learning_rate >= 0.0)) throw RangeError("learning_rate must be >= 0");
    if (!(psi_l2 >= 0.0)) throw RangeError("psi_l2 must be >= 0");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw RangeError("gamma must lie in [0, 1]");
    if (patience < 1) throw RangeError("patience must be at least 1");
    if (batch_size == 0) throw RangeError("batch_size must be positive");
    if (d == 0 || d_att == 0) throw RangeError("d and d_att must be positive");
    if (eval_repeats == 0) throw RangeError("eval_repeats must be positive");
    if (encoder_layers == 0) throw RangeError("encoder_layers must be positive");
    default_propagation.validate(max_hops);
    for (const auto& [label, p] : propagation) p.validate(max_hops);
  }
};

namespace detail {

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  T v{};
  in >> v;
  if (in.fail() || !(in >> std::ws).eof()) {
    throw FormatError("invalid value '" + text + "' for '" + key + "'");
  }
  return v;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw FormatError("invalid boolean '" + text + "' for '" + key + "'");
}

}  // namespace detail

/// Applies one `key = value` setting. Per-modality keys are `k.<label>`,
/// `alpha.<label>` and `beta.<label>`; bare `k`, `alpha` and `beta` set the
/// default and every modality already listed. Returns false for unknown keys.
inline bool set_train_option(TrainConfig& c, const std::string& key, const std::string& value) {
  using detail::parse_value;
  if (key == "learning_rate") c.learning_rate = parse_value<double>(key, value);
  else if (key == "psi_l2") c.psi_l2 = parse_value<double>(key, value);
  else if (key == "batch_size") c.batch_size = parse_value<std::size_t>(key, value);
  else if (key == "max_epochs") c.max_epochs = parse_value<std::size_t>(key, value);
  else if (key == "patience") c.patience = parse_value<std::size_t>(key, value);
  else if (key == "c_samples") c.c_samples = parse_value<std::size_t>(key, value);
  else if (key == "gamma") c.gamma = parse_value<double>(key, value);
  else if (key == "d") c.d = parse_value<std::size_t>(key, value);
  else if (key == "d_att") c.d_att = parse_value<std::size_t>(key, value);
  else if (key == "encoder_layers") c.encoder_layers = parse_value<std::size_t>(key, value);
  else if (key == "hidden_dim") c.hidden_dim = parse_value<std::size_t>(key, value);
  else if (key == "max_hops") c.max_hops = parse_value<std::size_t>(key, value);
  else if (key == "eval_repeats") c.eval_repeats = parse_value<std::size_t>(key, value);
  else if (key == "use_sgt") c.use_sgt = detail::parse_bool(key, value);
  else if (key == "seed") c.seed = parse_value<std::uint64_t>(key, value);
  else if (key == "k") {
    const auto v = parse_value<std::size_t>(key, value);
    c.default_propagation.k_hops = v;
    for (auto& [label, p] : c.propagation) p.k_hops = v;
  } else if (key == "alpha" || key == "beta") {
    const double v = parse_value<double>(key, value);
    (key == "alpha" ? c.default_propagation.alpha : c.default_propagation.beta) = v;
    for (auto& [label, p] : c.propagation) (key == "alpha" ? p.alpha : p.beta) = v;
  } else if (key.starts_with("k.") || key.starts_with("alpha.") || key.starts_with("beta.")) {
    const auto dot = key.find('.');
    const std::string field = key.substr(0, dot);
    const std::string label = key.substr(dot + 1);
    if (label.empty()) throw FormatError("missing modality label in '" + key + "'");
    auto [it, inserted] = c.propagation.try_emplace(label, c.default_propagation);
    auto& p = it->second;
    if (field == "k") p.k_hops = parse_value<std::size_t>(key, value);
    else if (field == "alpha") p.alpha = parse_value<double>(key, value);
    else p.beta = parse_value<double>(key, value);
  } else {
    return false;
  }
  return true;
}

}  // namespace miggt
