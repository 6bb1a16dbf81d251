#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "miggt/error.hpp"
#include "miggt/matrix.hpp"

namespace miggt {

/// A trainable tensor with its gradient and Adam moment buffers.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  Matrix first_moment;
  Matrix second_moment;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class ParameterStore {
 public:
  Parameter& add(std::string name, Matrix value) {
    if (contains(name)) throw Error("duplicate parameter '" + name + "'");
    Parameter p;
    p.grad = Matrix(value.rows(), value.cols());
    p.first_moment = Matrix(value.rows(), value.cols());
    p.second_moment = Matrix(value.rows(), value.cols());
    p.value = std::move(value);
    p.name = std::move(name);
    params_.push_back(std::move(p));
    return params_.back();
  }

  bool contains(const std::string& name) const {
    for (const auto& p : params_)
      if (p.name == name) return true;
    return false;
  }

  Parameter& get(const std::string& name) {
    for (auto& p : params_)
      if (p.name == name) return p;
    throw Error("unknown parameter '" + name + "'");
  }
  const Parameter& get(const std::string& name) const {
    return const_cast<ParameterStore*>(this)->get(name);
  }

  std::vector<Parameter>& all() { return params_; }
  const std::vector<Parameter>& all() const { return params_; }

  std::size_t step() const { return step_; }

  void zero_grad() {
    for (auto& p : params_) p.grad.set_zero();
  }

  /// One bias-corrected Adam update. Gradients are cleared afterwards. A
  /// non-finite gradient aborts before any parameter is touched.
  void adam_step(double learning_rate, const AdamConfig& cfg = {}) {
    for (const auto& p : params_) {
      for (std::size_t i = 0; i < p.grad.size(); ++i) {
        if (!std::isfinite(p.grad.data()[i])) {
          throw NumericError("non-finite gradient in '" + p.name + "' at flat index " +
                             std::to_string(i) + " (step " + std::to_string(step_ + 1) + ")");
        }
      }
    }
    ++step_;
    const double t = static_cast<double>(step_);
    const double c1 = 1.0 - std::pow(cfg.beta1, t);
    const double c2 = 1.0 - std::pow(cfg.beta2, t);
    for (auto& p : params_) {
      auto& w = p.value.data();
      auto& g = p.grad.data();
      auto& m = p.first_moment.data();
      auto& v = p.second_moment.data();
      for (std::size_t i = 0; i < w.size(); ++i) {
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
        w[i] -= learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg.epsilon);
        g[i] = 0.0;
      }
    }
  }

 private:
  std::vector<Parameter> params_;
  std::size_t step_ = 0;
};

}  // namespace miggt
