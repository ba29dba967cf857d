#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "heatgait/nn/tensor.hpp"
#include "heatgait/rng.hpp"

namespace heatgait::nn {

// Named map of learnable tensors. Ordered so every iteration (updates,
// serialization, gradient checks) is deterministic.
class ParamStore {
 public:
  TensorPtr add(const std::string& name, Tensor t) {
    if (params_.count(name)) {
      throw Error("ParamStore: duplicate parameter \"" + name + "\"");
    }
    t.set_requires_grad(true);
    auto ptr = std::make_shared<Tensor>(std::move(t));
    params_[name] = ptr;
    return ptr;
  }

  TensorPtr at(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) {
      throw Error("ParamStore: unknown parameter \"" + name + "\"");
    }
    return it->second;
  }

  bool contains(const std::string& name) const { return params_.count(name) > 0; }

  void zero_grad() {
    for (auto& [name, p] : params_) p->zero_grad();
  }

  std::size_t total_count() const {
    std::size_t n = 0;
    for (const auto& [name, p] : params_) n += p->size();
    return n;
  }

  const std::map<std::string, TensorPtr>& map() const { return params_; }
  std::map<std::string, TensorPtr>& map() { return params_; }

 private:
  std::map<std::string, TensorPtr> params_;
};

// Adam with bias correction; per-parameter moment buffers are keyed by the
// parameter name and created on first use.
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double learning_rate = 1e-3;
  std::int64_t step = 0;
  std::map<std::string, std::vector<double>> first_moment;
  std::map<std::string, std::vector<double>> second_moment;
};

// One update over every parameter in the store, consuming .grad.
void adam_step(ParamStore& params, AdamState& state);

// Weight initializers.
void fill_normal(Tensor& t, Rng& rng, double sigma);
Tensor he_init(std::vector<int> shape, int fan_in, Rng& rng);

}  // namespace heatgait::nn
