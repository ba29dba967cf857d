#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "heatgait/errors.hpp"

namespace heatgait::nn {

// Dense row-major N-d array of doubles with an optional same-shape
// gradient buffer. All network math runs on these.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> values;
  std::vector<double> grad;  // empty unless requires_grad
  bool requires_grad = false;

  Tensor() = default;

  explicit Tensor(std::vector<int> shape_in, double fill = 0.0)
      : shape(std::move(shape_in)), values(numel(shape), fill) {}

  static Tensor from_values(std::vector<int> shape_in,
                            std::vector<double> values_in) {
    Tensor t;
    t.shape = std::move(shape_in);
    t.values = std::move(values_in);
    if (numel(t.shape) != t.values.size()) {
      throw ShapeMismatchError("Tensor: value count does not match shape");
    }
    return t;
  }

  static std::size_t numel(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) {
      if (d <= 0) throw ShapeMismatchError("Tensor: non-positive dimension");
      n *= static_cast<std::size_t>(d);
    }
    return n;
  }

  std::size_t size() const { return values.size(); }
  int ndim() const { return static_cast<int>(shape.size()); }
  int dim(int axis) const { return shape[static_cast<std::size_t>(axis)]; }

  void set_requires_grad(bool on) {
    requires_grad = on;
    if (on) {
      grad.assign(values.size(), 0.0);
    } else {
      grad.clear();
    }
  }

  void zero_grad() {
    if (requires_grad) grad.assign(values.size(), 0.0);
  }

  bool all_finite() const {
    for (double v : values) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }
};

using TensorPtr = std::shared_ptr<Tensor>;

inline std::string shape_string(const std::vector<int>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

}  // namespace heatgait::nn
