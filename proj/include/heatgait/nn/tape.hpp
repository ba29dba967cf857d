#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "heatgait/nn/tensor.hpp"

namespace heatgait::nn {

// Records forward operations and replays analytic gradients in reverse.
// Every op computes its output eagerly and, when any input requires a
// gradient, pushes a closure that pulls the output gradient back into the
// inputs. One tape per forward/backward pass; tapes are single-threaded.
//
// Batch layout for 4-d activations is (batch B, channels C, time T,
// vertices V) throughout.
class Tape {
 public:
  // Leaf wrappers. Both validate finiteness of the incoming values.
  TensorPtr constant(Tensor t);
  TensorPtr var(Tensor t);

  // Fresh output tensor; used by ops here and by fused ops elsewhere.
  TensorPtr alloc(std::vector<int> shape, bool requires_grad);

  // Custom backward step for fused operations (losses live in train/).
  void record(std::function<void()> step);

  // y[.., m, p] = a[.., m, n] . b[.., n, p]; leading dims must match.
  TensorPtr matmul(const TensorPtr& a, const TensorPtr& b);

  // y[b,c,t,u] = sum_v adj[u,v] * x[b,c,t,v]
  TensorPtr vertex_mix(const TensorPtr& adj, const TensorPtr& x);

  // y[b,o,t,v] = sum_c w[c,o] * x[b,c,t,v]
  TensorPtr channel_mix(const TensorPtr& x, const TensorPtr& w);

  // w is [C_out, C_in, t, 1] with odd t; symmetric zero padding (t-1)/2,
  // so T' = ceil(T / stride).
  TensorPtr temporal_conv(const TensorPtr& x, const TensorPtr& w, int stride);

  // Per-channel normalization over (B, T, V). Training mode uses batch
  // statistics and folds them into the running buffers; eval mode reads
  // the running buffers only.
  TensorPtr batch_norm(const TensorPtr& x, const TensorPtr& gamma,
                       const TensorPtr& beta, Tensor& running_mean,
                       Tensor& running_var, bool training,
                       double momentum = 0.1, double eps = 1e-5);

  TensorPtr relu(const TensorPtr& x);

  // [B, C, T, V] -> [B, C], exact mean over T*V entries.
  TensorPtr global_avg_pool(const TensorPtr& x);

  // y[B, D] = x[B, C] . w[C, D] + bias[D]
  TensorPtr linear(const TensorPtr& x, const TensorPtr& w,
                   const TensorPtr& bias);

  // Rows scaled to unit L2 norm (norms clamped below at eps).
  TensorPtr l2_normalize(const TensorPtr& x, double eps = 1e-12);

  TensorPtr add(const TensorPtr& a, const TensorPtr& b);
  TensorPtr scale(const TensorPtr& a, double s);

  // Seeds grad of the scalar loss with 1 and replays all steps in reverse.
  void backward(const TensorPtr& loss);

  // Smallest |input| seen by any relu on this tape; finite-difference
  // harnesses use it to reject seeds that sit on the kink.
  double min_relu_input_abs() const { return min_relu_abs_; }

  std::size_t num_steps() const { return steps_.size(); }
  void clear();

 private:
  std::vector<std::function<void()>> steps_;
  double min_relu_abs_ = std::numeric_limits<double>::infinity();
};

}  // namespace heatgait::nn
