#include "heatgait/nn/tape.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <utility>

namespace heatgait::nn {

namespace {

void ensure_finite(const Tensor& t, const char* op) {
  if (!t.all_finite()) {
    throw NonFiniteError(std::string(op) + ": tensor contains NaN or Inf");
  }
}

void require(bool cond, const std::string& message) {
  if (!cond) throw ShapeMismatchError(message);
}

}  // namespace

TensorPtr Tape::constant(Tensor t) {
  ensure_finite(t, "constant");
  t.set_requires_grad(false);
  return std::make_shared<Tensor>(std::move(t));
}

TensorPtr Tape::var(Tensor t) {
  ensure_finite(t, "var");
  t.set_requires_grad(true);
  return std::make_shared<Tensor>(std::move(t));
}

TensorPtr Tape::alloc(std::vector<int> shape, bool requires_grad) {
  auto out = std::make_shared<Tensor>(std::move(shape));
  out->set_requires_grad(requires_grad);
  return out;
}

void Tape::record(std::function<void()> step) {
  steps_.push_back(std::move(step));
}

void Tape::clear() {
  steps_.clear();
  min_relu_abs_ = std::numeric_limits<double>::infinity();
}

void Tape::backward(const TensorPtr& loss) {
  if (loss->size() != 1) {
    throw ShapeMismatchError("backward: loss must be scalar, got " +
                             shape_string(loss->shape));
  }
  if (!std::isfinite(loss->values[0])) {
    throw NonFiniteError("backward: loss is not finite");
  }
  if (!loss->requires_grad) return;
  loss->grad.assign(1, 1.0);
  for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) (*it)();
}

TensorPtr Tape::matmul(const TensorPtr& a, const TensorPtr& b) {
  require(a->ndim() >= 2 && b->ndim() >= 2 && a->ndim() == b->ndim(),
          "matmul: rank mismatch " + shape_string(a->shape) + " vs " +
              shape_string(b->shape));
  const int rank = a->ndim();
  int batch = 1;
  for (int i = 0; i < rank - 2; ++i) {
    require(a->dim(i) == b->dim(i), "matmul: leading axis " +
                                        std::to_string(i) + " differs");
    batch *= a->dim(i);
  }
  const int m = a->dim(rank - 2);
  const int n = a->dim(rank - 1);
  const int p = b->dim(rank - 1);
  require(b->dim(rank - 2) == n,
          "matmul: inner axes differ, " + shape_string(a->shape) + " vs " +
              shape_string(b->shape));

  std::vector<int> out_shape(a->shape);
  out_shape[rank - 1] = p;
  TensorPtr y = alloc(out_shape, a->requires_grad || b->requires_grad);

  const double* av = a->values.data();
  const double* bv = b->values.data();
  double* yv = y->values.data();
  for (int s = 0; s < batch; ++s) {
    const double* as = av + static_cast<std::size_t>(s) * m * n;
    const double* bs = bv + static_cast<std::size_t>(s) * n * p;
    double* ys = yv + static_cast<std::size_t>(s) * m * p;
    for (int i = 0; i < m; ++i) {
      for (int k = 0; k < n; ++k) {
        const double aik = as[i * n + k];
        for (int j = 0; j < p; ++j) ys[i * p + j] += aik * bs[k * p + j];
      }
    }
  }

  if (y->requires_grad) {
    record([a, b, y, batch, m, n, p]() {
      const double* g = y->grad.data();
      for (int s = 0; s < batch; ++s) {
        const double* gs = g + static_cast<std::size_t>(s) * m * p;
        const double* as = a->values.data() + static_cast<std::size_t>(s) * m * n;
        const double* bs = b->values.data() + static_cast<std::size_t>(s) * n * p;
        if (a->requires_grad) {
          double* da = a->grad.data() + static_cast<std::size_t>(s) * m * n;
          for (int i = 0; i < m; ++i) {
            for (int j = 0; j < p; ++j) {
              const double gij = gs[i * p + j];
              for (int k = 0; k < n; ++k) da[i * n + k] += gij * bs[k * p + j];
            }
          }
        }
        if (b->requires_grad) {
          double* db = b->grad.data() + static_cast<std::size_t>(s) * n * p;
          for (int i = 0; i < m; ++i) {
            for (int k = 0; k < n; ++k) {
              const double aik = as[i * n + k];
              for (int j = 0; j < p; ++j) db[k * p + j] += aik * gs[i * p + j];
            }
          }
        }
      }
    });
  }
  return y;
}

TensorPtr Tape::vertex_mix(const TensorPtr& adj, const TensorPtr& x) {
  require(adj->ndim() == 2 && adj->dim(0) == adj->dim(1),
          "vertex_mix: adjacency must be square, got " +
              shape_string(adj->shape));
  require(x->ndim() == 4, "vertex_mix: input must be [B,C,T,V]");
  const int B = x->dim(0), C = x->dim(1), T = x->dim(2), V = x->dim(3);
  require(adj->dim(0) == V, "vertex_mix: adjacency is " +
                                shape_string(adj->shape) + " but V = " +
                                std::to_string(V));

  TensorPtr y = alloc(x->shape, adj->requires_grad || x->requires_grad);
  const double* am = adj->values.data();
  const double* xv = x->values.data();
  double* yv = y->values.data();
  const int rows = B * C * T;
  for (int r = 0; r < rows; ++r) {
    const double* xr = xv + static_cast<std::size_t>(r) * V;
    double* yr = yv + static_cast<std::size_t>(r) * V;
    for (int u = 0; u < V; ++u) {
      const double* arow = am + static_cast<std::size_t>(u) * V;
      double acc = 0.0;
      for (int v = 0; v < V; ++v) acc += arow[v] * xr[v];
      yr[u] = acc;
    }
  }

  if (y->requires_grad) {
    record([adj, x, y, rows, V]() {
      const double* g = y->grad.data();
      if (x->requires_grad) {
        const double* am = adj->values.data();
        double* dx = x->grad.data();
        for (int r = 0; r < rows; ++r) {
          const double* gr = g + static_cast<std::size_t>(r) * V;
          double* dxr = dx + static_cast<std::size_t>(r) * V;
          for (int u = 0; u < V; ++u) {
            const double gu = gr[u];
            const double* arow = am + static_cast<std::size_t>(u) * V;
            for (int v = 0; v < V; ++v) dxr[v] += arow[v] * gu;
          }
        }
      }
      if (adj->requires_grad) {
        double* da = adj->grad.data();
        const double* xv = x->values.data();
        for (int r = 0; r < rows; ++r) {
          const double* gr = g + static_cast<std::size_t>(r) * V;
          const double* xr = xv + static_cast<std::size_t>(r) * V;
          for (int u = 0; u < V; ++u) {
            const double gu = gr[u];
            double* darow = da + static_cast<std::size_t>(u) * V;
            for (int v = 0; v < V; ++v) darow[v] += gu * xr[v];
          }
        }
      }
    });
  }
  return y;
}

TensorPtr Tape::channel_mix(const TensorPtr& x, const TensorPtr& w) {
  require(x->ndim() == 4, "channel_mix: input must be [B,C,T,V]");
  require(w->ndim() == 2, "channel_mix: weight must be [C,C_out]");
  const int B = x->dim(0), C = x->dim(1), T = x->dim(2), V = x->dim(3);
  const int Co = w->dim(1);
  require(w->dim(0) == C, "channel_mix: weight rows " +
                              std::to_string(w->dim(0)) + " != channels " +
                              std::to_string(C));

  TensorPtr y = alloc({B, Co, T, V}, x->requires_grad || w->requires_grad);
  const int plane = T * V;
  const double* xv = x->values.data();
  const double* wv = w->values.data();
  double* yv = y->values.data();
  for (int b = 0; b < B; ++b) {
    for (int c = 0; c < C; ++c) {
      const double* xp = xv + (static_cast<std::size_t>(b) * C + c) * plane;
      for (int o = 0; o < Co; ++o) {
        const double wco = wv[c * Co + o];
        if (wco == 0.0) continue;
        double* yp = yv + (static_cast<std::size_t>(b) * Co + o) * plane;
        for (int i = 0; i < plane; ++i) yp[i] += wco * xp[i];
      }
    }
  }

  if (y->requires_grad) {
    record([x, w, y, B, C, Co, plane]() {
      const double* g = y->grad.data();
      if (x->requires_grad) {
        const double* wv = w->values.data();
        double* dx = x->grad.data();
        for (int b = 0; b < B; ++b) {
          for (int c = 0; c < C; ++c) {
            double* dxp = dx + (static_cast<std::size_t>(b) * C + c) * plane;
            for (int o = 0; o < Co; ++o) {
              const double wco = wv[c * Co + o];
              if (wco == 0.0) continue;
              const double* gp =
                  g + (static_cast<std::size_t>(b) * Co + o) * plane;
              for (int i = 0; i < plane; ++i) dxp[i] += wco * gp[i];
            }
          }
        }
      }
      if (w->requires_grad) {
        const double* xv = x->values.data();
        double* dw = w->grad.data();
        for (int b = 0; b < B; ++b) {
          for (int c = 0; c < C; ++c) {
            const double* xp = xv + (static_cast<std::size_t>(b) * C + c) * plane;
            for (int o = 0; o < Co; ++o) {
              const double* gp =
                  g + (static_cast<std::size_t>(b) * Co + o) * plane;
              double acc = 0.0;
              for (int i = 0; i < plane; ++i) acc += xp[i] * gp[i];
              dw[c * Co + o] += acc;
            }
          }
        }
      }
    });
  }
  return y;
}

TensorPtr Tape::temporal_conv(const TensorPtr& x, const TensorPtr& w,
                              int stride) {
  require(x->ndim() == 4, "temporal_conv: input must be [B,C,T,V]");
  require(w->ndim() == 4 && w->dim(3) == 1,
          "temporal_conv: weight must be [C_out,C_in,t,1], got " +
              shape_string(w->shape));
  require(stride >= 1, "temporal_conv: stride must be >= 1");
  const int B = x->dim(0), C = x->dim(1), T = x->dim(2), V = x->dim(3);
  const int Co = w->dim(0), kt = w->dim(2);
  require(w->dim(1) == C, "temporal_conv: weight expects " +
                              std::to_string(w->dim(1)) + " channels, input has " +
                              std::to_string(C));
  require(kt % 2 == 1, "temporal_conv: kernel size must be odd");
  const int pad = (kt - 1) / 2;
  const int Tp = (T - 1) / stride + 1;  // == ceil(T / stride)

  TensorPtr y = alloc({B, Co, Tp, V}, x->requires_grad || w->requires_grad);
  const double* xv = x->values.data();
  const double* wv = w->values.data();
  double* yv = y->values.data();

  auto tap_bounds = [&](int tau, int& lo, int& hi) {
    // valid output steps tp with 0 <= tp*stride + tau - pad < T
    lo = 0;
    const int shift = pad - tau;
    if (shift > 0) lo = (shift + stride - 1) / stride;
    hi = std::min(Tp - 1, (T - 1 + pad - tau) / stride);
  };

  for (int b = 0; b < B; ++b) {
    for (int c = 0; c < C; ++c) {
      const double* xp =
          xv + (static_cast<std::size_t>(b) * C + c) * T * V;
      for (int o = 0; o < Co; ++o) {
        double* yp = yv + (static_cast<std::size_t>(b) * Co + o) * Tp * V;
        for (int tau = 0; tau < kt; ++tau) {
          const double wval = wv[(static_cast<std::size_t>(o) * C + c) * kt + tau];
          if (wval == 0.0) continue;
          int lo, hi;
          tap_bounds(tau, lo, hi);
          for (int tp = lo; tp <= hi; ++tp) {
            const int ti = tp * stride + tau - pad;
            const double* xrow = xp + static_cast<std::size_t>(ti) * V;
            double* yrow = yp + static_cast<std::size_t>(tp) * V;
            for (int v = 0; v < V; ++v) yrow[v] += wval * xrow[v];
          }
        }
      }
    }
  }

  if (y->requires_grad) {
    record([x, w, y, B, C, Co, T, Tp, V, kt, pad, stride, tap_bounds]() {
      const double* g = y->grad.data();
      const double* xv = x->values.data();
      const double* wv = w->values.data();
      double* dx = x->requires_grad ? x->grad.data() : nullptr;
      double* dw = w->requires_grad ? w->grad.data() : nullptr;
      for (int b = 0; b < B; ++b) {
        for (int c = 0; c < C; ++c) {
          const std::size_t xoff = (static_cast<std::size_t>(b) * C + c) * T * V;
          for (int o = 0; o < Co; ++o) {
            const double* gp =
                g + (static_cast<std::size_t>(b) * Co + o) * Tp * V;
            for (int tau = 0; tau < kt; ++tau) {
              const std::size_t widx =
                  (static_cast<std::size_t>(o) * C + c) * kt + tau;
              int lo, hi;
              tap_bounds(tau, lo, hi);
              if (dx != nullptr) {
                const double wval = wv[widx];
                if (wval != 0.0) {
                  for (int tp = lo; tp <= hi; ++tp) {
                    const int ti = tp * stride + tau - pad;
                    const double* grow = gp + static_cast<std::size_t>(tp) * V;
                    double* dxrow =
                        dx + xoff + static_cast<std::size_t>(ti) * V;
                    for (int v = 0; v < V; ++v) dxrow[v] += wval * grow[v];
                  }
                }
              }
              if (dw != nullptr) {
                double acc = 0.0;
                for (int tp = lo; tp <= hi; ++tp) {
                  const int ti = tp * stride + tau - pad;
                  const double* grow = gp + static_cast<std::size_t>(tp) * V;
                  const double* xrow =
                      xv + xoff + static_cast<std::size_t>(ti) * V;
                  for (int v = 0; v < V; ++v) acc += grow[v] * xrow[v];
                }
                dw[widx] += acc;
              }
            }
          }
        }
      }
    });
  }
  return y;
}

TensorPtr Tape::batch_norm(const TensorPtr& x, const TensorPtr& gamma,
                           const TensorPtr& beta, Tensor& running_mean,
                           Tensor& running_var, bool training, double momentum,
                           double eps) {
  require(x->ndim() == 4, "batch_norm: input must be [B,C,T,V]");
  const int B = x->dim(0), C = x->dim(1), T = x->dim(2), V = x->dim(3);
  require(gamma->ndim() == 1 && gamma->dim(0) == C, "batch_norm: gamma must be [C]");
  require(beta->ndim() == 1 && beta->dim(0) == C, "batch_norm: beta must be [C]");
  require(running_mean.ndim() == 1 && running_mean.dim(0) == C &&
              running_var.ndim() == 1 && running_var.dim(0) == C,
          "batch_norm: running stats must be [C]");

  const int plane = T * V;
  const std::size_t per_channel = static_cast<std::size_t>(B) * plane;

  auto mean_vec = std::make_shared<std::vector<double>>(C, 0.0);
  auto invstd_vec = std::make_shared<std::vector<double>>(C, 0.0);

  const double* xv = x->values.data();
  if (training) {
    for (int c = 0; c < C; ++c) {
      double sum = 0.0;
      for (int b = 0; b < B; ++b) {
        const double* xp = xv + (static_cast<std::size_t>(b) * C + c) * plane;
        for (int i = 0; i < plane; ++i) sum += xp[i];
      }
      const double mu = sum / static_cast<double>(per_channel);
      double sq = 0.0;
      for (int b = 0; b < B; ++b) {
        const double* xp = xv + (static_cast<std::size_t>(b) * C + c) * plane;
        for (int i = 0; i < plane; ++i) {
          const double d = xp[i] - mu;
          sq += d * d;
        }
      }
      const double var = sq / static_cast<double>(per_channel);
      (*mean_vec)[c] = mu;
      (*invstd_vec)[c] = 1.0 / std::sqrt(var + eps);
      running_mean.values[c] = (1.0 - momentum) * running_mean.values[c] +
                               momentum * mu;
      running_var.values[c] = (1.0 - momentum) * running_var.values[c] +
                              momentum * var;
    }
  } else {
    for (int c = 0; c < C; ++c) {
      (*mean_vec)[c] = running_mean.values[c];
      (*invstd_vec)[c] = 1.0 / std::sqrt(running_var.values[c] + eps);
    }
  }

  TensorPtr y = alloc(x->shape, x->requires_grad || gamma->requires_grad ||
                                    beta->requires_grad);
  double* yv = y->values.data();
  for (int b = 0; b < B; ++b) {
    for (int c = 0; c < C; ++c) {
      const std::size_t off = (static_cast<std::size_t>(b) * C + c) * plane;
      const double mu = (*mean_vec)[c];
      const double is = (*invstd_vec)[c];
      const double gc = gamma->values[c];
      const double bc = beta->values[c];
      for (int i = 0; i < plane; ++i) {
        yv[off + i] = gc * ((xv[off + i] - mu) * is) + bc;
      }
    }
  }

  if (y->requires_grad) {
    record([x, gamma, beta, y, mean_vec, invstd_vec, B, C, plane, per_channel,
            training]() {
      const double* g = y->grad.data();
      const double* xv = x->values.data();
      for (int c = 0; c < C; ++c) {
        const double mu = (*mean_vec)[c];
        const double is = (*invstd_vec)[c];
        double sum_g = 0.0;
        double sum_gx = 0.0;
        for (int b = 0; b < B; ++b) {
          const std::size_t off = (static_cast<std::size_t>(b) * C + c) * plane;
          for (int i = 0; i < plane; ++i) {
            const double gi = g[off + i];
            sum_g += gi;
            sum_gx += gi * (xv[off + i] - mu) * is;
          }
        }
        if (beta->requires_grad) beta->grad[c] += sum_g;
        if (gamma->requires_grad) gamma->grad[c] += sum_gx;
        if (x->requires_grad) {
          const double gc = gamma->values[c];
          const double n = static_cast<double>(per_channel);
          for (int b = 0; b < B; ++b) {
            const std::size_t off =
                (static_cast<std::size_t>(b) * C + c) * plane;
            for (int i = 0; i < plane; ++i) {
              const double xhat = (xv[off + i] - mu) * is;
              if (training) {
                x->grad[off + i] +=
                    gc * is * (g[off + i] - sum_g / n - xhat * sum_gx / n);
              } else {
                x->grad[off + i] += gc * is * g[off + i];
              }
            }
          }
        }
      }
    });
  }
  return y;
}

TensorPtr Tape::relu(const TensorPtr& x) {
  TensorPtr y = alloc(x->shape, x->requires_grad);
  for (std::size_t i = 0; i < x->size(); ++i) {
    const double v = x->values[i];
    min_relu_abs_ = std::min(min_relu_abs_, std::abs(v));
    y->values[i] = v > 0.0 ? v : 0.0;
  }
  if (y->requires_grad) {
    record([x, y]() {
      for (std::size_t i = 0; i < x->size(); ++i) {
        if (x->values[i] > 0.0) x->grad[i] += y->grad[i];
      }
    });
  }
  return y;
}

TensorPtr Tape::global_avg_pool(const TensorPtr& x) {
  require(x->ndim() == 4, "global_avg_pool: input must be [B,C,T,V]");
  const int B = x->dim(0), C = x->dim(1), T = x->dim(2), V = x->dim(3);
  const int plane = T * V;
  TensorPtr y = alloc({B, C}, x->requires_grad);
  const double* xv = x->values.data();
  for (int b = 0; b < B; ++b) {
    for (int c = 0; c < C; ++c) {
      const double* xp = xv + (static_cast<std::size_t>(b) * C + c) * plane;
      double sum = 0.0;
      for (int i = 0; i < plane; ++i) sum += xp[i];
      y->values[static_cast<std::size_t>(b) * C + c] = sum / plane;
    }
  }
  if (y->requires_grad) {
    record([x, y, B, C, plane]() {
      double* dx = x->grad.data();
      for (int b = 0; b < B; ++b) {
        for (int c = 0; c < C; ++c) {
          const double gi =
              y->grad[static_cast<std::size_t>(b) * C + c] / plane;
          double* dxp = dx + (static_cast<std::size_t>(b) * C + c) * plane;
          for (int i = 0; i < plane; ++i) dxp[i] += gi;
        }
      }
    });
  }
  return y;
}

TensorPtr Tape::linear(const TensorPtr& x, const TensorPtr& w,
                       const TensorPtr& bias) {
  require(x->ndim() == 2 && w->ndim() == 2, "linear: x must be [B,C], w [C,D]");
  const int B = x->dim(0), C = x->dim(1), D = w->dim(1);
  require(w->dim(0) == C, "linear: weight expects " + std::to_string(w->dim(0)) +
                              " inputs, x has " + std::to_string(C));
  require(bias->ndim() == 1 && bias->dim(0) == D, "linear: bias must be [D]");

  TensorPtr y =
      alloc({B, D}, x->requires_grad || w->requires_grad || bias->requires_grad);
  for (int b = 0; b < B; ++b) {
    for (int d = 0; d < D; ++d) y->values[b * D + d] = bias->values[d];
    for (int c = 0; c < C; ++c) {
      const double xv = x->values[b * C + c];
      for (int d = 0; d < D; ++d) {
        y->values[b * D + d] += xv * w->values[c * D + d];
      }
    }
  }
  if (y->requires_grad) {
    record([x, w, bias, y, B, C, D]() {
      const double* g = y->grad.data();
      for (int b = 0; b < B; ++b) {
        for (int d = 0; d < D; ++d) {
          const double gbd = g[b * D + d];
          if (bias->requires_grad) bias->grad[d] += gbd;
        }
        for (int c = 0; c < C; ++c) {
          double acc = 0.0;
          for (int d = 0; d < D; ++d) {
            const double gbd = g[b * D + d];
            if (w->requires_grad) w->grad[c * D + d] += x->values[b * C + c] * gbd;
            acc += w->values[c * D + d] * gbd;
          }
          if (x->requires_grad) x->grad[b * C + c] += acc;
        }
      }
    });
  }
  return y;
}

TensorPtr Tape::l2_normalize(const TensorPtr& x, double eps) {
  require(x->ndim() == 2, "l2_normalize: input must be [B,D]");
  const int B = x->dim(0), D = x->dim(1);
  auto norms = std::make_shared<std::vector<double>>(B, 0.0);
  TensorPtr y = alloc(x->shape, x->requires_grad);
  for (int b = 0; b < B; ++b) {
    double sq = 0.0;
    for (int d = 0; d < D; ++d) {
      const double v = x->values[b * D + d];
      sq += v * v;
    }
    const double norm = std::max(std::sqrt(sq), eps);
    (*norms)[b] = norm;
    for (int d = 0; d < D; ++d) y->values[b * D + d] = x->values[b * D + d] / norm;
  }
  if (y->requires_grad) {
    record([x, y, norms, B, D, eps]() {
      for (int b = 0; b < B; ++b) {
        const double norm = (*norms)[b];
        if (norm <= eps) {
          // clamped: output is x / eps, a constant scale
          for (int d = 0; d < D; ++d) x->grad[b * D + d] += y->grad[b * D + d] / norm;
          continue;
        }
        double dot = 0.0;
        for (int d = 0; d < D; ++d) dot += y->grad[b * D + d] * y->values[b * D + d];
        for (int d = 0; d < D; ++d) {
          x->grad[b * D + d] +=
              (y->grad[b * D + d] - y->values[b * D + d] * dot) / norm;
        }
      }
    });
  }
  return y;
}

TensorPtr Tape::add(const TensorPtr& a, const TensorPtr& b) {
  require(a->shape == b->shape, "add: shapes differ, " +
                                    shape_string(a->shape) + " vs " +
                                    shape_string(b->shape));
  TensorPtr y = alloc(a->shape, a->requires_grad || b->requires_grad);
  for (std::size_t i = 0; i < a->size(); ++i) {
    y->values[i] = a->values[i] + b->values[i];
  }
  if (y->requires_grad) {
    record([a, b, y]() {
      for (std::size_t i = 0; i < y->size(); ++i) {
        if (a->requires_grad) a->grad[i] += y->grad[i];
        if (b->requires_grad) b->grad[i] += y->grad[i];
      }
    });
  }
  return y;
}

TensorPtr Tape::scale(const TensorPtr& a, double s) {
  TensorPtr y = alloc(a->shape, a->requires_grad);
  for (std::size_t i = 0; i < a->size(); ++i) y->values[i] = s * a->values[i];
  if (y->requires_grad) {
    record([a, y, s]() {
      for (std::size_t i = 0; i < y->size(); ++i) a->grad[i] += s * y->grad[i];
    });
  }
  return y;
}

}  // namespace heatgait::nn
