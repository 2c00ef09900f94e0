#pragma once

// Forward and backward kernels for the small set of ops the networks need.
// conv2d is cross-correlation (no kernel flip) with zero padding.

#include <algorithm>
#include <span>
#include <vector>

#include "vesselseg/gemm.hpp"
#include "vesselseg/tensor.hpp"

namespace vesselseg {

inline int conv_out_extent(int in, int kernel, int stride, int padding) {
  return (in + 2 * padding - kernel) / stride + 1;
}

namespace detail {

// Expand one image into a [Cin*k*k, Hout*Wout] patch matrix.
template <typename T>
void im2col(const Tensor<T>& input, int image, int kernel, int stride, int padding,
            int hout, int wout, T* cols) {
  const int cin = input.c, hin = input.h, win = input.w;
  const int npatch = hout * wout;
  size_t row = 0;
  for (int ci = 0; ci < cin; ++ci) {
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx, ++row) {
        T* dst = cols + row * npatch;
        for (int oy = 0; oy < hout; ++oy) {
          const int iy = oy * stride - padding + ky;
          if (iy < 0 || iy >= hin) {
            for (int ox = 0; ox < wout; ++ox) dst[oy * wout + ox] = T(0);
            continue;
          }
          for (int ox = 0; ox < wout; ++ox) {
            const int ix = ox * stride - padding + kx;
            dst[oy * wout + ox] =
                (ix < 0 || ix >= win) ? T(0) : input.at(image, ci, iy, ix);
          }
        }
      }
    }
  }
}

// Scatter-add a patch matrix back onto one image of grad_input.
template <typename T>
void col2im_add(const T* cols, int image, int kernel, int stride, int padding,
                int hout, int wout, Tensor<T>& grad_input) {
  const int cin = grad_input.c, hin = grad_input.h, win = grad_input.w;
  const int npatch = hout * wout;
  size_t row = 0;
  for (int ci = 0; ci < cin; ++ci) {
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx, ++row) {
        const T* src = cols + row * npatch;
        for (int oy = 0; oy < hout; ++oy) {
          const int iy = oy * stride - padding + ky;
          if (iy < 0 || iy >= hin) continue;
          for (int ox = 0; ox < wout; ++ox) {
            const int ix = ox * stride - padding + kx;
            if (ix < 0 || ix >= win) continue;
            grad_input.at(image, ci, iy, ix) += src[oy * wout + ox];
          }
        }
      }
    }
  }
}

template <typename T>
void check_conv_args(const Tensor<T>& input, const Tensor<T>& weights,
                     std::span<const T> bias, int stride, int padding) {
  require(!input.empty(), "conv2d: zero-extent input " + input.shape_str());
  require(!weights.empty(), "conv2d: zero-extent weights " + weights.shape_str());
  require(stride >= 1, "conv2d: stride must be positive");
  require(padding >= 0, "conv2d: padding must be non-negative");
  require(weights.h == weights.w, "conv2d: kernel must be square, got " + weights.shape_str());
  require(weights.c == input.c,
          "conv2d: weight channels " + weights.shape_str() + " do not match input " +
              input.shape_str());
  require(bias.empty() || static_cast<int>(bias.size()) == weights.n,
          "conv2d: bias length does not match filter count");
  const int k = weights.h;
  require(k <= input.h + 2 * padding && k <= input.w + 2 * padding,
          "conv2d: kernel larger than padded input");
}

}  // namespace detail

template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& weights,
                 std::span<const T> bias, int stride, int padding) {
  detail::check_conv_args(input, weights, bias, stride, padding);
  const int k = weights.h, f = weights.n;
  const int hout = conv_out_extent(input.h, k, stride, padding);
  const int wout = conv_out_extent(input.w, k, stride, padding);
  const int npatch = hout * wout;
  const int krows = input.c * k * k;

  Tensor<T> out(input.n, f, hout, wout);
  std::vector<T> cols(static_cast<size_t>(krows) * npatch);
  for (int in = 0; in < input.n; ++in) {
    detail::im2col(input, in, k, stride, padding, hout, wout, cols.data());
    T* dst = &out.at(in, 0, 0, 0);
    detail::gemm_nn(f, npatch, krows, weights.data.data(), cols.data(), dst, false);
    if (!bias.empty()) {
      for (int fi = 0; fi < f; ++fi) {
        T* row = dst + static_cast<size_t>(fi) * npatch;
        for (int p = 0; p < npatch; ++p) row[p] += bias[fi];
      }
    }
  }
  return out;
}

// Gradients of conv2d. Null output pointers skip that gradient.
template <typename T>
void conv2d_backward(const Tensor<T>& input, const Tensor<T>& weights, int stride,
                     int padding, const Tensor<T>& grad_out, Tensor<T>* grad_input,
                     Tensor<T>* grad_weights, std::vector<T>* grad_bias) {
  const int k = weights.h, f = weights.n;
  const int hout = grad_out.h, wout = grad_out.w;
  const int npatch = hout * wout;
  const int krows = input.c * k * k;

  if (grad_input) *grad_input = Tensor<T>(input.n, input.c, input.h, input.w);
  if (grad_weights) *grad_weights = Tensor<T>(weights.n, weights.c, weights.h, weights.w);
  if (grad_bias) grad_bias->assign(f, T(0));

  std::vector<T> cols(static_cast<size_t>(krows) * npatch);
  std::vector<T> grad_cols(static_cast<size_t>(krows) * npatch);
  for (int in = 0; in < input.n; ++in) {
    const T* dy = &grad_out.at(in, 0, 0, 0);
    if (grad_weights) {
      detail::im2col(input, in, k, stride, padding, hout, wout, cols.data());
      detail::gemm_nt(f, krows, npatch, dy, cols.data(), grad_weights->data.data(), true);
    }
    if (grad_input) {
      detail::gemm_tn(krows, npatch, f, weights.data.data(), dy, grad_cols.data(), false);
      detail::col2im_add(grad_cols.data(), in, k, stride, padding, hout, wout, *grad_input);
    }
    if (grad_bias) {
      for (int fi = 0; fi < f; ++fi) {
        const T* row = dy + static_cast<size_t>(fi) * npatch;
        T acc = T(0);
        for (int p = 0; p < npatch; ++p) acc += row[p];
        (*grad_bias)[fi] += acc;
      }
    }
  }
}

// weights are [Cin, Cout, k, k]; output extent is (H-1)*stride + k.
template <typename T>
Tensor<T> transposed_conv2d(const Tensor<T>& input, const Tensor<T>& weights, int stride) {
  require(!input.empty(), "transposed_conv2d: zero-extent input " + input.shape_str());
  require(stride >= 1, "transposed_conv2d: stride must be positive");
  require(weights.h == weights.w, "transposed_conv2d: kernel must be square");
  require(weights.n == input.c,
          "transposed_conv2d: weight input channels " + weights.shape_str() +
              " do not match input " + input.shape_str());
  const int k = weights.h, cout = weights.c;
  const int hout = (input.h - 1) * stride + k;
  const int wout = (input.w - 1) * stride + k;
  Tensor<T> out(input.n, cout, hout, wout);
  for (int in = 0; in < input.n; ++in) {
    for (int ci = 0; ci < input.c; ++ci) {
      for (int co = 0; co < cout; ++co) {
        for (int y = 0; y < input.h; ++y) {
          for (int x = 0; x < input.w; ++x) {
            const T v = input.at(in, ci, y, x);
            for (int ky = 0; ky < k; ++ky) {
              for (int kx = 0; kx < k; ++kx) {
                out.at(in, co, y * stride + ky, x * stride + kx) +=
                    v * weights.at(ci, co, ky, kx);
              }
            }
          }
        }
      }
    }
  }
  return out;
}

template <typename T>
void transposed_conv2d_backward(const Tensor<T>& input, const Tensor<T>& weights,
                                int stride, const Tensor<T>& grad_out,
                                Tensor<T>* grad_input, Tensor<T>* grad_weights) {
  const int k = weights.h, cout = weights.c;
  if (grad_input) *grad_input = Tensor<T>(input.n, input.c, input.h, input.w);
  if (grad_weights) *grad_weights = Tensor<T>(weights.n, weights.c, weights.h, weights.w);
  for (int in = 0; in < input.n; ++in) {
    for (int ci = 0; ci < input.c; ++ci) {
      for (int co = 0; co < cout; ++co) {
        for (int y = 0; y < input.h; ++y) {
          for (int x = 0; x < input.w; ++x) {
            T acc = T(0);
            for (int ky = 0; ky < k; ++ky) {
              for (int kx = 0; kx < k; ++kx) {
                const T g = grad_out.at(in, co, y * stride + ky, x * stride + kx);
                acc += g * weights.at(ci, co, ky, kx);
                if (grad_weights) {
                  grad_weights->at(ci, co, ky, kx) += g * input.at(in, ci, y, x);
                }
              }
            }
            if (grad_input) grad_input->at(in, ci, y, x) += acc;
          }
        }
      }
    }
  }
}

template <typename T>
Tensor<T> relu(const Tensor<T>& input) {
  Tensor<T> out = input;
  for (T& v : out.data) v = v > T(0) ? v : T(0);
  return out;
}

// subgradient at exactly 0 is 0
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& input, const Tensor<T>& grad_out) {
  Tensor<T> out(input.n, input.c, input.h, input.w);
  for (size_t i = 0; i < input.data.size(); ++i) {
    out.data[i] = input.data[i] > T(0) ? grad_out.data[i] : T(0);
  }
  return out;
}

template <typename T>
Tensor<T> elementwise_mul(const Tensor<T>& a, const Tensor<T>& b) {
  require(a.same_shape(b), "elementwise_mul: shape mismatch " + a.shape_str() + " vs " +
                               b.shape_str());
  Tensor<T> out = a;
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] *= b.data[i];
  return out;
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  require(a.same_shape(b),
          "add: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
  Tensor<T> out = a;
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
  return out;
}

template <typename T>
struct CrossEntropyResult {
  double loss = 0.0;
  Tensor<T> grad_logits;  // already includes the 1/(N*H*W) factor
};

// Mean over all pixels of -log softmax(logits)[label]. Optional per-class
// weights turn the mean into a weighted mean.
template <typename T>
CrossEntropyResult<T> softmax_cross_entropy(const Tensor<T>& logits, const LabelMap& labels,
                                            std::span<const double> class_weights = {}) {
  require(logits.n == labels.n && logits.h == labels.h && logits.w == labels.w,
          "softmax_cross_entropy: logits " + logits.shape_str() + " do not match labels");
  require(!class_weights.empty() ? static_cast<int>(class_weights.size()) == logits.c : true,
          "softmax_cross_entropy: class weight count does not match classes");
  const int cls = logits.c;
  CrossEntropyResult<T> res;
  res.grad_logits = Tensor<T>(logits.n, logits.c, logits.h, logits.w);

  std::vector<double> probs(cls);
  double loss_sum = 0.0, weight_sum = 0.0;
  for (int in = 0; in < logits.n; ++in) {
    for (int y = 0; y < logits.h; ++y) {
      for (int x = 0; x < logits.w; ++x) {
        const int label = labels.at(in, y, x);
        require(label < cls, "softmax_cross_entropy: label " + std::to_string(label) +
                                 " out of range for " + std::to_string(cls) + " classes");
        double maxv = -1e300;
        for (int ci = 0; ci < cls; ++ci) {
          maxv = std::max(maxv, static_cast<double>(logits.at(in, ci, y, x)));
        }
        double denom = 0.0;
        for (int ci = 0; ci < cls; ++ci) {
          probs[ci] = std::exp(static_cast<double>(logits.at(in, ci, y, x)) - maxv);
          denom += probs[ci];
        }
        const double wpx = class_weights.empty() ? 1.0 : class_weights[label];
        loss_sum += wpx * (std::log(denom) - (static_cast<double>(logits.at(in, label, y, x)) - maxv));
        weight_sum += wpx;
        for (int ci = 0; ci < cls; ++ci) {
          double g = probs[ci] / denom - (ci == label ? 1.0 : 0.0);
          res.grad_logits.at(in, ci, y, x) = static_cast<T>(wpx * g);
        }
      }
    }
  }
  require(weight_sum > 0.0, "softmax_cross_entropy: empty label map");
  res.loss = loss_sum / weight_sum;
  const T scale = static_cast<T>(1.0 / weight_sum);
  for (T& v : res.grad_logits.data) v *= scale;
  return res;
}

}  // namespace vesselseg
