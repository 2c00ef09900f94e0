#pragma once

// Reverse-mode tape. Ops append nodes in execution order; backward() replays
// the recorded closures in exact reverse order. Gradients accumulate
// additively when a value feeds several ops.

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "vesselseg/ops.hpp"
#include "vesselseg/tensor.hpp"

namespace vesselseg {

template <typename T>
class Tape {
 public:
  struct Ref {
    int id = -1;
    bool valid() const { return id >= 0; }
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Ref leaf(Tensor<T> value, bool requires_grad = false) {
    return push(std::move(value), requires_grad, {});
  }

  const Tensor<T>& value(Ref r) const { return nodes_[r.id].value; }

  Tensor<T>& grad(Ref r) {
    Node& node = nodes_[r.id];
    if (node.grad.empty() && !node.value.empty()) {
      const Tensor<T>& v = node.value;
      node.grad = Tensor<T>(v.n, v.c, v.h, v.w);
    }
    return node.grad;
  }

  Ref conv2d(Ref input, Ref weights, Ref bias, int stride, int padding) {
    const Tensor<T>& in = value(input);
    const Tensor<T>& w = value(weights);
    const Tensor<T>& b = value(bias);
    Tensor<T> out = vesselseg::conv2d<T>(in, w, {b.data.data(), b.data.size()}, stride, padding);
    Ref r = push(std::move(out), any_grad({input, weights, bias}), [=, this](const Tensor<T>& gout) {
      Tensor<T> gin, gw;
      std::vector<T> gb;
      conv2d_backward(value(input), value(weights), stride, padding, gout,
                      needs_grad(input) ? &gin : nullptr,
                      needs_grad(weights) ? &gw : nullptr,
                      needs_grad(bias) ? &gb : nullptr);
      if (needs_grad(input)) accumulate(input, gin);
      if (needs_grad(weights)) accumulate(weights, gw);
      if (needs_grad(bias)) accumulate_vec(bias, gb);
    });
    return r;
  }

  Ref transposed_conv2d(Ref input, Ref weights, int stride) {
    Tensor<T> out = vesselseg::transposed_conv2d<T>(value(input), value(weights), stride);
    return push(std::move(out), any_grad({input, weights}), [=, this](const Tensor<T>& gout) {
      Tensor<T> gin, gw;
      transposed_conv2d_backward(value(input), value(weights), stride, gout,
                                 needs_grad(input) ? &gin : nullptr,
                                 needs_grad(weights) ? &gw : nullptr);
      if (needs_grad(input)) accumulate(input, gin);
      if (needs_grad(weights)) accumulate(weights, gw);
    });
  }

  Ref relu(Ref input) {
    Tensor<T> out = vesselseg::relu(value(input));
    return push(std::move(out), any_grad({input}), [=, this](const Tensor<T>& gout) {
      if (needs_grad(input)) accumulate(input, relu_backward(value(input), gout));
    });
  }

  Ref mul(Ref a, Ref b) {
    Tensor<T> out = elementwise_mul(value(a), value(b));
    return push(std::move(out), any_grad({a, b}), [=, this](const Tensor<T>& gout) {
      if (needs_grad(a)) accumulate(a, elementwise_mul(gout, value(b)));
      if (needs_grad(b)) accumulate(b, elementwise_mul(gout, value(a)));
    });
  }

  Ref add(Ref a, Ref b) {
    Tensor<T> out = vesselseg::add(value(a), value(b));
    return push(std::move(out), any_grad({a, b}), [=, this](const Tensor<T>& gout) {
      if (needs_grad(a)) accumulate(a, gout);
      if (needs_grad(b)) accumulate(b, gout);
    });
  }

  // Scalar node holding the loss; the cached logits gradient is replayed on
  // backward.
  Ref softmax_cross_entropy(Ref logits, const LabelMap& labels,
                            std::span<const double> class_weights = {}) {
    auto ce = vesselseg::softmax_cross_entropy(value(logits), labels, class_weights);
    Tensor<T> loss(1, 1, 1, 1);
    loss.data[0] = static_cast<T>(ce.loss);
    auto grad_logits = std::make_shared<Tensor<T>>(std::move(ce.grad_logits));
    return push(std::move(loss), any_grad({logits}),
                [=, this](const Tensor<T>& gout) {
                  if (!needs_grad(logits)) return;
                  Tensor<T> g = *grad_logits;
                  const T s = gout.data[0];
                  for (T& v : g.data) v *= s;
                  accumulate(logits, g);
                });
  }

  // Seeds d(loss)/d(loss) = 1 and replays the tape backwards.
  void backward(Ref loss) {
    require(value(loss).size() == 1, "backward: loss node must be scalar");
    grad(loss).data[0] = T(1);
    replay(loss);
  }

  // Backward of sum(output * seed); used by vector-probed gradient checks.
  void backward_with_seed(Ref output, const Tensor<T>& seed) {
    require(value(output).same_shape(seed), "backward_with_seed: seed shape mismatch");
    grad(output) = seed;
    replay(output);
  }

  size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    bool requires_grad = false;
    std::function<void(const Tensor<T>&)> back;
  };

  Ref push(Tensor<T> value, bool requires_grad,
           std::function<void(const Tensor<T>&)> back) {
    Node node;
    node.value = std::move(value);
    node.requires_grad = requires_grad;
    if (requires_grad) node.back = std::move(back);
    nodes_.push_back(std::move(node));
    return Ref{static_cast<int>(nodes_.size()) - 1};
  }

  void replay(Ref from) {
    for (int id = from.id; id >= 0; --id) {
      Node& node = nodes_[id];
      if (node.back && !node.grad.empty()) node.back(node.grad);
    }
  }

  bool needs_grad(Ref r) const { return nodes_[r.id].requires_grad; }

  bool any_grad(std::initializer_list<Ref> refs) const {
    for (Ref r : refs) {
      if (r.valid() && needs_grad(r)) return true;
    }
    return false;
  }

  void accumulate(Ref r, const Tensor<T>& g) {
    Tensor<T>& dst = grad(r);
    for (size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += g.data[i];
  }

  void accumulate_vec(Ref r, const std::vector<T>& g) {
    Tensor<T>& dst = grad(r);
    for (size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += g[i];
  }

  std::vector<Node> nodes_;
};

using TapeF = Tape<float>;
using TapeD = Tape<double>;

}  // namespace vesselseg
