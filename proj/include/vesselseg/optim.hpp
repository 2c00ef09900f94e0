#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vesselseg/tensor.hpp"

namespace vesselseg {

struct OptimizerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// v <- mu*v + g;  p <- p - lr*v
template <typename T>
class MomentumSgd {
 public:
  MomentumSgd(double lr, double momentum) : lr_(lr), momentum_(momentum) {}

  void step(std::span<Tensor<T>*> params, std::span<const Tensor<T>*> grads) {
    init_slots(params);
    for (size_t i = 0; i < params.size(); ++i) {
      Tensor<T>& p = *params[i];
      const Tensor<T>& g = *grads[i];
      check_grad(p, g, i);
      std::vector<T>& v = velocity_[i];
      for (size_t j = 0; j < p.data.size(); ++j) {
        v[j] = static_cast<T>(momentum_ * v[j] + g.data[j]);
        p.data[j] -= static_cast<T>(lr_) * v[j];
      }
    }
  }

 private:
  void init_slots(std::span<Tensor<T>*> params) {
    if (!velocity_.empty()) return;
    for (Tensor<T>* p : params) velocity_.emplace_back(p->data.size(), T(0));
  }

  void check_grad(const Tensor<T>& p, const Tensor<T>& g, size_t i) {
    if (p.data.size() != g.data.size()) {
      throw OptimizerError("optimizer: gradient shape mismatch at parameter " +
                           std::to_string(i));
    }
    if (!g.all_finite()) {
      throw OptimizerError("optimizer: non-finite gradient at parameter " +
                           std::to_string(i));
    }
  }

  double lr_, momentum_;
  std::vector<std::vector<T>> velocity_;
};

template <typename T>
class Adam {
 public:
  Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(std::span<Tensor<T>*> params, std::span<const Tensor<T>*> grads) {
    if (m_.empty()) {
      for (Tensor<T>* p : params) {
        m_.emplace_back(p->data.size(), 0.0);
        v_.emplace_back(p->data.size(), 0.0);
      }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (size_t i = 0; i < params.size(); ++i) {
      Tensor<T>& p = *params[i];
      const Tensor<T>& g = *grads[i];
      if (!g.all_finite()) {
        throw OptimizerError("optimizer: non-finite gradient at parameter " +
                             std::to_string(i));
      }
      for (size_t j = 0; j < p.data.size(); ++j) {
        const double gj = static_cast<double>(g.data[j]);
        m_[i][j] = beta1_ * m_[i][j] + (1.0 - beta1_) * gj;
        v_[i][j] = beta2_ * v_[i][j] + (1.0 - beta2_) * gj * gj;
        const double mhat = m_[i][j] / bc1;
        const double vhat = v_[i][j] / bc2;
        p.data[j] -= static_cast<T>(lr_ * mhat / (std::sqrt(vhat) + eps_));
      }
    }
  }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace vesselseg
