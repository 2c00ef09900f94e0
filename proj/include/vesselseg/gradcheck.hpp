#pragma once

// Central-difference verification of analytic gradients, 64-bit only.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "vesselseg/tensor.hpp"

namespace vesselseg {

struct GradCheckReport {
  double max_rel_err = 0.0;
  int worst_input = -1;
  size_t worst_elem = 0;
  double analytic = 0.0, numeric = 0.0;
};

// loss_fn re-evaluates the scalar from the current contents of *inputs.
// For each element: numeric = (f(x+eps) - f(x-eps)) / (2*eps), relative error
// |a-n| / max(|a|, |n|, 1e-8).
inline GradCheckReport gradcheck(const std::function<double()>& loss_fn,
                                 const std::vector<Tensor<double>*>& inputs,
                                 const std::vector<Tensor<double>>& analytic_grads,
                                 double eps) {
  GradCheckReport rep;
  for (size_t i = 0; i < inputs.size(); ++i) {
    Tensor<double>& x = *inputs[i];
    const Tensor<double>& ag = analytic_grads[i];
    require(x.data.size() == ag.data.size(), "gradcheck: analytic gradient shape mismatch");
    for (size_t j = 0; j < x.data.size(); ++j) {
      const double saved = x.data[j];
      x.data[j] = saved + eps;
      const double lp = loss_fn();
      x.data[j] = saved - eps;
      const double lm = loss_fn();
      x.data[j] = saved;
      const double numeric = (lp - lm) / (2.0 * eps);
      const double analytic = ag.data[j];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      const double rel = std::abs(analytic - numeric) / denom;
      if (rel > rep.max_rel_err) {
        rep.max_rel_err = rel;
        rep.worst_input = static_cast<int>(i);
        rep.worst_elem = j;
        rep.analytic = analytic;
        rep.numeric = numeric;
      }
    }
  }
  return rep;
}

struct OpGradCheck {
  std::string op;
  double max_rel_err = 0.0;
  bool passed = false;
};

// Seeded per-op suite covering every differentiable op plus the composite
// valve layer. Threshold 1e-4 at eps = 1e-3.
std::vector<OpGradCheck> run_gradcheck_suite(double eps = 1e-3, double threshold = 1e-4);

}  // namespace vesselseg
