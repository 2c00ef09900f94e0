#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace vesselseg {

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Dense 4-D array in NCHW layout. float is the working precision for
// networks; double is used for gradient checking.
template <typename T>
struct Tensor {
  int n = 0, c = 0, h = 0, w = 0;
  std::vector<T> data;

  Tensor() = default;
  Tensor(int n_, int c_, int h_, int w_) : n(n_), c(c_), h(h_), w(w_) {
    if (n < 0 || c < 0 || h < 0 || w < 0) {
      throw ShapeError("tensor extents must be non-negative, got " + shape_str());
    }
    data.assign(size(), T(0));
  }

  static Tensor full(int n_, int c_, int h_, int w_, T value) {
    Tensor t(n_, c_, h_, w_);
    for (auto& v : t.data) v = value;
    return t;
  }

  size_t size() const {
    return static_cast<size_t>(n) * static_cast<size_t>(c) *
           static_cast<size_t>(h) * static_cast<size_t>(w);
  }

  bool empty() const { return size() == 0; }

  T& at(int in, int ic, int iy, int ix) {
    return data[((static_cast<size_t>(in) * c + ic) * h + iy) * w + ix];
  }
  const T& at(int in, int ic, int iy, int ix) const {
    return data[((static_cast<size_t>(in) * c + ic) * h + iy) * w + ix];
  }

  bool same_shape(const Tensor& o) const {
    return n == o.n && c == o.c && h == o.h && w == o.w;
  }

  std::string shape_str() const {
    std::ostringstream os;
    os << "[" << n << "," << c << "," << h << "," << w << "]";
    return os.str();
  }

  bool all_finite() const {
    for (const T& v : data) {
      if (!std::isfinite(static_cast<double>(v))) return false;
    }
    return true;
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out;
    out.n = n; out.c = c; out.h = h; out.w = w;
    out.data.resize(data.size());
    for (size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<U>(data[i]);
    return out;
  }
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

// Per-pixel class indices for one annotation level. num_classes is the
// cardinality of that level's class list.
struct LabelMap {
  int n = 0, h = 0, w = 0;
  int num_classes = 0;
  std::vector<uint8_t> labels;

  LabelMap() = default;
  LabelMap(int n_, int h_, int w_, int num_classes_)
      : n(n_), h(h_), w(w_), num_classes(num_classes_),
        labels(static_cast<size_t>(n_) * h_ * w_, 0) {}

  size_t size() const { return static_cast<size_t>(n) * h * w; }

  uint8_t& at(int in, int iy, int ix) {
    return labels[(static_cast<size_t>(in) * h + iy) * w + ix];
  }
  uint8_t at(int in, int iy, int ix) const {
    return labels[(static_cast<size_t>(in) * h + iy) * w + ix];
  }

  bool same_extent(const LabelMap& o) const {
    return n == o.n && h == o.h && w == o.w;
  }
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ShapeError(msg);
}

}  // namespace vesselseg
