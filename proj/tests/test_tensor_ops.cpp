#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "support/naive_ops.hpp"
#include "vesselseg/ops.hpp"
#include "vesselseg/rng.hpp"

using namespace vesselseg;

namespace {

template <typename T>
std::span<const T> as_span(const std::vector<T>& v) {
  return {v.data(), v.size()};
}

}  // namespace

TEST_CASE("conv2d identity kernel passes the value through") {
  TensorD in(1, 1, 1, 1);
  in.data[0] = 3.75;
  TensorD w = TensorD::full(1, 1, 1, 1, 1.0);
  std::vector<double> bias{0.0};
  auto out = conv2d<double>(in, w, as_span(bias), 1, 0);
  CHECK(out.n == 1);
  CHECK(out.data[0] == doctest::Approx(3.75));
}

TEST_CASE("conv2d 3x3 input with all-ones 2x2 kernel") {
  TensorD in(1, 1, 3, 3);
  in.data = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  TensorD w = TensorD::full(1, 1, 2, 2, 1.0);
  std::vector<double> bias{0.0};
  auto out = conv2d<double>(in, w, as_span(bias), 1, 0);
  REQUIRE(out.h == 2);
  REQUIRE(out.w == 2);
  const std::vector<double> expected{12, 16, 24, 28};
  for (size_t i = 0; i < 4; ++i) CHECK(out.data[i] == doctest::Approx(expected[i]));
  // and the independent oracle agrees
  auto oracle = naive::conv2d<double>(in, w, as_span(bias), 1, 0);
  CHECK(naive::max_rel_err(out, oracle) < 1e-12);
}

TEST_CASE("conv2d of zero input is the bias everywhere") {
  TensorD in(2, 3, 5, 5);
  TensorD w(4, 3, 3, 3);
  Rng rng(1);
  for (auto& v : w.data) v = rng.uniform(-1, 1);
  std::vector<double> bias{0.5, -1.25, 2.0, 0.0};
  auto out = conv2d<double>(in, w, as_span(bias), 1, 1);
  for (int n = 0; n < out.n; ++n) {
    for (int f = 0; f < out.c; ++f) {
      for (int y = 0; y < out.h; ++y) {
        for (int x = 0; x < out.w; ++x) {
          CHECK(out.at(n, f, y, x) == doctest::Approx(bias[f]));
        }
      }
    }
  }
}

TEST_CASE("conv2d rejects bad shapes") {
  TensorD in(1, 3, 4, 4);
  TensorD w(2, 2, 3, 3);  // channel mismatch
  std::vector<double> bias{0, 0};
  CHECK_THROWS_AS(conv2d<double>(in, w, as_span(bias), 1, 0), ShapeError);

  TensorD empty(0, 3, 4, 4);
  TensorD wok(2, 3, 3, 3);
  CHECK_THROWS_AS(conv2d<double>(empty, wok, as_span(bias), 1, 0), ShapeError);

  // kernel larger than padded input
  TensorD small(1, 3, 2, 2);
  CHECK_THROWS_AS(conv2d<double>(small, wok, as_span(bias), 1, 0), ShapeError);
}

TEST_CASE("transposed_conv2d broadcast of a single value") {
  TensorD in(1, 1, 1, 1);
  in.data[0] = -2.5;
  TensorD w = TensorD::full(1, 1, 2, 2, 1.0);
  auto out = transposed_conv2d<double>(in, w, 2);
  REQUIRE(out.h == 2);
  REQUIRE(out.w == 2);
  for (double v : out.data) CHECK(v == doctest::Approx(-2.5));
}

TEST_CASE("transposed_conv2d of zero input is zero") {
  TensorD in(1, 2, 3, 3);
  TensorD w(2, 3, 2, 2);
  Rng rng(2);
  for (auto& v : w.data) v = rng.uniform(-1, 1);
  auto out = transposed_conv2d<double>(in, w, 2);
  for (double v : out.data) CHECK(v == 0.0);
}

TEST_CASE("transposed_conv2d equals zero-stuffing plus flipped-kernel conv") {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    auto in = naive::random_tensor<double>(rng, 1, 2, 2, 2);
    auto w = naive::random_tensor<double>(rng, 2, 3, 3, 3);
    const int stride = 1 + trial % 3;
    auto got = transposed_conv2d<double>(in, w, stride);
    auto oracle = naive::transposed_conv2d<double>(in, w, stride);
    REQUIRE(got.same_shape(oracle));
    CHECK(naive::max_rel_err(got, oracle) < 1e-10);
  }
}

TEST_CASE("relu sign cases") {
  TensorD in(1, 1, 1, 3);
  in.data = {-1, 0, 2};
  auto out = relu(in);
  CHECK(out.data[0] == 0);
  CHECK(out.data[1] == 0);
  CHECK(out.data[2] == 2);

  TensorD pos(1, 1, 2, 2);
  pos.data = {0.5, 1, 2, 3};
  auto same = relu(pos);
  for (size_t i = 0; i < 4; ++i) CHECK(same.data[i] == pos.data[i]);
}

TEST_CASE("relu backward: 0 below zero, 1 above, 0 at exactly zero") {
  TensorD in(1, 1, 1, 3);
  in.data = {-1, 0, 2};
  TensorD g = TensorD::full(1, 1, 1, 3, 5.0);
  auto gin = relu_backward(in, g);
  CHECK(gin.data[0] == 0);
  CHECK(gin.data[1] == 0);
  CHECK(gin.data[2] == 5.0);
}

TEST_CASE("elementwise_mul identity and annihilator") {
  Rng rng(4);
  auto a = naive::random_tensor<double>(rng, 2, 3, 4, 4);
  auto ones = TensorD::full(2, 3, 4, 4, 1.0);
  auto zeros = TensorD(2, 3, 4, 4);
  auto same = elementwise_mul(a, ones);
  for (size_t i = 0; i < a.data.size(); ++i) CHECK(same.data[i] == a.data[i]);
  auto nil = elementwise_mul(a, zeros);
  for (double v : nil.data) CHECK(v == 0.0);

  TensorD mismatched(2, 3, 4, 5);
  CHECK_THROWS_AS(elementwise_mul(a, mismatched), ShapeError);
}

TEST_CASE("softmax_cross_entropy closed-form cases") {
  SUBCASE("uniform logits over 4 classes") {
    TensorD logits = TensorD::full(1, 4, 2, 2, 0.7);
    LabelMap labels(1, 2, 2, 4);
    labels.labels = {0, 1, 2, 3};
    auto res = softmax_cross_entropy(logits, labels);
    CHECK(res.loss == doctest::Approx(std::log(4.0)).epsilon(1e-9));
  }
  SUBCASE("two classes, logits (1,2), label 1") {
    TensorD logits(1, 2, 1, 1);
    logits.data = {1.0, 2.0};
    LabelMap labels(1, 1, 1, 2);
    labels.labels = {1};
    auto res = softmax_cross_entropy(logits, labels);
    CHECK(res.loss == doctest::Approx(std::log(1.0 + std::exp(-1.0))).epsilon(1e-9));
    CHECK(res.loss == doctest::Approx(0.313262).epsilon(1e-5));
  }
  SUBCASE("saturated correct class") {
    TensorD logits(1, 3, 1, 1);
    logits.data = {1000.0, 0.0, 0.0};
    LabelMap labels(1, 1, 1, 3);
    labels.labels = {0};
    auto res = softmax_cross_entropy(logits, labels);
    CHECK(res.loss == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(res.grad_logits.all_finite());
  }
  SUBCASE("out-of-range label is rejected") {
    TensorD logits(1, 2, 1, 1);
    LabelMap labels(1, 1, 1, 4);
    labels.labels = {3};
    CHECK_THROWS_AS(softmax_cross_entropy(logits, labels), ShapeError);
  }
}

TEST_CASE("kernel oracle equivalence on seeded random cases") {
  Rng rng(1234);
  double worst = 0.0;
  for (int trial = 0; trial < 60; ++trial) {
    const int n = rng.uniform_int(1, 2);
    const int cin = rng.uniform_int(1, 4);
    const int f = rng.uniform_int(1, 4);
    const int h = rng.uniform_int(3, 8);
    const int w = rng.uniform_int(3, 8);
    const int k = rng.uniform_int(1, 3);
    const int stride = rng.uniform_int(1, 2);
    const int pad = rng.uniform_int(0, 1);
    if (k > h + 2 * pad || k > w + 2 * pad) continue;

    auto input = naive::random_tensor<double>(rng, n, cin, h, w);
    auto weights = naive::random_tensor<double>(rng, f, cin, k, k);
    std::vector<double> bias(f);
    for (auto& b : bias) b = rng.uniform(-1, 1);

    auto got = conv2d<double>(input, weights, as_span(bias), stride, pad);
    auto want = naive::conv2d<double>(input, weights, as_span(bias), stride, pad);
    REQUIRE(got.same_shape(want));
    worst = std::max(worst, naive::max_rel_err(got, want));

    auto tw = naive::random_tensor<double>(rng, cin, f, k, k);
    auto tgot = transposed_conv2d<double>(input, tw, stride);
    auto twant = naive::transposed_conv2d<double>(input, tw, stride);
    worst = std::max(worst, naive::max_rel_err(tgot, twant));

    auto rgot = relu(input);
    auto rwant = naive::relu(input);
    worst = std::max(worst, naive::max_rel_err(rgot, rwant));

    auto other = naive::random_tensor<double>(rng, n, cin, h, w);
    worst = std::max(worst, naive::max_rel_err(elementwise_mul(input, other),
                                               naive::elementwise_mul(input, other)));

    LabelMap labels(n, h, w, f);
    for (auto& l : labels.labels) l = static_cast<uint8_t>(rng.uniform_int(0, f - 1));
    auto logits = naive::random_tensor<double>(rng, n, f, h, w, -3.0, 3.0);
    const double got_loss = softmax_cross_entropy(logits, labels).loss;
    const double want_loss = naive::softmax_cross_entropy_loss(logits, labels);
    worst = std::max(worst, std::abs(got_loss - want_loss) /
                                std::max({std::abs(got_loss), std::abs(want_loss), 1e-8}));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("conv2d is linear in the input when bias is zero") {
  Rng rng(77);
  auto input = naive::random_tensor<double>(rng, 1, 2, 6, 6);
  auto weights = naive::random_tensor<double>(rng, 3, 2, 3, 3);
  std::vector<double> zero_bias(3, 0.0);
  const double alpha = 3.5;
  auto scaled = input;
  for (auto& v : scaled.data) v *= alpha;
  auto a = conv2d<double>(scaled, weights, as_span(zero_bias), 1, 1);
  auto b = conv2d<double>(input, weights, as_span(zero_bias), 1, 1);
  double worst = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    worst = std::max(worst, std::abs(a.data[i] - alpha * b.data[i]));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("conv2d and transposed_conv2d are adjoint") {
  Rng rng(88);
  for (int trial = 0; trial < 8; ++trial) {
    const int stride = 1 + trial % 2;
    const int k = 2 + (trial / 2) % 2;
    const int h = k + stride * 3;  // (h - k) divisible by stride
    auto x = naive::random_tensor<double>(rng, 1, 2, h, h);
    auto w = naive::random_tensor<double>(rng, 3, 2, k, k);
    std::vector<double> zero_bias(3, 0.0);
    auto cx = conv2d<double>(x, w, as_span(zero_bias), stride, 0);
    auto y = naive::random_tensor<double>(rng, 1, 3, cx.h, cx.w);
    // same weight block reinterpreted as [in=3, out=2] for the transpose
    TensorD wt;
    wt.n = 3; wt.c = 2; wt.h = k; wt.w = k;
    wt.data = w.data;
    auto ty = transposed_conv2d<double>(y, wt, stride);
    REQUIRE(ty.same_shape(x));
    double lhs = 0.0, rhs = 0.0;
    for (size_t i = 0; i < cx.data.size(); ++i) lhs += cx.data[i] * y.data[i];
    for (size_t i = 0; i < x.data.size(); ++i) rhs += x.data[i] * ty.data[i];
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-6));
  }
}

TEST_CASE("kernels are deterministic across repeated calls") {
  Rng rng(99);
  auto input = naive::random_tensor<float>(rng, 2, 3, 8, 8);
  auto weights = naive::random_tensor<float>(rng, 4, 3, 3, 3);
  std::vector<float> bias(4, 0.25f);
  auto a = conv2d<float>(input, weights, as_span(bias), 1, 1);
  auto b = conv2d<float>(input, weights, as_span(bias), 1, 1);
  REQUIRE(a.data.size() == b.data.size());
  for (size_t i = 0; i < a.data.size(); ++i) CHECK(a.data[i] == b.data[i]);
}
