#include "vesselseg/gradcheck.hpp"

#include "vesselseg/autodiff.hpp"
#include "vesselseg/rng.hpp"
#include "vesselseg/valve.hpp"

namespace vesselseg {

namespace {

TensorD random_tensor(Rng& rng, int n, int c, int h, int w, double lo = -1.0,
                      double hi = 1.0) {
  TensorD t(n, c, h, w);
  for (auto& v : t.data) v = rng.uniform(lo, hi);
  return t;
}

// Keep probes off the relu kink.
void push_from_zero(TensorD& t, double margin) {
  for (auto& v : t.data) {
    if (std::abs(v) < margin) v = v < 0 ? -margin : margin;
  }
}

double weighted_sum(const TensorD& t, const TensorD& probe) {
  double s = 0.0;
  for (size_t i = 0; i < t.data.size(); ++i) s += t.data[i] * probe.data[i];
  return s;
}

using CaseFn = std::function<GradCheckReport(double eps)>;

GradCheckReport check_conv2d(double eps, int stride, int padding) {
  Rng rng(11 + stride * 7 + padding);
  TensorD input = random_tensor(rng, 2, 3, 6, 6);
  TensorD weights = random_tensor(rng, 4, 3, 3, 3);
  TensorD bias = random_tensor(rng, 1, 4, 1, 1);
  const int ho = conv_out_extent(6, 3, stride, padding);
  const int wo = conv_out_extent(6, 3, stride, padding);
  TensorD probe = random_tensor(rng, 2, 4, ho, wo);

  auto loss = [&]() {
    auto out = conv2d<double>(input, weights, {bias.data.data(), bias.data.size()},
                              stride, padding);
    return weighted_sum(out, probe);
  };
  TapeD tape;
  auto in_r = tape.leaf(input, true);
  auto w_r = tape.leaf(weights, true);
  auto b_r = tape.leaf(bias, true);
  auto out_r = tape.conv2d(in_r, w_r, b_r, stride, padding);
  tape.backward_with_seed(out_r, probe);
  return gradcheck(loss, {&input, &weights, &bias},
                   {tape.grad(in_r), tape.grad(w_r), tape.grad(b_r)}, eps);
}

GradCheckReport check_transposed_conv2d(double eps) {
  Rng rng(23);
  TensorD input = random_tensor(rng, 2, 3, 4, 4);
  TensorD weights = random_tensor(rng, 3, 2, 2, 2);
  TensorD probe = random_tensor(rng, 2, 2, 8, 8);

  auto loss = [&]() {
    return weighted_sum(transposed_conv2d<double>(input, weights, 2), probe);
  };
  TapeD tape;
  auto in_r = tape.leaf(input, true);
  auto w_r = tape.leaf(weights, true);
  auto out_r = tape.transposed_conv2d(in_r, w_r, 2);
  tape.backward_with_seed(out_r, probe);
  return gradcheck(loss, {&input, &weights}, {tape.grad(in_r), tape.grad(w_r)}, eps);
}

GradCheckReport check_relu(double eps) {
  Rng rng(31);
  TensorD input = random_tensor(rng, 2, 4, 5, 5);
  push_from_zero(input, 0.1);
  TensorD probe = random_tensor(rng, 2, 4, 5, 5);

  auto loss = [&]() { return weighted_sum(relu(input), probe); };
  TapeD tape;
  auto in_r = tape.leaf(input, true);
  auto out_r = tape.relu(in_r);
  tape.backward_with_seed(out_r, probe);
  return gradcheck(loss, {&input}, {tape.grad(in_r)}, eps);
}

GradCheckReport check_elementwise_mul(double eps) {
  Rng rng(41);
  TensorD a = random_tensor(rng, 2, 3, 4, 4);
  TensorD b = random_tensor(rng, 2, 3, 4, 4);
  TensorD probe = random_tensor(rng, 2, 3, 4, 4);

  auto loss = [&]() { return weighted_sum(elementwise_mul(a, b), probe); };
  TapeD tape;
  auto a_r = tape.leaf(a, true);
  auto b_r = tape.leaf(b, true);
  auto out_r = tape.mul(a_r, b_r);
  tape.backward_with_seed(out_r, probe);
  return gradcheck(loss, {&a, &b}, {tape.grad(a_r), tape.grad(b_r)}, eps);
}

GradCheckReport check_softmax_cross_entropy(double eps) {
  Rng rng(53);
  TensorD logits = random_tensor(rng, 2, 4, 5, 5, -2.0, 2.0);
  LabelMap labels(2, 5, 5, 4);
  for (auto& l : labels.labels) l = static_cast<uint8_t>(rng.uniform_int(0, 3));

  auto loss = [&]() { return softmax_cross_entropy(logits, labels).loss; };
  TapeD tape;
  auto l_r = tape.leaf(logits, true);
  auto loss_r = tape.softmax_cross_entropy(l_r, labels);
  tape.backward(loss_r);
  return gradcheck(loss, {&logits}, {tape.grad(l_r)}, eps);
}

// Full valve layer: image conv, valve conv, elementwise product, relu.
// Checks the image and all four parameter banks.
GradCheckReport check_valve_layer(double eps) {
  Rng rng(67);
  TensorD image = random_tensor(rng, 1, 3, 6, 6);
  LabelMap seg_map(1, 6, 6, 2);
  for (auto& l : seg_map.labels) l = static_cast<uint8_t>(rng.uniform_int(0, 1));
  TensorD seg = encode_segmap<double>(seg_map, 2);

  TensorD image_w = random_tensor(rng, 4, 3, 3, 3);
  TensorD image_b = random_tensor(rng, 1, 4, 1, 1, 0.5, 1.5);
  TensorD valve_w = random_tensor(rng, 4, 2, 3, 3);
  TensorD valve_b = random_tensor(rng, 1, 4, 1, 1, 0.5, 1.5);
  TensorD probe = random_tensor(rng, 1, 4, 6, 6);

  auto loss = [&]() {
    ValveLayerParams<double> p;
    p.image_weights = image_w;
    p.image_bias = image_b.data;
    p.valve_weights = valve_w;
    p.valve_bias = valve_b.data;
    return weighted_sum(valve_forward(image, seg, p), probe);
  };
  TapeD tape;
  auto img_r = tape.leaf(image, true);
  auto seg_r = tape.leaf(seg, false);
  auto iw_r = tape.leaf(image_w, true);
  auto ib_r = tape.leaf(image_b, true);
  auto vw_r = tape.leaf(valve_w, true);
  auto vb_r = tape.leaf(valve_b, true);
  auto out_r = valve_forward_tape(tape, img_r, seg_r, iw_r, ib_r, vw_r, vb_r);
  tape.backward_with_seed(out_r, probe);
  return gradcheck(loss, {&image, &image_w, &image_b, &valve_w, &valve_b},
                   {tape.grad(img_r), tape.grad(iw_r), tape.grad(ib_r),
                    tape.grad(vw_r), tape.grad(vb_r)},
                   eps);
}

}  // namespace

std::vector<OpGradCheck> run_gradcheck_suite(double eps, double threshold) {
  struct Entry {
    std::string name;
    CaseFn fn;
  };
  const std::vector<Entry> entries = {
      {"conv2d", [](double e) { return check_conv2d(e, 1, 1); }},
      {"conv2d_stride2", [](double e) { return check_conv2d(e, 2, 1); }},
      {"transposed_conv2d", check_transposed_conv2d},
      {"relu", check_relu},
      {"elementwise_mul", check_elementwise_mul},
      {"softmax_cross_entropy", check_softmax_cross_entropy},
      {"valve_layer", check_valve_layer},
  };
  std::vector<OpGradCheck> results;
  for (const auto& e : entries) {
    GradCheckReport rep = e.fn(eps);
    results.push_back({e.name, rep.max_rel_err, rep.max_rel_err < threshold});
  }
  return results;
}

}  // namespace vesselseg
