#include "vesselseg/network.hpp"

#include <cmath>
#include <string>

#include "vesselseg/rng.hpp"
#include "vesselseg/valve.hpp"

namespace vesselseg {

void NetworkSpec::validate() const {
  require(in_channels >= 1, "NetworkSpec: in_channels must be >= 1");
  require(num_classes >= 2, "NetworkSpec: num_classes must be >= 2");
  require(encoder_widths.size() == 4, "NetworkSpec: expected 4 encoder widths");
  for (int w : encoder_widths) require(w >= 1, "NetworkSpec: encoder widths must be >= 1");
  require(kernel_size >= 1 && kernel_size % 2 == 1, "NetworkSpec: kernel_size must be odd");
  if (seg_channels) require(*seg_channels >= 1, "NetworkSpec: seg_channels must be >= 1");
}

ParamBlock& Network::param(std::string_view name) {
  for (auto& p : params) {
    if (p.name == name) return p;
  }
  throw ShapeError("network has no parameter named '" + std::string(name) + "'");
}

const ParamBlock& Network::param(std::string_view name) const {
  return const_cast<Network*>(this)->param(name);
}

bool Network::has_param(std::string_view name) const {
  for (const auto& p : params) {
    if (p.name == name) return true;
  }
  return false;
}

namespace {

Tensor<float> he_uniform(Rng& rng, int f, int c, int kh, int kw) {
  Tensor<float> t(f, c, kh, kw);
  const double bound = std::sqrt(6.0 / (static_cast<double>(c) * kh * kw));
  for (auto& v : t.data) v = static_cast<float>(rng.uniform(-bound, bound));
  return t;
}

Tensor<float> bias_block(int f, float fill) {
  Tensor<float> t(1, f, 1, 1);
  for (auto& v : t.data) v = fill;
  return t;
}

}  // namespace

Network build_network(const NetworkSpec& spec, uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  const int k = spec.kernel_size;
  const int w1 = spec.encoder_widths[0];
  const int w2 = spec.encoder_widths[1];
  const int w3 = spec.encoder_widths[2];
  const int w4 = spec.encoder_widths[3];
  const int c = spec.num_classes;

  Network net;
  net.spec = spec;
  auto add = [&](std::string name, Tensor<float> value) {
    net.params.push_back({std::move(name), std::move(value)});
  };

  add("enc1.w", he_uniform(rng, w1, spec.in_channels, k, k));
  add("enc1.b", bias_block(w1, 0.0f));
  if (spec.seg_channels) {
    // zero weights + unit bias: the relevance map starts flat at 1, so the
    // fresh net behaves exactly like its plain counterpart
    add("valve.w", Tensor<float>(w1, *spec.seg_channels, k, k));
    add("valve.b", bias_block(w1, 1.0f));
  }
  add("down1.w", he_uniform(rng, w2, w1, k, k));
  add("down1.b", bias_block(w2, 0.0f));
  add("enc2.w", he_uniform(rng, w2, w2, k, k));
  add("enc2.b", bias_block(w2, 0.0f));
  add("down2.w", he_uniform(rng, w3, w2, k, k));
  add("down2.b", bias_block(w3, 0.0f));
  add("enc3.w", he_uniform(rng, w3, w3, k, k));
  add("enc3.b", bias_block(w3, 0.0f));
  add("down3.w", he_uniform(rng, w4, w3, k, k));
  add("down3.b", bias_block(w4, 0.0f));
  add("enc4.w", he_uniform(rng, w4, w4, k, k));
  add("enc4.b", bias_block(w4, 0.0f));
  add("score.w", he_uniform(rng, c, w4, 1, 1));
  add("score.b", bias_block(c, 0.0f));
  add("skip4.w", he_uniform(rng, c, w3, 1, 1));
  add("skip4.b", bias_block(c, 0.0f));
  add("skip2.w", he_uniform(rng, c, w2, 1, 1));
  add("skip2.b", bias_block(c, 0.0f));
  add("up1.w", he_uniform(rng, c, c, 2, 2));
  add("up2.w", he_uniform(rng, c, c, 2, 2));
  add("up3.w", he_uniform(rng, c, c, 2, 2));
  return net;
}

std::size_t parameter_count(const Network& net) {
  std::size_t total = 0;
  for (const auto& p : net.params) total += p.value.size();
  return total;
}

TapeForward forward_tape(Tape<float>& tape, const Network& net, const Tensor<float>& image,
                         const Tensor<float>* seg, bool train) {
  net.spec.validate();
  require(image.c == net.spec.in_channels, "forward: image channel count mismatch");
  require(image.h % 8 == 0 && image.w % 8 == 0, "forward: image extent must be divisible by 8");
  if (net.spec.seg_channels) {
    require(seg != nullptr, "forward: network expects a segmentation input");
    require(seg->n == image.n && seg->h == image.h && seg->w == image.w,
            "forward: segmentation extent mismatch");
    require(seg->c == *net.spec.seg_channels, "forward: segmentation channel count mismatch");
  } else {
    require(seg == nullptr, "forward: network takes no segmentation input");
  }

  TapeForward out;
  std::vector<Tape<float>::Ref> refs;
  refs.reserve(net.params.size());
  for (const auto& p : net.params) refs.push_back(tape.leaf(p.value, train));
  auto ref = [&](std::string_view name) {
    for (std::size_t i = 0; i < net.params.size(); ++i) {
      if (net.params[i].name == name) return refs[i];
    }
    throw ShapeError("forward: missing parameter block");
  };

  const int pad = net.spec.kernel_size / 2;
  auto img = tape.leaf(image);

  Tape<float>::Ref x0;
  if (net.spec.seg_channels) {
    auto seg_ref = tape.leaf(*seg);
    x0 = valve_forward_tape(tape, img, seg_ref, ref("enc1.w"), ref("enc1.b"), ref("valve.w"),
                            ref("valve.b"));
  } else {
    x0 = tape.relu(tape.conv2d(img, ref("enc1.w"), ref("enc1.b"), 1, pad));
  }
  auto x1 = tape.relu(tape.conv2d(x0, ref("down1.w"), ref("down1.b"), 2, pad));
  auto x2 = tape.relu(tape.conv2d(x1, ref("enc2.w"), ref("enc2.b"), 1, pad));
  auto x3 = tape.relu(tape.conv2d(x2, ref("down2.w"), ref("down2.b"), 2, pad));
  auto x4 = tape.relu(tape.conv2d(x3, ref("enc3.w"), ref("enc3.b"), 1, pad));
  auto x5 = tape.relu(tape.conv2d(x4, ref("down3.w"), ref("down3.b"), 2, pad));
  auto x6 = tape.relu(tape.conv2d(x5, ref("enc4.w"), ref("enc4.b"), 1, pad));

  auto s8 = tape.conv2d(x6, ref("score.w"), ref("score.b"), 1, 0);
  auto u4 = tape.add(tape.transposed_conv2d(s8, ref("up1.w"), 2),
                     tape.conv2d(x4, ref("skip4.w"), ref("skip4.b"), 1, 0));
  auto u2 = tape.add(tape.transposed_conv2d(u4, ref("up2.w"), 2),
                     tape.conv2d(x2, ref("skip2.w"), ref("skip2.b"), 1, 0));
  out.logits = tape.transposed_conv2d(u2, ref("up3.w"), 2);
  out.param_refs = std::move(refs);
  return out;
}

Tensor<float> forward(const Network& net, const Tensor<float>& image, const Tensor<float>* seg) {
  Tape<float> tape;
  auto fwd = forward_tape(tape, net, image, seg, false);
  return tape.value(fwd.logits);
}

LabelMap predict(const Tensor<float>& logits) {
  LabelMap map(logits.n, logits.h, logits.w, logits.c);
  for (int n = 0; n < logits.n; ++n) {
    for (int y = 0; y < logits.h; ++y) {
      for (int x = 0; x < logits.w; ++x) {
        int best = 0;
        float best_v = logits.at(n, 0, y, x);
        for (int c = 1; c < logits.c; ++c) {
          const float v = logits.at(n, c, y, x);
          if (v > best_v) {
            best = c;
            best_v = v;
          }
        }
        map.at(n, y, x) = static_cast<uint8_t>(best);
      }
    }
  }
  return map;
}

}  // namespace vesselseg
