#pragma once

// Valve-filter gating: the mechanism that feeds a segmentation map into a
// content net. The image and the segmentation planes each go through their
// own filter bank; the two responses are multiplied elementwise and passed
// through relu. Same-padding keeps the spatial extent.

#include <span>
#include <string>
#include <vector>

#include "vesselseg/autodiff.hpp"
#include "vesselseg/ops.hpp"
#include "vesselseg/tensor.hpp"

namespace vesselseg {

template <typename T>
struct ValveLayerParams {
  Tensor<T> image_weights;       // [F, Cin, k, k]
  std::vector<T> image_bias;     // [F]
  Tensor<T> valve_weights;       // [F, S, k, k]
  std::vector<T> valve_bias;     // [F]

  int filters() const { return image_weights.n; }
  int kernel() const { return image_weights.h; }

  void validate() const {
    require(image_weights.n == valve_weights.n &&
                image_weights.h == valve_weights.h &&
                image_weights.w == valve_weights.w,
            "valve: image and valve filter banks must share F and k, got " +
                image_weights.shape_str() + " vs " + valve_weights.shape_str());
    require(static_cast<int>(image_bias.size()) == image_weights.n &&
                static_cast<int>(valve_bias.size()) == valve_weights.n,
            "valve: bias lengths must equal filter count");
  }
};

// One-hot planes, channel c set to 1 where the map equals c.
template <typename T>
Tensor<T> encode_segmap(const LabelMap& map, int num_segments) {
  Tensor<T> planes(map.n, num_segments, map.h, map.w);
  for (int in = 0; in < map.n; ++in) {
    for (int y = 0; y < map.h; ++y) {
      for (int x = 0; x < map.w; ++x) {
        const int label = map.at(in, y, x);
        require(label < num_segments,
                "encode_segmap: label " + std::to_string(label) + " out of range for " +
                    std::to_string(num_segments) + " segments");
        planes.at(in, label, y, x) = T(1);
      }
    }
  }
  return planes;
}

// relu( conv(image, W_img) * conv(seg, W_valve) ); the pre-relu product is
// the normalized feature map.
template <typename T>
Tensor<T> valve_forward(const Tensor<T>& image, const Tensor<T>& seg,
                        const ValveLayerParams<T>& params) {
  params.validate();
  require(image.n == seg.n && image.h == seg.h && image.w == seg.w,
          "valve_forward: image " + image.shape_str() + " and segmentation " +
              seg.shape_str() + " extents disagree");
  const int pad = params.kernel() / 2;
  Tensor<T> feature = conv2d<T>(image, params.image_weights,
                                {params.image_bias.data(), params.image_bias.size()}, 1, pad);
  Tensor<T> relevance = conv2d<T>(seg, params.valve_weights,
                                  {params.valve_bias.data(), params.valve_bias.size()}, 1, pad);
  return relu(elementwise_mul(feature, relevance));
}

// Same computation recorded on a tape; param refs come from the caller.
template <typename T>
typename Tape<T>::Ref valve_forward_tape(Tape<T>& tape, typename Tape<T>::Ref image,
                                         typename Tape<T>::Ref seg,
                                         typename Tape<T>::Ref image_w,
                                         typename Tape<T>::Ref image_b,
                                         typename Tape<T>::Ref valve_w,
                                         typename Tape<T>::Ref valve_b) {
  const int pad = tape.value(image_w).h / 2;
  auto feature = tape.conv2d(image, image_w, image_b, 1, pad);
  auto relevance = tape.conv2d(seg, valve_w, valve_b, 1, pad);
  return tape.relu(tape.mul(feature, relevance));
}

}  // namespace vesselseg
