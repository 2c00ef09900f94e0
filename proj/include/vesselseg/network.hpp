#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vesselseg/autodiff.hpp"
#include "vesselseg/tensor.hpp"

namespace vesselseg {

// Desk-scale FCN: four encoder blocks with stride-2 downsampling between them,
// 1x1 score convs at /8, /4 and /2, and three learned x2 upsampling stages
// fusing the skip scores back in. When seg_channels is set the first layer is
// a valve layer that gates the image features with a map convolved from the
// segmentation planes.
struct NetworkSpec {
  int in_channels = 3;
  int num_classes = 2;
  std::optional<int> seg_channels;
  std::vector<int> encoder_widths = {16, 32, 64, 128};
  int kernel_size = 3;

  void validate() const;
  bool operator==(const NetworkSpec&) const = default;
};

struct ParamBlock {
  std::string name;
  Tensor<float> value;
};

struct Network {
  NetworkSpec spec;
  std::vector<ParamBlock> params;  // declaration order, stable across runs

  ParamBlock& param(std::string_view name);
  const ParamBlock& param(std::string_view name) const;
  bool has_param(std::string_view name) const;
};

Network build_network(const NetworkSpec& spec, uint64_t seed);
std::size_t parameter_count(const Network& net);

struct TapeForward {
  Tape<float>::Ref logits;
  std::vector<Tape<float>::Ref> param_refs;  // parallel to net.params
};

// Runs the network graph on a tape. seg must be one-hot planes [N,S,H,W] when
// the spec declares seg_channels and null otherwise. With train=true the
// parameter leaves require gradients.
TapeForward forward_tape(Tape<float>& tape, const Network& net, const Tensor<float>& image,
                         const Tensor<float>* seg, bool train);

Tensor<float> forward(const Network& net, const Tensor<float>& image,
                      const Tensor<float>* seg = nullptr);

// Per-pixel argmax over channels; ties break toward the lowest class index.
LabelMap predict(const Tensor<float>& logits);

}  // namespace vesselseg
