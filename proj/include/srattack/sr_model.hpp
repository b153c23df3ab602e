#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "srattack/error.hpp"
#include "srattack/resample.hpp"

namespace srattack {

// Feature map stored channel-major, (c, y, x).
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(int channels, int height, int width, float fill = 0.0f)
      : channels_(channels), height_(height), width_(width) {
    detail::require(channels >= 1 && height >= 1 && width >= 1,
                    "tensor dimensions must be >= 1");
    data_.assign(static_cast<std::size_t>(channels) * height * width, fill);
  }
  Tensor3(int channels, int height, int width, std::vector<float> data)
      : channels_(channels), height_(height), width_(width), data_(std::move(data)) {
    detail::require(channels >= 1 && height >= 1 && width >= 1,
                    "tensor dimensions must be >= 1");
    detail::require(data_.size() == static_cast<std::size_t>(channels) * height * width,
                    "tensor sample count does not match c*h*w");
  }

  int channels() const { return channels_; }
  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t plane_size() const { return static_cast<std::size_t>(height_) * width_; }

  float& at(int c, int y, int x) { return data_[(c * plane_size()) + static_cast<std::size_t>(y) * width_ + x]; }
  float at(int c, int y, int x) const { return data_[(c * plane_size()) + static_cast<std::size_t>(y) * width_ + x]; }

  std::span<float> plane(int c) { return std::span<float>(data_).subspan(c * plane_size(), plane_size()); }
  std::span<const float> plane(int c) const { return std::span<const float>(data_).subspan(c * plane_size(), plane_size()); }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

  bool operator==(const Tensor3&) const = default;

 private:
  int channels_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<float> data_;
};

// 3x3 convolution with weights laid out (out, in, ky, kx).
struct ConvLayer {
  static constexpr int kKernel = 3;

  int out_channels = 0;
  int in_channels = 0;
  std::vector<float> weights;
  std::vector<float> bias;

  ConvLayer() = default;
  ConvLayer(int out, int in)
      : out_channels(out),
        in_channels(in),
        weights(static_cast<std::size_t>(out) * in * kKernel * kKernel, 0.0f),
        bias(static_cast<std::size_t>(out), 0.0f) {}

  float& weight(int o, int i, int ky, int kx) {
    return weights[((static_cast<std::size_t>(o) * in_channels + i) * kKernel + ky) * kKernel + kx];
  }
  float weight(int o, int i, int ky, int kx) const {
    return weights[((static_cast<std::size_t>(o) * in_channels + i) * kKernel + ky) * kKernel + kx];
  }

  bool operator==(const ConvLayer&) const = default;
};

// EDSR network: weights plus the hyperparameters that fix its topology.
//
// Layer order:
//   head                      3 -> F
//   body: 2 per resblock      F -> F
//   body tail                 F -> F
//   upsampler, per stage      F -> F * r^2   (one r=k stage for k=2,3; two r=2 stages for k=4)
//   final                     F -> 3
struct SrModel {
  ScaleFactor scale{2};
  int n_feats = 64;
  int n_resblocks = 16;
  float res_scale = 1.0f;
  std::array<float, 3> rgb_mean{};
  std::vector<ConvLayer> layers;

  bool operator==(const SrModel&) const = default;
};

// Pixel-shuffle ratios of the upsampler stages for a given scale.
inline std::vector<int> upsampler_stages(ScaleFactor k) {
  if (k.value() == 4) return {2, 2};
  return {k.value()};
}

// Expected (out, in) channel pair of every layer, in file order.
inline std::vector<std::pair<int, int>> expected_layer_shapes(ScaleFactor k, int n_feats,
                                                              int n_resblocks) {
  std::vector<std::pair<int, int>> shapes;
  shapes.emplace_back(n_feats, 3);
  for (int b = 0; b < 2 * n_resblocks + 1; ++b) shapes.emplace_back(n_feats, n_feats);
  for (int r : upsampler_stages(k)) shapes.emplace_back(n_feats * r * r, n_feats);
  shapes.emplace_back(3, n_feats);
  return shapes;
}

// Throws FormatError when the model violates the EDSR shape chain or holds
// non-finite values.
inline void validate_model(const SrModel& m) {
  if (m.n_feats < 1) throw FormatError("n_feats must be >= 1");
  if (m.n_resblocks < 0) throw FormatError("n_resblocks must be >= 0");
  if (!std::isfinite(m.res_scale)) throw FormatError("res_scale is not finite");
  for (float v : m.rgb_mean) {
    if (!std::isfinite(v)) throw FormatError("rgb_mean is not finite");
  }
  const auto shapes = expected_layer_shapes(m.scale, m.n_feats, m.n_resblocks);
  if (m.layers.size() != shapes.size()) {
    throw FormatError("expected " + std::to_string(shapes.size()) + " layers, model has " +
                      std::to_string(m.layers.size()));
  }
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    const ConvLayer& layer = m.layers[l];
    if (layer.out_channels != shapes[l].first || layer.in_channels != shapes[l].second) {
      throw FormatError("layer " + std::to_string(l) + " is " +
                        std::to_string(layer.out_channels) + "x" +
                        std::to_string(layer.in_channels) + ", expected " +
                        std::to_string(shapes[l].first) + "x" +
                        std::to_string(shapes[l].second));
    }
    if (layer.weights.size() != static_cast<std::size_t>(layer.out_channels) *
                                    layer.in_channels * 9 ||
        layer.bias.size() != static_cast<std::size_t>(layer.out_channels)) {
      throw FormatError("layer " + std::to_string(l) + " has inconsistent tensor sizes");
    }
    for (float v : layer.weights) {
      if (!std::isfinite(v)) throw FormatError("non-finite weight in layer " + std::to_string(l));
    }
    for (float v : layer.bias) {
      if (!std::isfinite(v)) throw FormatError("non-finite bias in layer " + std::to_string(l));
    }
  }
}

// All-zero model of the right shape; handy as a starting point for tests
// and tooling.
inline SrModel make_zero_model(ScaleFactor k, int n_feats, int n_resblocks,
                               float res_scale, std::array<float, 3> rgb_mean) {
  SrModel m;
  m.scale = k;
  m.n_feats = n_feats;
  m.n_resblocks = n_resblocks;
  m.res_scale = res_scale;
  m.rgb_mean = rgb_mean;
  for (auto [out, in] : expected_layer_shapes(k, n_feats, n_resblocks)) {
    m.layers.emplace_back(out, in);
  }
  return m;
}

}  // namespace srattack
