#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "srattack/error.hpp"
#include "srattack/image.hpp"
#include "srattack/parallel.hpp"
#include "srattack/sr_model.hpp"

namespace srattack {

// 3x3 convolution, stride 1, zero padding 1.
//
// Each output plane is accumulated in double over (in_channel, ky, kx) in that
// fixed order, so the result does not depend on `jobs`. Output channels are
// the unit of parallel work.
inline Tensor3 conv2d(const Tensor3& x, const ConvLayer& layer, int jobs = 1) {
  if (x.channels() != layer.in_channels) {
    throw PreconditionError("conv2d: input has " + std::to_string(x.channels()) +
                            " channels, layer expects " +
                            std::to_string(layer.in_channels));
  }
  const int H = x.height();
  const int W = x.width();
  Tensor3 out(layer.out_channels, H, W);

  parallel_for(static_cast<std::size_t>(layer.out_channels), jobs, [&](std::size_t oc) {
    const int o = static_cast<int>(oc);
    std::vector<double> acc(x.plane_size(), static_cast<double>(layer.bias[o]));
    for (int i = 0; i < layer.in_channels; ++i) {
      const float* in = x.plane(i).data();
      for (int ky = 0; ky < 3; ++ky) {
        const int y0 = std::max(0, 1 - ky);
        const int y1 = std::min(H, H + 1 - ky);
        for (int kx = 0; kx < 3; ++kx) {
          const double w = layer.weight(o, i, ky, kx);
          if (w == 0.0) continue;
          const int x0 = std::max(0, 1 - kx);
          const int x1 = std::min(W, W + 1 - kx);
          for (int y = y0; y < y1; ++y) {
            double* dst = acc.data() + static_cast<std::size_t>(y) * W;
            const float* src = in + static_cast<std::size_t>(y + ky - 1) * W + (kx - 1);
            for (int xx = x0; xx < x1; ++xx) dst[xx] += w * src[xx];
          }
        }
      }
    }
    float* dst = out.plane(o).data();
    for (std::size_t p = 0; p < acc.size(); ++p) dst[p] = static_cast<float>(acc[p]);
  });
  return out;
}

inline Tensor3 relu(Tensor3 x) {
  for (float& v : x.data()) v = std::max(v, 0.0f);
  return x;
}

// x + res_scale * conv2(relu(conv1(x)))
inline Tensor3 residual_block(const Tensor3& x, const ConvLayer& conv1, const ConvLayer& conv2,
                              float res_scale, int jobs = 1) {
  if (conv1.in_channels != x.channels() || conv2.in_channels != conv1.out_channels ||
      conv2.out_channels != x.channels()) {
    throw PreconditionError("residual_block: channel chain mismatch");
  }
  Tensor3 branch = conv2d(relu(conv2d(x, conv1, jobs)), conv2, jobs);
  auto b = branch.data();
  auto in = x.data();
  for (std::size_t p = 0; p < b.size(); ++p) b[p] = in[p] + res_scale * b[p];
  return branch;
}

// (C*r*r, H, W) -> (C, H*r, W*r) with out(c, y*r+dy, x*r+dx) = in(c*r*r + dy*r + dx, y, x).
inline Tensor3 pixel_shuffle(const Tensor3& x, int r) {
  detail::require(r >= 1, "pixel_shuffle: ratio must be >= 1");
  if (x.channels() % (r * r) != 0) {
    throw PreconditionError("pixel_shuffle: " + std::to_string(x.channels()) +
                            " channels not divisible by r^2 = " + std::to_string(r * r));
  }
  const int C = x.channels() / (r * r);
  Tensor3 out(C, x.height() * r, x.width() * r);
  for (int c = 0; c < C; ++c) {
    for (int dy = 0; dy < r; ++dy) {
      for (int dx = 0; dx < r; ++dx) {
        const int src_c = c * r * r + dy * r + dx;
        for (int y = 0; y < x.height(); ++y) {
          for (int xx = 0; xx < x.width(); ++xx) {
            out.at(c, y * r + dy, xx * r + dx) = x.at(src_c, y, xx);
          }
        }
      }
    }
  }
  return out;
}

// Inverse of pixel_shuffle.
inline Tensor3 pixel_unshuffle(const Tensor3& x, int r) {
  detail::require(r >= 1, "pixel_unshuffle: ratio must be >= 1");
  if (x.height() % r != 0 || x.width() % r != 0) {
    throw PreconditionError("pixel_unshuffle: spatial dims not divisible by r");
  }
  const int H = x.height() / r;
  const int W = x.width() / r;
  Tensor3 out(x.channels() * r * r, H, W);
  for (int c = 0; c < x.channels(); ++c) {
    for (int dy = 0; dy < r; ++dy) {
      for (int dx = 0; dx < r; ++dx) {
        for (int y = 0; y < H; ++y) {
          for (int xx = 0; xx < W; ++xx) {
            out.at(c * r * r + dy * r + dx, y, xx) = x.at(c, y * r + dy, xx * r + dx);
          }
        }
      }
    }
  }
  return out;
}

// Runs the EDSR network on an RGB image. The output is not clamped; callers
// quantize once at the end of the pipeline.
inline Image forward(const SrModel& model, const Image& img, int jobs = 1) {
  validate_model(model);
  const int H = img.height();
  const int W = img.width();

  Tensor3 x(3, H, W);
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < H; ++y) {
      for (int xx = 0; xx < W; ++xx) {
        x.at(c, y, xx) = static_cast<float>(img.at(y, xx, c) - model.rgb_mean[c]);
      }
    }
  }

  std::size_t l = 0;
  const Tensor3 head = conv2d(x, model.layers[l++], jobs);
  Tensor3 body = head;
  for (int b = 0; b < model.n_resblocks; ++b) {
    body = residual_block(body, model.layers[l], model.layers[l + 1], model.res_scale, jobs);
    l += 2;
  }
  body = conv2d(body, model.layers[l++], jobs);
  {
    auto dst = body.data();
    auto skip = head.data();
    for (std::size_t p = 0; p < dst.size(); ++p) dst[p] += skip[p];
  }
  for (int r : upsampler_stages(model.scale)) {
    body = pixel_shuffle(conv2d(body, model.layers[l++], jobs), r);
  }
  const Tensor3 rgb = conv2d(body, model.layers[l++], jobs);

  const int k = model.scale.value();
  Image out(W * k, H * k);
  for (int y = 0; y < H * k; ++y) {
    for (int xx = 0; xx < W * k; ++xx) {
      for (int c = 0; c < 3; ++c) {
        out.at(y, xx, c) = static_cast<double>(rgb.at(c, y, xx)) + model.rgb_mean[c];
      }
    }
  }
  return out;
}

}  // namespace srattack
