#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "srattack/error.hpp"
#include "srattack/image.hpp"

namespace srattack {

// Integer magnification factor of the attack. Only factors with published
// EDSR checkpoints are accepted.
class ScaleFactor {
 public:
  constexpr ScaleFactor() = default;
  explicit ScaleFactor(int k) : k_(k) {
    if (k < 2 || k > 4) {
      throw ConfigError("scale factor must be 2, 3 or 4, got " + std::to_string(k));
    }
  }
  constexpr int value() const { return k_; }
  constexpr bool operator==(const ScaleFactor&) const = default;

 private:
  int k_ = 2;
};

// Rows/columns appended at the bottom/right by pad_to_multiple.
struct PadSpec {
  int right = 0;
  int bottom = 0;

  bool operator==(const PadSpec&) const = default;
};

namespace detail {

// Half-sample symmetric reflection about the image edge: index n maps to
// n-1, n+1 to n-2, and so on.
inline int reflect_index(int i, int n) {
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

}  // namespace detail

inline std::pair<Image, PadSpec> pad_to_multiple(const Image& img, ScaleFactor k) {
  const int kv = k.value();
  const int w = (img.width() + kv - 1) / kv * kv;
  const int h = (img.height() + kv - 1) / kv * kv;
  const PadSpec spec{w - img.width(), h - img.height()};
  if (spec.right == 0 && spec.bottom == 0) return {img, spec};
  Image out(w, h);
  for (int y = 0; y < h; ++y) {
    const int sy = detail::reflect_index(y, img.height());
    for (int x = 0; x < w; ++x) {
      const int sx = detail::reflect_index(x, img.width());
      for (int c = 0; c < Image::kChannels; ++c) out.at(y, x, c) = img.at(sy, sx, c);
    }
  }
  return {std::move(out), spec};
}

inline Image unpad(const Image& img, const PadSpec& spec) {
  if (spec.right < 0 || spec.bottom < 0 || spec.right >= img.width() ||
      spec.bottom >= img.height()) {
    throw PreconditionError("pad spec (" + std::to_string(spec.right) + "," +
                            std::to_string(spec.bottom) +
                            ") inconsistent with a " + std::to_string(img.width()) +
                            "x" + std::to_string(img.height()) + " image");
  }
  if (spec.right == 0 && spec.bottom == 0) return img;
  return crop(img, {0, 0, img.width() - spec.right, img.height() - spec.bottom});
}

// Keys cubic convolution kernel, a = -0.5.
inline double cubic_kernel(double t) {
  constexpr double a = -0.5;
  t = std::abs(t);
  if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
  if (t < 2.0) return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
  return 0.0;
}

// Per-output-sample tap list for a 1-D resampling pass. Source indices are
// already edge-clamped; weights sum to 1.
struct ResampleTaps {
  struct Tap {
    int src;
    double weight;
  };
  std::vector<int> offsets;  // size out_len + 1, index into taps
  std::vector<Tap> taps;

  int out_len() const { return static_cast<int>(offsets.size()) - 1; }
};

// `support_scale` stretches the kernel (antialiasing when minifying). The
// output sample o is centred on source coordinate (o + 0.5) * in/out - 0.5.
inline ResampleTaps make_cubic_taps(int in_len, int out_len, double support_scale) {
  ResampleTaps taps;
  taps.offsets.reserve(static_cast<std::size_t>(out_len) + 1);
  const double radius = 2.0 * support_scale;
  for (int o = 0; o < out_len; ++o) {
    taps.offsets.push_back(static_cast<int>(taps.taps.size()));
    const double center = (o + 0.5) * in_len / out_len - 0.5;
    const int first = static_cast<int>(std::ceil(center - radius));
    const int last = static_cast<int>(std::floor(center + radius));
    const std::size_t begin = taps.taps.size();
    double sum = 0.0;
    for (int j = first; j <= last; ++j) {
      const double wgt = cubic_kernel((j - center) / support_scale);
      if (wgt == 0.0) continue;
      taps.taps.push_back({std::clamp(j, 0, in_len - 1), wgt});
      sum += wgt;
    }
    double check = 0.0;
    for (std::size_t t = begin; t < taps.taps.size(); ++t) {
      taps.taps[t].weight /= sum;
      check += taps.taps[t].weight;
    }
    assert(std::abs(check - 1.0) < 1e-12);
    (void)check;
  }
  taps.offsets.push_back(static_cast<int>(taps.taps.size()));
  return taps;
}

// Separable resample: horizontal pass then vertical pass. Each output is
// formed as ref + sum(w * (v - ref)) with ref the first tap's sample; with
// weights summing to 1 this equals sum(w * v), and constant regions come out
// exactly constant.
inline Image resample_separable(const Image& img, const ResampleTaps& xtaps,
                                const ResampleTaps& ytaps) {
  const int ow = xtaps.out_len();
  const int oh = ytaps.out_len();
  const int ih = img.height();
  constexpr int C = Image::kChannels;

  Image rows(ow, ih);
  for (int y = 0; y < ih; ++y) {
    for (int x = 0; x < ow; ++x) {
      const int ref = xtaps.taps[xtaps.offsets[x]].src;
      double acc[C] = {0.0, 0.0, 0.0};
      for (int t = xtaps.offsets[x]; t < xtaps.offsets[x + 1]; ++t) {
        const auto& tap = xtaps.taps[t];
        for (int c = 0; c < C; ++c) acc[c] += tap.weight * (img.at(y, tap.src, c) - img.at(y, ref, c));
      }
      for (int c = 0; c < C; ++c) rows.at(y, x, c) = img.at(y, ref, c) + acc[c];
    }
  }

  Image out(ow, oh);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      const int ref = ytaps.taps[ytaps.offsets[y]].src;
      double acc[C] = {0.0, 0.0, 0.0};
      for (int t = ytaps.offsets[y]; t < ytaps.offsets[y + 1]; ++t) {
        const auto& tap = ytaps.taps[t];
        for (int c = 0; c < C; ++c) acc[c] += tap.weight * (rows.at(tap.src, x, c) - rows.at(ref, x, c));
      }
      for (int c = 0; c < C; ++c) out.at(y, x, c) = rows.at(ref, x, c) + acc[c];
    }
  }
  return out;
}

// Antialiased cubic minification by 1/k: the kernel is stretched by k.
inline Image downscale(const Image& img, ScaleFactor k) {
  const int kv = k.value();
  if (img.width() % kv != 0 || img.height() % kv != 0) {
    throw PreconditionError("downscale needs dims divisible by " + std::to_string(kv) +
                            ", got " + std::to_string(img.width()) + "x" +
                            std::to_string(img.height()));
  }
  return resample_separable(img, make_cubic_taps(img.width(), img.width() / kv, kv),
                            make_cubic_taps(img.height(), img.height() / kv, kv));
}

// Plain bicubic magnification by k. Output is not clamped.
inline Image upscale_bicubic(const Image& img, ScaleFactor k) {
  const int kv = k.value();
  return resample_separable(img, make_cubic_taps(img.width(), img.width() * kv, 1.0),
                            make_cubic_taps(img.height(), img.height() * kv, 1.0));
}

}  // namespace srattack
