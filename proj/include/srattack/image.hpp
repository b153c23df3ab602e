#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "srattack/error.hpp"

namespace srattack {

// RGB raster with samples on a nominal [0,255] scale, laid out row-major as
// (y, x, channel). Samples are kept in double so that resampling and metric
// oracles can be compared at 1e-9.
class Image {
 public:
  static constexpr int kChannels = 3;

  Image() = default;

  Image(int width, int height, double fill = 0.0)
      : width_(width), height_(height) {
    detail::require(width >= 1 && height >= 1,
                    "image dimensions must be >= 1, got " +
                        std::to_string(width) + "x" + std::to_string(height));
    samples_.assign(sample_count(width, height), fill);
  }

  Image(int width, int height, std::vector<double> samples)
      : width_(width), height_(height), samples_(std::move(samples)) {
    detail::require(width >= 1 && height >= 1, "image dimensions must be >= 1");
    detail::require(samples_.size() == sample_count(width, height),
                    "sample count does not match width*height*3");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return samples_.empty(); }

  double& at(int y, int x, int c) { return samples_[index(y, x, c)]; }
  double at(int y, int x, int c) const { return samples_[index(y, x, c)]; }

  std::span<double> samples() { return samples_; }
  std::span<const double> samples() const { return samples_; }

  bool operator==(const Image&) const = default;

  static std::size_t sample_count(int width, int height) {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
           kChannels;
  }

 private:
  std::size_t index(int y, int x, int c) const {
    assert(y >= 0 && y < height_ && x >= 0 && x < width_ && c >= 0 &&
           c < kChannels);
    return (static_cast<std::size_t>(y) * width_ + x) * kChannels + c;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> samples_;
};

// Face region in frame pixel coordinates.
struct BoundingBox {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  bool operator==(const BoundingBox&) const = default;
};

inline bool box_within(const BoundingBox& box, int width, int height) {
  return box.w >= 1 && box.h >= 1 && box.x >= 0 && box.y >= 0 &&
         static_cast<long long>(box.x) + box.w <= width &&
         static_cast<long long>(box.y) + box.h <= height;
}

inline std::string to_string(const BoundingBox& b) {
  return "(" + std::to_string(b.x) + "," + std::to_string(b.y) + "," +
         std::to_string(b.w) + "," + std::to_string(b.h) + ")";
}

// Intersects the box with the frame. Throws when nothing of the box remains.
inline BoundingBox clamp_box(const BoundingBox& box, int width, int height) {
  const long long x0 = std::max<long long>(box.x, 0);
  const long long y0 = std::max<long long>(box.y, 0);
  const long long x1 = std::min<long long>(static_cast<long long>(box.x) + box.w, width);
  const long long y1 = std::min<long long>(static_cast<long long>(box.y) + box.h, height);
  if (x1 - x0 < 1 || y1 - y0 < 1) {
    throw PreconditionError("box " + to_string(box) + " does not intersect a " +
                            std::to_string(width) + "x" +
                            std::to_string(height) + " frame");
  }
  return {static_cast<int>(x0), static_cast<int>(y0),
          static_cast<int>(x1 - x0), static_cast<int>(y1 - y0)};
}

// Grows the box by `margin` (fraction of its size) on every side, then clamps.
inline BoundingBox expand_box(const BoundingBox& box, double margin, int width,
                              int height) {
  detail::require(margin >= 0.0 && std::isfinite(margin),
                  "box margin must be a finite non-negative fraction");
  if (margin == 0.0) return clamp_box(box, width, height);
  const int dx = static_cast<int>(std::lround(box.w * margin));
  const int dy = static_cast<int>(std::lround(box.h * margin));
  return clamp_box({box.x - dx, box.y - dy, box.w + 2 * dx, box.h + 2 * dy},
                   width, height);
}

inline Image crop(const Image& img, const BoundingBox& box) {
  if (!box_within(box, img.width(), img.height())) {
    throw PreconditionError("crop box " + to_string(box) +
                            " outside image bounds " +
                            std::to_string(img.width()) + "x" +
                            std::to_string(img.height()));
  }
  Image out(box.w, box.h);
  for (int y = 0; y < box.h; ++y) {
    const auto src = img.samples().subspan(
        (static_cast<std::size_t>(box.y + y) * img.width() + box.x) *
            Image::kChannels,
        static_cast<std::size_t>(box.w) * Image::kChannels);
    std::copy(src.begin(), src.end(),
              out.samples().begin() +
                  static_cast<std::ptrdiff_t>(y) * box.w * Image::kChannels);
  }
  return out;
}

inline Image paste(const Image& dst, const Image& patch, const BoundingBox& box) {
  if (patch.width() != box.w || patch.height() != box.h) {
    throw PreconditionError("patch is " + std::to_string(patch.width()) + "x" +
                            std::to_string(patch.height()) + " but box is " +
                            to_string(box));
  }
  if (!box_within(box, dst.width(), dst.height())) {
    throw PreconditionError("paste box " + to_string(box) +
                            " outside image bounds");
  }
  Image out = dst;
  for (int y = 0; y < box.h; ++y) {
    const auto src = patch.samples().subspan(
        static_cast<std::size_t>(y) * box.w * Image::kChannels,
        static_cast<std::size_t>(box.w) * Image::kChannels);
    std::copy(src.begin(), src.end(),
              out.samples().begin() +
                  static_cast<std::ptrdiff_t>(
                      (static_cast<std::size_t>(box.y + y) * dst.width() +
                       box.x) *
                      Image::kChannels));
  }
  return out;
}

// Clamp to [0,255], then round half away from zero.
inline double quantize_sample(double v) {
  assert(!std::isnan(v));
  return std::round(std::clamp(v, 0.0, 255.0));
}

inline Image quantize(const Image& img) {
  Image out = img;
  for (double& v : out.samples()) v = quantize_sample(v);
  return out;
}

inline bool is_quantized(const Image& img) {
  return std::all_of(img.samples().begin(), img.samples().end(), [](double v) {
    return v >= 0.0 && v <= 255.0 && v == std::floor(v);
  });
}

}  // namespace srattack
