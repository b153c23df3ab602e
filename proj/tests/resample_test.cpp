#include <gtest/gtest.h>

#include <random>
#include <tuple>

#include "oracles.hpp"
#include "srattack/resample.hpp"
#include "test_support.hpp"

using namespace srattack;

namespace {

Image horizontal_ramp(int w, int h) {
  Image img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = 255.0 * x / (w - 1);
  return img;
}

}  // namespace

TEST(ScaleFactor, OnlyTwoToFour) {
  EXPECT_EQ(ScaleFactor(3).value(), 3);
  EXPECT_THROW(ScaleFactor(1), ConfigError);
  EXPECT_THROW(ScaleFactor(5), ConfigError);
}

TEST(Pad, AlreadyMultipleIsUntouched) {
  std::mt19937_64 rng(1);
  const Image img = testing_support::random_image(rng, 32, 32);
  const auto [out, spec] = pad_to_multiple(img, ScaleFactor(2));
  EXPECT_EQ(spec, (PadSpec{0, 0}));
  EXPECT_EQ(out, img);
}

TEST(Pad, ReflectsLastRowAndColumn) {
  std::mt19937_64 rng(2);
  const Image img = testing_support::random_image(rng, 33, 31);
  const auto [out, spec] = pad_to_multiple(img, ScaleFactor(2));
  EXPECT_EQ(out.width(), 34);
  EXPECT_EQ(out.height(), 32);
  EXPECT_EQ(spec, (PadSpec{1, 1}));
  for (int y = 0; y < 31; ++y)
    for (int c = 0; c < 3; ++c) EXPECT_EQ(out.at(y, 33, c), img.at(y, 32, c));
  for (int x = 0; x < 33; ++x)
    for (int c = 0; c < 3; ++c) EXPECT_EQ(out.at(31, x, c), img.at(30, x, c));
  EXPECT_EQ(crop(out, {0, 0, 33, 31}), img);
}

TEST(Pad, WiderPadKeepsReflecting) {
  Image img(5, 1);
  for (int x = 0; x < 5; ++x)
    for (int c = 0; c < 3; ++c) img.at(0, x, c) = x;
  const auto [out, spec] = pad_to_multiple(img, ScaleFactor(4));
  EXPECT_EQ(spec, (PadSpec{3, 3}));
  const double expect[8] = {0, 1, 2, 3, 4, 4, 3, 2};
  for (int x = 0; x < 8; ++x) EXPECT_EQ(out.at(0, x, 0), expect[x]);
  for (int y = 0; y < 4; ++y) EXPECT_EQ(out.at(y, 2, 1), 2.0);
}

TEST(Pad, SinglePixel) {
  const Image img(1, 1, 42.0);
  const auto [out, spec] = pad_to_multiple(img, ScaleFactor(2));
  EXPECT_EQ(out, Image(2, 2, 42.0));
  EXPECT_EQ(spec, (PadSpec{1, 1}));
}

TEST(Unpad, InvertsPadding) {
  std::mt19937_64 rng(3);
  for (int k = 2; k <= 4; ++k) {
    for (int w = 1; w < 12; w += 3) {
      const Image img = testing_support::random_image(rng, w, 13 - w);
      const auto [out, spec] = pad_to_multiple(img, ScaleFactor(k));
      EXPECT_EQ(out.width() % k, 0);
      EXPECT_EQ(out.height() % k, 0);
      EXPECT_EQ(unpad(out, spec), img);
    }
  }
}

TEST(Unpad, RejectsInconsistentSpec) {
  EXPECT_THROW(unpad(Image(4, 4), {4, 0}), PreconditionError);
  EXPECT_THROW(unpad(Image(4, 4), {-1, 0}), PreconditionError);
}

TEST(CubicKernel, InterpolatingAndNormalised) {
  EXPECT_EQ(cubic_kernel(0.0), 1.0);
  EXPECT_EQ(cubic_kernel(1.0), 0.0);
  EXPECT_EQ(cubic_kernel(-2.0), 0.0);
  EXPECT_EQ(cubic_kernel(3.0), 0.0);
  for (double t = -2.5; t <= 2.5; t += 0.125) EXPECT_NEAR(cubic_kernel(t), oracle::keys(t), 1e-15);
  for (double f = 0.0; f < 1.0; f += 0.1) {
    double s = 0.0;
    for (int j = -2; j <= 2; ++j) s += cubic_kernel(j - f);
    EXPECT_NEAR(s, 1.0, 1e-15);
  }
}

TEST(CubicTaps, WeightsSumToOne) {
  for (auto [in, out, stretch] : {std::tuple{32, 16, 2.0}, {33, 11, 3.0}, {7, 28, 1.0}, {1, 4, 1.0}}) {
    const ResampleTaps taps = make_cubic_taps(in, out, stretch);
    ASSERT_EQ(taps.out_len(), out);
    for (int o = 0; o < out; ++o) {
      double s = 0.0;
      for (int t = taps.offsets[o]; t < taps.offsets[o + 1]; ++t) {
        s += taps.taps[t].weight;
        EXPECT_GE(taps.taps[t].src, 0);
        EXPECT_LT(taps.taps[t].src, in);
      }
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
  }
}

TEST(Downscale, ConstantStaysExact) {
  for (int k = 2; k <= 4; ++k) {
    const Image img(12 * k, 5 * k, 7.0);
    const Image out = downscale(img, ScaleFactor(k));
    EXPECT_EQ(out, Image(12, 5, 7.0)) << "k=" << k;
  }
}

TEST(Downscale, RampInteriorIsLinear) {
  const Image out = downscale(horizontal_ramp(32, 4), ScaleFactor(2));
  ASSERT_EQ(out.width(), 16);
  ASSERT_EQ(out.height(), 2);
  // Kernel radius is 4 source pixels; keep clear of clamped edges.
  for (int o = 2; o < 14; ++o) {
    const double u = (o + 0.5) * 2 - 0.5;
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(out.at(1, o, c), 255.0 * u / 31.0, 1e-3);
  }
}

TEST(Downscale, RequiresDivisibleDims) {
  EXPECT_THROW(downscale(Image(33, 32), ScaleFactor(2)), PreconditionError);
  EXPECT_THROW(downscale(Image(9, 10), ScaleFactor(3)), PreconditionError);
}

TEST(Downscale, MatchesFullTwoDimensionalSum) {
  std::mt19937_64 rng(4);
  for (int k = 2; k <= 4; ++k) {
    const Image img = testing_support::random_image(rng, 8 * k, 4 * k);
    const Image got = downscale(img, ScaleFactor(k));
    const Image want =
        oracle::resample_2d(img, img.width() / k, img.height() / k, 1.0 / k, static_cast<double>(k));
    for (std::size_t i = 0; i < got.samples().size(); ++i)
      ASSERT_NEAR(got.samples()[i], want.samples()[i], 1e-9);
  }
}

TEST(Upscale, MatchesFullTwoDimensionalSum) {
  std::mt19937_64 rng(5);
  for (int k = 2; k <= 4; ++k) {
    const Image img = testing_support::random_image(rng, 8, 6);
    const Image got = upscale_bicubic(img, ScaleFactor(k));
    const Image want = oracle::resample_2d(img, 8 * k, 6 * k, k, 1.0);
    for (std::size_t i = 0; i < got.samples().size(); ++i)
      ASSERT_NEAR(got.samples()[i], want.samples()[i], 1e-9);
  }
}

TEST(Upscale, ConstantAndSinglePixel) {
  EXPECT_EQ(upscale_bicubic(Image(5, 3, 99.0), ScaleFactor(3)), Image(15, 9, 99.0));
  EXPECT_EQ(upscale_bicubic(Image(1, 1, 13.0), ScaleFactor(2)), Image(2, 2, 13.0));
}

TEST(Resample, DownThenUpRampIsCloseInInterior) {
  const Image ramp = horizontal_ramp(64, 8);
  const Image back = upscale_bicubic(downscale(ramp, ScaleFactor(2)), ScaleFactor(2));
  ASSERT_EQ(back.width(), 64);
  for (int x = 8; x < 56; ++x) EXPECT_NEAR(back.at(4, x, 0), ramp.at(4, x, 0), 1e-2);
}

TEST(Resample, DownOfUpConstantIsIdentity) {
  const Image c(6, 6, 201.0);
  for (int k = 2; k <= 4; ++k)
    EXPECT_EQ(downscale(upscale_bicubic(c, ScaleFactor(k)), ScaleFactor(k)), c);
}
