#include <gtest/gtest.h>

#include <random>

#include "srattack/attack.hpp"
#include "srattack/image_io.hpp"
#include "test_support.hpp"

using namespace srattack;
using testing_support::TempDir;

namespace {

AttackConfig bicubic_config(int k, const std::filesystem::path& out = {}) {
  AttackConfig cfg;
  cfg.k = ScaleFactor(k);
  cfg.backend = Backend::bicubic;
  cfg.output_dir = out;
  return cfg;
}

Image ramp_face(int w, int h) {
  Image img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = 20.0 + 1.5 * x + 0.75 * y + 10.0 * c;
  return img;
}

ManifestEntry entry(const std::string& path, std::optional<BoundingBox> box) {
  ManifestEntry e;
  e.path = path;
  e.video_id = path.substr(0, 3);
  e.box = box;
  return e;
}

}  // namespace

TEST(AttackFace, OnlyTheBoxChanges) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) {
    const int w = std::uniform_int_distribution<int>(8, 64)(rng);
    const int h = std::uniform_int_distribution<int>(8, 64)(rng);
    const Image frame = testing_support::random_image(rng, w, h, true);
    const int bx = std::uniform_int_distribution<int>(0, w - 2)(rng);
    const int by = std::uniform_int_distribution<int>(0, h - 2)(rng);
    const BoundingBox box{bx, by, std::uniform_int_distribution<int>(1, w - bx)(rng),
                          std::uniform_int_distribution<int>(1, h - by)(rng)};
    const int k = 2 + t % 3;
    const Image out = attack_face(frame, box, bicubic_config(k));
    ASSERT_EQ(out.width(), w);
    ASSERT_EQ(out.height(), h);
    EXPECT_TRUE(is_quantized(out));
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        if (x >= box.x && x < box.x + box.w && y >= box.y && y < box.y + box.h) continue;
        for (int c = 0; c < 3; ++c) ASSERT_EQ(out.at(y, x, c), frame.at(y, x, c));
      }
  }
}

TEST(AttackFace, ConstantFrameIsUnchanged) {
  const Image frame(40, 30, 77.0);
  for (int k = 2; k <= 4; ++k) EXPECT_EQ(attack_face(frame, {5, 3, 17, 19}, bicubic_config(k)), frame);
}

TEST(AttackFace, ZeroWeightEdsrFillsBoxWithMean) {
  const SrModel m = make_zero_model(ScaleFactor(2), 4, 1, 1.0f, {114.4f, 111.5f, 103.0f});
  AttackConfig cfg = bicubic_config(2);
  cfg.backend = Backend::edsr;
  std::mt19937_64 rng(2);
  const Image frame = testing_support::random_image(rng, 20, 20, true);
  const Image out = attack_face(frame, {4, 4, 9, 8}, cfg, &m);
  EXPECT_EQ(out.at(5, 5, 0), 114.0);
  EXPECT_EQ(out.at(5, 5, 1), 112.0);  // 111.5 rounds half away from zero
  EXPECT_EQ(out.at(5, 5, 2), 103.0);
  EXPECT_EQ(out.at(0, 0, 0), frame.at(0, 0, 0));
}

TEST(AttackFace, RampFaceRoundTripsCloselyInInterior) {
  const Image frame = ramp_face(96, 96);
  const BoundingBox box{16, 16, 64, 64};
  const Image face = crop(frame, box);
  const auto [padded, pad] = pad_to_multiple(face, ScaleFactor(2));
  const Image restored = unpad(upscale_bicubic(downscale(padded, ScaleFactor(2)), ScaleFactor(2)), pad);
  for (int y = 8; y < 56; ++y)
    for (int x = 8; x < 56; ++x)
      for (int c = 0; c < 3; ++c) ASSERT_NEAR(restored.at(y, x, c), face.at(y, x, c), 1e-2);
  const Image out = attack_face(frame, box, bicubic_config(2));
  EXPECT_GE(ssim(crop(out, box), face), 0.99);
}

TEST(AttackFace, BackendChecks) {
  const Image frame(8, 8, 0.0);
  AttackConfig cfg = bicubic_config(2);
  cfg.backend = Backend::edsr;
  EXPECT_THROW(attack_face(frame, {0, 0, 4, 4}, cfg), ConfigError);
  const SrModel m3 = make_zero_model(ScaleFactor(3), 2, 0, 1.0f, {0, 0, 0});
  EXPECT_THROW(attack_face(frame, {0, 0, 4, 4}, cfg, &m3), ConfigError);
  EXPECT_THROW(attack_face(frame, {6, 6, 4, 4}, bicubic_config(2)), PreconditionError);
}

TEST(OutputPath, MirrorsTreeAsPng) {
  EXPECT_EQ(attack_output_path("Deepfakes/000_003/frame_1.jpg").generic_string(),
            "Deepfakes/000_003/frame_1.png");
  EXPECT_EQ(attack_output_path("./a/../b/x.png").generic_string(), "b/x.png");
  EXPECT_THROW(attack_output_path("../x.png"), ConfigError);
}

class AttackBatch : public ::testing::Test {
 protected:
  void SetUp() override {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 6; ++i) {
      const std::string p = "00" + std::to_string(i) + "/f.png";
      std::filesystem::create_directories(root.path() / ("00" + std::to_string(i)));
      save_image(testing_support::random_image(rng, 24, 20, true), root / p);
      entries.push_back(entry(p, i == 2 ? std::nullopt : std::optional<BoundingBox>({-2, 3, 14, 12})));
    }
  }
  TempDir root, out;
  std::vector<ManifestEntry> entries;
};

TEST_F(AttackBatch, OrderSkipsAndLocality) {
  AttackConfig cfg = bicubic_config(3, out.path());
  cfg.log_similarity = true;
  const auto recs = attack_batch(entries, cfg, root.path(), nullptr, 4);
  ASSERT_EQ(recs.size(), entries.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(recs[i].source, entries[i].path);
    if (i == 2) {
      EXPECT_EQ(recs[i].status, "skipped: no face box");
      EXPECT_FALSE(std::filesystem::exists(out / entries[i].path));
      continue;
    }
    ASSERT_TRUE(recs[i].ok());
    EXPECT_EQ(*recs[i].box, (BoundingBox{0, 3, 12, 12}));  // clamped to the frame
    const Image src = load_image(root / entries[i].path);
    const Image dst = load_image(out / recs[i].output);
    EXPECT_EQ(dst.width(), src.width());
    EXPECT_EQ(crop(dst, {12, 0, 12, 20}), crop(src, {12, 0, 12, 20}));
    EXPECT_NEAR(*recs[i].ssim, ssim(src, dst), 1e-12);
  }
  testing_support::TempDir log;
  write_attack_log(log / "log.csv", recs);
  const auto t = csv::read(log / "log.csv", attack_log_header());
  EXPECT_EQ(t.rows.size(), entries.size());
}

TEST_F(AttackBatch, JobsGiveIdenticalFiles) {
  TempDir out2;
  attack_batch(entries, bicubic_config(2, out.path()), root.path(), nullptr, 1);
  attack_batch(entries, bicubic_config(2, out2.path()), root.path(), nullptr, 6);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (i == 2) continue;
    EXPECT_EQ(detail::read_file_bytes(out / entries[i].path), detail::read_file_bytes(out2 / entries[i].path));
  }
}

TEST_F(AttackBatch, OverwriteDeniedBeforeAnyWork) {
  AttackConfig cfg = bicubic_config(2, out.path());
  attack_batch(entries, cfg, root.path());
  const auto before = std::filesystem::last_write_time(out / entries[0].path);
  EXPECT_THROW(attack_batch(entries, cfg, root.path()), IoError);
  EXPECT_EQ(std::filesystem::last_write_time(out / entries[0].path), before);
  cfg.overwrite = OverwritePolicy::allow;
  EXPECT_NO_THROW(attack_batch(entries, cfg, root.path()));
}

TEST_F(AttackBatch, DuplicateTargetsRejected) {
  entries.push_back(entries[0]);
  entries.back().path = "000/f.jpg";
  EXPECT_THROW(attack_batch(entries, bicubic_config(2, out.path()), root.path()), ConfigError);
}

TEST_F(AttackBatch, MissingSourceIsIoError) {
  entries[0].path = "000/nope.png";
  EXPECT_THROW(attack_batch(entries, bicubic_config(2, out.path()), root.path(), nullptr, 3), IoError);
}
