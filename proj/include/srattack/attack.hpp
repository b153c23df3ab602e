#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "srattack/csv.hpp"
#include "srattack/error.hpp"
#include "srattack/image.hpp"
#include "srattack/image_io.hpp"
#include "srattack/manifest.hpp"
#include "srattack/metrics.hpp"
#include "srattack/parallel.hpp"
#include "srattack/resample.hpp"
#include "srattack/sr_engine.hpp"
#include "srattack/sr_model.hpp"

namespace srattack {

enum class Backend { bicubic, edsr };

inline std::string_view to_string(Backend b) { return b == Backend::edsr ? "edsr" : "bicubic"; }

inline std::optional<Backend> parse_backend(std::string_view s) {
  if (s == "edsr") return Backend::edsr;
  if (s == "bicubic") return Backend::bicubic;
  return std::nullopt;
}

enum class OverwritePolicy { deny, allow };

struct AttackConfig {
  ScaleFactor k{2};
  Backend backend = Backend::edsr;
  std::filesystem::path weights;  // SRW1 file, edsr backend only
  std::filesystem::path output_dir;
  OverwritePolicy overwrite = OverwritePolicy::deny;
  double margin = 0.0;  // box growth per side, as a fraction of the box size
  bool log_similarity = false;
};

struct AttackRecord {
  std::string source;
  std::string output;  // relative to the output directory; empty when skipped
  std::optional<BoundingBox> box;
  Backend backend = Backend::edsr;
  int k = 2;
  std::optional<double> ssim;
  std::optional<double> psnr;
  std::string status;  // "ok" or "skipped: <reason>"

  bool ok() const { return status == "ok"; }
};

namespace detail {

inline void check_backend(const AttackConfig& cfg, const SrModel* model) {
  if (cfg.backend == Backend::edsr) {
    if (model == nullptr) throw ConfigError("edsr backend requires a loaded SR model");
    if (model->scale != cfg.k) {
      throw ConfigError("weight file is x" + std::to_string(model->scale.value()) +
                        " but the attack uses k=" + std::to_string(cfg.k.value()));
    }
  } else if (model != nullptr) {
    throw ConfigError("bicubic backend does not take an SR model");
  }
}

}  // namespace detail

// Shrinks the face by 1/k, restores it with the SR backend and pastes it back.
// Only the box region changes; it is quantized, everything else is copied.
inline Image attack_face(const Image& frame, const BoundingBox& box, const AttackConfig& cfg,
                         const SrModel* model = nullptr, int jobs = 1) {
  detail::check_backend(cfg, model);
  if (!box_within(box, frame.width(), frame.height())) {
    throw PreconditionError("face box " + to_string(box) + " outside the " +
                            std::to_string(frame.width()) + "x" + std::to_string(frame.height()) +
                            " frame");
  }
  const auto [padded, pad] = pad_to_multiple(crop(frame, box), cfg.k);
  const Image small = downscale(padded, cfg.k);
  const Image restored = cfg.backend == Backend::edsr ? forward(*model, small, jobs)
                                                      : upscale_bicubic(small, cfg.k);
  return paste(frame, quantize(unpad(restored, pad)), box);
}

// Output location mirroring the source tree, always PNG.
inline std::filesystem::path attack_output_path(const std::string& source) {
  std::filesystem::path rel = std::filesystem::path(source).lexically_normal();
  if (rel.is_absolute()) rel = rel.relative_path();
  if (!rel.empty() && *rel.begin() == "..") {
    throw ConfigError("source path escapes the data root: " + source);
  }
  rel.replace_extension(".png");
  return rel;
}

// Attacks every entry of the manifest. Sources are resolved against `root`.
// Records come back in manifest order whatever `jobs` is.
inline std::vector<AttackRecord> attack_batch(const std::vector<ManifestEntry>& entries,
                                              const AttackConfig& cfg,
                                              const std::filesystem::path& root,
                                              const SrModel* model = nullptr, int jobs = 1) {
  namespace fs = std::filesystem;
  detail::check_backend(cfg, model);
  if (cfg.output_dir.empty()) throw ConfigError("attack needs an output directory");

  std::vector<AttackRecord> records(entries.size());
  std::set<fs::path> targets;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    AttackRecord& r = records[i];
    r.source = entries[i].path;
    r.backend = cfg.backend;
    r.k = cfg.k.value();
    if (!entries[i].box) {
      r.status = "skipped: no face box";
      continue;
    }
    const fs::path rel = attack_output_path(entries[i].path);
    if (!targets.insert(rel).second) {
      throw ConfigError("two manifest entries map to the same output " + rel.generic_string());
    }
    if (cfg.overwrite == OverwritePolicy::deny && fs::exists(cfg.output_dir / rel)) {
      throw IoError("output exists and overwrite is denied: " + (cfg.output_dir / rel).string());
    }
    r.output = rel.generic_string();
  }

  parallel_for(entries.size(), jobs, [&](std::size_t i) {
    AttackRecord& r = records[i];
    if (r.output.empty()) return;
    const Image frame = load_image(root / entries[i].path);
    const BoundingBox box = expand_box(*entries[i].box, cfg.margin, frame.width(), frame.height());
    const Image attacked = attack_face(frame, box, cfg, model, 1);
    const fs::path dst = cfg.output_dir / r.output;
    fs::create_directories(dst.parent_path());
    save_image(attacked, dst);
    r.box = box;
    if (cfg.log_similarity) {
      r.ssim = ssim(frame, attacked);
      r.psnr = psnr(frame, attacked);
    }
    r.status = "ok";
  });
  return records;
}

inline const csv::Row& attack_log_header() {
  static const csv::Row h = {"source", "output", "box_x", "box_y", "box_w", "box_h",
                             "backend", "k",     "ssim",  "psnr",  "status"};
  return h;
}

inline void write_attack_log(const std::filesystem::path& path,
                             const std::vector<AttackRecord>& records) {
  std::vector<csv::Row> rows;
  rows.reserve(records.size());
  for (const auto& r : records) {
    csv::Row row = {r.source, r.output, "", "", "", "", std::string(to_string(r.backend)),
                    std::to_string(r.k), "", "", r.status};
    if (r.box) {
      row[2] = std::to_string(r.box->x);
      row[3] = std::to_string(r.box->y);
      row[4] = std::to_string(r.box->w);
      row[5] = std::to_string(r.box->h);
    }
    if (r.ssim) row[8] = csv::format_double(*r.ssim);
    if (r.psnr) row[9] = csv::format_double(*r.psnr);
    rows.push_back(std::move(row));
  }
  csv::write(path, attack_log_header(), rows);
}

}  // namespace srattack
