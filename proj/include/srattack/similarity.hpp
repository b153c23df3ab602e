#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "srattack/csv.hpp"
#include "srattack/error.hpp"
#include "srattack/image_io.hpp"
#include "srattack/metrics.hpp"
#include "srattack/parallel.hpp"

namespace srattack {

struct ImagePair {
  std::filesystem::path original;
  std::filesystem::path attacked;
  std::string group;  // typically the forgery method, or "pristine"
};

// `original,attacked,group`; relative paths are resolved against `base`.
inline std::vector<ImagePair> read_pairs(const std::filesystem::path& path,
                                         const std::filesystem::path& base) {
  const csv::Table t = csv::read(path, {"original", "attacked", "group"});
  std::vector<ImagePair> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string where = path.string() + ":" + std::to_string(t.line_numbers[r]);
    if (row.size() != 3) throw FormatError(where + ": expected original,attacked,group");
    if (row[0].empty() || row[1].empty()) throw FormatError(where + ": empty path");
    if (row[2].empty()) throw FormatError(where + ": empty group");
    out.push_back({base / row[0], base / row[1], row[2]});
  }
  return out;
}

// Mean SSIM and PSNR per group over (original, attacked) image pairs.
// Identical pairs have infinite PSNR; they are left out of the PSNR mean and
// counted in infinite_psnr_count instead.
inline std::vector<SimilarityGroup> similarity_report(const std::vector<ImagePair>& pairs,
                                                      int jobs = 1) {
  if (pairs.empty()) throw PreconditionError("similarity_report: no pairs");
  std::vector<std::pair<std::string, SimilarityPair>> values(pairs.size());
  parallel_for(pairs.size(), jobs, [&](std::size_t i) {
    const Image a = load_image(pairs[i].original);
    const Image b = load_image(pairs[i].attacked);
    if (a.width() != b.width() || a.height() != b.height()) {
      throw PreconditionError("pair dimension mismatch: " + pairs[i].original.string() + " vs " +
                              pairs[i].attacked.string());
    }
    values[i] = {pairs[i].group, {ssim(a, b), psnr(a, b)}};
  });
  return aggregate_similarity(values);
}

inline void write_similarity_report(const std::filesystem::path& path,
                                    const std::vector<SimilarityGroup>& groups) {
  std::vector<csv::Row> rows;
  for (const auto& g : groups) {
    rows.push_back({g.group, std::to_string(g.pair_count), csv::format_double(g.ssim_mean),
                    g.psnr_mean_db ? csv::format_double(*g.psnr_mean_db) : std::string("inf"),
                    std::to_string(g.infinite_psnr_count)});
  }
  csv::write(path, {"group", "pair_count", "ssim_mean", "psnr_mean_db", "infinite_psnr_count"},
             rows);
}

}  // namespace srattack
