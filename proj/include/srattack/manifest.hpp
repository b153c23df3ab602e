#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "srattack/csv.hpp"
#include "srattack/error.hpp"
#include "srattack/image.hpp"

namespace srattack {

enum class Label { pristine, fake };

enum class ForgeryMethod { none, Deepfakes, Face2Face, FaceShifter, FaceSwap, NeuralTextures };

enum class Split { train, test };

inline constexpr std::array<ForgeryMethod, 5> kForgeryMethods = {
    ForgeryMethod::Deepfakes, ForgeryMethod::Face2Face, ForgeryMethod::FaceShifter,
    ForgeryMethod::FaceSwap, ForgeryMethod::NeuralTextures};

inline std::string_view to_string(Label l) { return l == Label::pristine ? "pristine" : "fake"; }
inline std::string_view to_string(Split s) { return s == Split::train ? "train" : "test"; }

inline std::string_view to_string(ForgeryMethod m) {
  switch (m) {
    case ForgeryMethod::none: return "none";
    case ForgeryMethod::Deepfakes: return "Deepfakes";
    case ForgeryMethod::Face2Face: return "Face2Face";
    case ForgeryMethod::FaceShifter: return "FaceShifter";
    case ForgeryMethod::FaceSwap: return "FaceSwap";
    case ForgeryMethod::NeuralTextures: return "NeuralTextures";
  }
  return "none";
}

namespace detail {

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace detail

// Case-insensitive.
inline std::optional<ForgeryMethod> parse_forgery_method(std::string_view s) {
  const std::string l = detail::lower(s);
  if (l == "none") return ForgeryMethod::none;
  for (ForgeryMethod m : kForgeryMethods) {
    if (l == detail::lower(to_string(m))) return m;
  }
  return std::nullopt;
}

inline std::optional<Label> parse_label(std::string_view s) {
  if (s == "pristine") return Label::pristine;
  if (s == "fake") return Label::fake;
  return std::nullopt;
}

inline std::optional<Split> parse_split(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "test") return Split::test;
  return std::nullopt;
}

struct ManifestEntry {
  std::string path;  // relative to the data root, '/' separated
  Label label = Label::pristine;
  ForgeryMethod method = ForgeryMethod::none;
  Split split = Split::test;
  std::string video_id;
  int frame_idx = 0;
  std::optional<BoundingBox> box;

  bool operator==(const ManifestEntry&) const = default;
};

inline bool label_matches_method(const ManifestEntry& e) {
  return (e.label == Label::pristine) == (e.method == ForgeryMethod::none);
}

struct SplitSpec {
  std::vector<std::string> train;
  std::vector<std::string> test;
};

inline void validate_split(const SplitSpec& s) {
  if (s.train.empty() || s.test.empty()) throw FormatError("split: train and test must be non-empty");
  std::set<std::string> train(s.train.begin(), s.train.end());
  if (train.size() != s.train.size()) throw FormatError("split: duplicate train video id");
  std::set<std::string> test;
  for (const auto& id : s.test) {
    if (train.contains(id)) throw FormatError("split: video '" + id + "' is in both train and test");
    if (!test.insert(id).second) throw FormatError("split: duplicate test video id '" + id + "'");
  }
}

// {"train": ["000", ...], "test": [...]}
inline SplitSpec read_split(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  SplitSpec spec;
  try {
    const nlohmann::json j = nlohmann::json::parse(in);
    spec.train = j.at("train").get<std::vector<std::string>>();
    spec.test = j.at("test").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  validate_split(spec);
  return spec;
}

// --- frame directory listing ------------------------------------------------

// class directory name -> video directory name -> sorted frame file names.
using FrameListing = std::map<std::string, std::map<std::string, std::vector<std::string>>>;

inline bool is_frame_file(const std::filesystem::path& p) {
  const std::string ext = detail::lower(p.extension().string());
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

inline std::string class_dir_name(Label label, ForgeryMethod method) {
  return label == Label::pristine ? "pristine" : std::string(to_string(method));
}

// Lists <root>/<class_dir>/<video_dir>/<frame files>.
inline FrameListing scan_frames(const std::filesystem::path& root,
                                const std::vector<std::string>& class_dirs) {
  namespace fs = std::filesystem;
  FrameListing listing;
  for (const auto& cls : class_dirs) {
    const fs::path dir = root / cls;
    if (!fs::is_directory(dir)) throw IoError("missing class directory " + dir.string());
    auto& videos = listing[cls];
    for (const auto& vid : fs::directory_iterator(dir)) {
      if (!vid.is_directory()) continue;
      auto& frames = videos[vid.path().filename().string()];
      for (const auto& f : fs::directory_iterator(vid.path())) {
        if (f.is_regular_file() && is_frame_file(f.path())) {
          frames.push_back(f.path().filename().string());
        }
      }
      std::sort(frames.begin(), frames.end());
    }
  }
  return listing;
}

namespace detail {

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Unbiased draw in [0, n) from raw engine output; std distributions are not
// specified bit-exactly across standard libraries.
inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v = 0;
  do {
    v = rng();
  } while (v >= limit);
  return v % n;
}

// Indices of k distinct elements out of n, sorted ascending.
inline std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k,
                                                           std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  k = std::min(k, n);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(bounded(rng, n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

// Trailing integer of the file stem ("frame_0042.png" -> 42), if any.
inline std::optional<int> trailing_number(std::string_view name) {
  const auto dot = name.rfind('.');
  std::string_view stem = name.substr(0, dot);
  std::size_t start = stem.size();
  while (start > 0 && std::isdigit(static_cast<unsigned char>(stem[start - 1]))) --start;
  if (start == stem.size() || stem.size() - start > 9) return std::nullopt;
  return std::stoi(std::string(stem.substr(start)));
}

// Exact match, else a unique "<id>_..." directory (FF++ names fakes
// "<target>_<source>").
inline const std::string* find_video_dir(
    const std::map<std::string, std::vector<std::string>>& videos, const std::string& id,
    const std::string& cls) {
  if (auto it = videos.find(id); it != videos.end()) return &it->first;
  const std::string* found = nullptr;
  const std::string prefix = id + "_";
  for (auto it = videos.lower_bound(prefix); it != videos.end() && it->first.starts_with(prefix);
       ++it) {
    if (found) throw FormatError("ambiguous video directory for '" + id + "' in " + cls);
    found = &it->first;
  }
  return found;
}

}  // namespace detail

struct ManifestBuild {
  std::vector<ManifestEntry> entries;
  std::vector<std::string> warnings;
};

// Deterministic canonical order: (video id, frame index, label, path).
inline void sort_manifest(std::vector<ManifestEntry>& entries) {
  std::sort(entries.begin(), entries.end(), [](const ManifestEntry& a, const ManifestEntry& b) {
    return std::tie(a.video_id, a.frame_idx, a.label, a.path) <
           std::tie(b.video_id, b.frame_idx, b.label, b.path);
  });
}

// Samples `frames_per_video` frames per (video, class) without replacement.
// Each (split, class, video) draws from its own stream derived from `seed`,
// so the result is independent of listing order.
inline ManifestBuild build_manifest(const FrameListing& listing, const SplitSpec& split,
                                    ForgeryMethod method, int frames_per_video,
                                    std::uint64_t seed) {
  if (method == ForgeryMethod::none) throw ConfigError("build_manifest needs a forgery method");
  if (frames_per_video < 1) throw ConfigError("frames_per_video must be >= 1");
  validate_split(split);

  ManifestBuild out;
  for (Split sp : {Split::train, Split::test}) {
    const auto& ids = sp == Split::train ? split.train : split.test;
    for (Label label : {Label::pristine, Label::fake}) {
      const std::string cls = class_dir_name(label, method);
      const auto cls_it = listing.find(cls);
      if (cls_it == listing.end()) throw IoError("missing class directory '" + cls + "'");
      for (const std::string& id : ids) {
        const std::string* dir = detail::find_video_dir(cls_it->second, id, cls);
        if (dir == nullptr) throw IoError("video directory missing: " + cls + "/" + id);
        const auto& frames = cls_it->second.at(*dir);
        if (frames.size() < static_cast<std::size_t>(frames_per_video)) {
          out.warnings.push_back(cls + "/" + *dir + ": only " + std::to_string(frames.size()) +
                                 " frames, taking all");
        }
        const std::uint64_t stream =
            seed ^ detail::fnv1a64(std::string(to_string(sp)) + "/" + cls + "/" + id);
        for (std::size_t i : detail::sample_without_replacement(
                 frames.size(), static_cast<std::size_t>(frames_per_video), stream)) {
          ManifestEntry e;
          e.path = cls + "/" + *dir + "/" + frames[i];
          e.label = label;
          e.method = label == Label::pristine ? ForgeryMethod::none : method;
          e.split = sp;
          e.video_id = id;
          e.frame_idx = detail::trailing_number(frames[i]).value_or(static_cast<int>(i));
          out.entries.push_back(std::move(e));
        }
      }
    }
  }
  sort_manifest(out.entries);
  return out;
}

inline ManifestBuild build_manifest(const std::filesystem::path& frame_root,
                                    const SplitSpec& split, ForgeryMethod method,
                                    int frames_per_video, std::uint64_t seed) {
  return build_manifest(
      scan_frames(frame_root, {"pristine", std::string(to_string(method))}), split, method,
      frames_per_video, seed);
}

// --- validation -------------------------------------------------------------

struct ValidationReport {
  std::size_t entry_count = 0;
  std::size_t with_box = 0;
  std::vector<std::string> violations;

  double box_rate() const {
    return entry_count == 0 ? 0.0 : static_cast<double>(with_box) / entry_count;
  }
  bool ok() const { return violations.empty(); }
};

// Checks label/method pairing, duplicate paths, file existence under `root`
// (skipped when root is empty) and per-split class balance for every method.
inline ValidationReport validate_manifest(const std::vector<ManifestEntry>& entries,
                                          const std::filesystem::path& root) {
  ValidationReport r;
  r.entry_count = entries.size();
  std::set<std::string> seen;
  std::map<Split, std::size_t> pristine;
  std::map<Split, std::map<ForgeryMethod, std::size_t>> fake;
  for (const auto& e : entries) {
    if (e.box) ++r.with_box;
    if (!label_matches_method(e)) {
      r.violations.push_back("label/method mismatch: " + e.path + " is " +
                             std::string(to_string(e.label)) + " with method " +
                             std::string(to_string(e.method)));
    }
    if (e.frame_idx < 0) r.violations.push_back("negative frame index: " + e.path);
    if (!seen.insert(e.path).second) r.violations.push_back("duplicate path: " + e.path);
    if (!root.empty() && !std::filesystem::exists(root / e.path)) {
      r.violations.push_back("missing file: " + e.path);
    }
    if (e.label == Label::pristine) {
      ++pristine[e.split];
    } else {
      ++fake[e.split][e.method];
    }
  }
  for (Split sp : {Split::train, Split::test}) {
    const std::size_t p = pristine.count(sp) ? pristine[sp] : 0;
    if (!fake.contains(sp)) {
      if (p > 0) {
        r.violations.push_back("class imbalance in " + std::string(to_string(sp)) + ": " +
                               std::to_string(p) + " pristine vs 0 fake");
      }
      continue;
    }
    for (const auto& [m, f] : fake[sp]) {
      if (f != p) {
        r.violations.push_back("class imbalance in " + std::string(to_string(sp)) + ": " +
                               std::to_string(p) + " pristine vs " + std::to_string(f) +
                               " fake (" + std::string(to_string(m)) + ")");
      }
    }
  }
  return r;
}

// --- CSV I/O ----------------------------------------------------------------

inline const csv::Row& manifest_header() {
  static const csv::Row h = {"path",     "label",    "method", "split", "video_id",
                             "frame_idx", "box_x", "box_y",  "box_w", "box_h"};
  return h;
}

inline std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  const csv::Table t = csv::read(path, manifest_header());
  std::vector<ManifestEntry> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string where = path.string() + ":" + std::to_string(t.line_numbers[r]);
    if (row.size() != manifest_header().size()) {
      throw FormatError(where + ": expected 10 fields, got " + std::to_string(row.size()));
    }
    ManifestEntry e;
    e.path = row[0];
    if (e.path.empty()) throw FormatError(where + ": empty path");
    const auto label = parse_label(row[1]);
    const auto method = parse_forgery_method(row[2]);
    const auto split = parse_split(row[3]);
    if (!label) throw FormatError(where + ": unknown label '" + row[1] + "'");
    if (!method) throw FormatError(where + ": unknown forgery method '" + row[2] + "'");
    if (!split) throw FormatError(where + ": unknown split '" + row[3] + "'");
    e.label = *label;
    e.method = *method;
    e.split = *split;
    if (!label_matches_method(e)) {
      throw FormatError(where + ": label '" + row[1] + "' inconsistent with method '" + row[2] + "'");
    }
    e.video_id = row[4];
    const auto frame = csv::parse_int(row[5]);
    if (!frame || *frame < 0 || *frame > std::numeric_limits<int>::max()) {
      throw FormatError(where + ": bad frame index '" + row[5] + "'");
    }
    e.frame_idx = static_cast<int>(*frame);
    const bool any_box = !row[6].empty() || !row[7].empty() || !row[8].empty() || !row[9].empty();
    if (any_box) {
      std::array<long long, 4> v{};
      for (int i = 0; i < 4; ++i) {
        const auto p = csv::parse_int(row[6 + i]);
        if (!p || *p < std::numeric_limits<int>::min() || *p > std::numeric_limits<int>::max()) {
          throw FormatError(where + ": bad box field '" + row[6 + i] + "'");
        }
        v[i] = *p;
      }
      if (v[2] < 1 || v[3] < 1) throw FormatError(where + ": box width/height must be >= 1");
      e.box = BoundingBox{static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2]),
                          static_cast<int>(v[3])};
    }
    out.push_back(std::move(e));
  }
  return out;
}

inline void write_manifest(const std::filesystem::path& path,
                           const std::vector<ManifestEntry>& entries) {
  std::vector<csv::Row> rows;
  rows.reserve(entries.size());
  for (const auto& e : entries) {
    csv::Row row = {e.path,
                    std::string(to_string(e.label)),
                    std::string(to_string(e.method)),
                    std::string(to_string(e.split)),
                    e.video_id,
                    std::to_string(e.frame_idx),
                    "", "", "", ""};
    if (e.box) {
      row[6] = std::to_string(e.box->x);
      row[7] = std::to_string(e.box->y);
      row[8] = std::to_string(e.box->w);
      row[9] = std::to_string(e.box->h);
    }
    rows.push_back(std::move(row));
  }
  csv::write(path, manifest_header(), rows);
}

// Face box sidecar: `path,x,y,w,h` with an optional header row.
inline std::map<std::string, BoundingBox> read_boxes(const std::filesystem::path& path) {
  const csv::Table t = csv::read(path, {}, false);
  std::map<std::string, BoundingBox> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string where = path.string() + ":" + std::to_string(t.line_numbers[r]);
    if (row.size() != 5) throw FormatError(where + ": expected path,x,y,w,h");
    std::array<std::optional<long long>, 4> v;
    for (int i = 0; i < 4; ++i) v[i] = csv::parse_int(row[1 + i]);
    const bool numeric = std::all_of(v.begin(), v.end(), [](const auto& o) { return o.has_value(); });
    if (!numeric) {
      if (r == 0 && t.line_numbers[r] == 1) continue;  // header
      throw FormatError(where + ": malformed box row");
    }
    for (const auto& o : v) {
      if (*o < std::numeric_limits<int>::min() || *o > std::numeric_limits<int>::max()) {
        throw FormatError(where + ": box value out of range");
      }
    }
    if (*v[2] <= 0 || *v[3] <= 0) {
      throw FormatError(where + ": box width/height must be positive");
    }
    if (row[0].empty()) throw FormatError(where + ": empty path");
    const BoundingBox box{static_cast<int>(*v[0]), static_cast<int>(*v[1]),
                          static_cast<int>(*v[2]), static_cast<int>(*v[3])};
    if (!out.emplace(row[0], box).second) {
      throw FormatError(where + ": duplicate box for '" + row[0] + "' (ambiguous face)");
    }
  }
  return out;
}

// Sets entry.box for every entry whose path has a box. Returns how many were
// attached.
inline std::size_t attach_boxes(std::vector<ManifestEntry>& entries,
                                const std::map<std::string, BoundingBox>& boxes) {
  std::size_t n = 0;
  for (auto& e : entries) {
    if (auto it = boxes.find(e.path); it != boxes.end()) {
      e.box = it->second;
      ++n;
    }
  }
  return n;
}

}  // namespace srattack
