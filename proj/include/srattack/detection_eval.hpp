#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "srattack/csv.hpp"
#include "srattack/error.hpp"
#include "srattack/manifest.hpp"
#include "srattack/metrics.hpp"

namespace srattack {

// One detector output. Fake is the positive class throughout.
struct ScoreRecord {
  std::string image_id;
  double score = 0.0;  // probability of "fake", in [0,1]
  Label label = Label::pristine;
  bool attacked = false;
  ForgeryMethod method = ForgeryMethod::none;
};

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t positives() const { return tp + fn; }
  std::size_t negatives() const { return fp + tn; }
  std::size_t total() const { return tp + fp + tn + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

inline constexpr double kDefaultThreshold = 0.5;

// score >= threshold is predicted fake.
inline ConfusionCounts confusion_at_threshold(std::span<const ScoreRecord> records,
                                              double threshold = kDefaultThreshold) {
  if (records.empty()) throw PreconditionError("confusion_at_threshold: no records");
  ConfusionCounts c;
  for (const auto& r : records) {
    const bool predicted_fake = r.score >= threshold;
    if (r.label == Label::fake) {
      predicted_fake ? ++c.tp : ++c.fn;
    } else {
      predicted_fake ? ++c.fp : ++c.tn;
    }
  }
  return c;
}

// Percentages. A rate whose denominator is zero is nullopt, never 0.
struct ClassificationRates {
  std::optional<double> fnr;
  std::optional<double> fpr;
  std::optional<double> recall;
  std::optional<double> precision;
  std::optional<double> accuracy;
};

inline ClassificationRates classification_metrics(const ConfusionCounts& c) {
  auto pct = [](std::size_t num, std::size_t den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return 100.0 * static_cast<double>(num) / static_cast<double>(den);
  };
  ClassificationRates r;
  r.fnr = pct(c.fn, c.positives());
  r.recall = pct(c.tp, c.positives());
  r.fpr = pct(c.fp, c.negatives());
  r.precision = pct(c.tp, c.tp + c.fp);
  r.accuracy = pct(c.tp + c.tn, c.total());
  return r;
}

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  bool operator==(const RocPoint&) const = default;
};

// Sweeps the threshold down through every distinct score. Starts at (0,0) and
// ends at (1,1).
inline std::vector<RocPoint> roc_curve(std::span<const ScoreRecord> records) {
  std::vector<std::pair<double, bool>> s;  // (score, is_fake)
  s.reserve(records.size());
  std::size_t pos = 0;
  for (const auto& r : records) {
    s.emplace_back(r.score, r.label == Label::fake);
    pos += r.label == Label::fake;
  }
  const std::size_t neg = s.size() - pos;
  if (pos == 0 || neg == 0) {
    throw PreconditionError("roc_curve needs at least one fake and one pristine record");
  }
  std::sort(s.begin(), s.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

  std::vector<RocPoint> curve{{0.0, 0.0}};
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < s.size();) {
    const double t = s[i].first;
    for (; i < s.size() && s[i].first == t; ++i) s[i].second ? ++tp : ++fp;
    curve.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                     static_cast<double>(tp) / static_cast<double>(pos)});
  }
  return curve;
}

// Trapezoidal area under a ROC curve, in [0,1].
inline double auc(std::span<const RocPoint> curve) {
  if (curve.size() < 2) throw PreconditionError("auc: curve needs at least two points");
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    const double dx = curve[i].fpr - curve[i - 1].fpr;
    if (dx < 0.0 || curve[i].tpr < curve[i - 1].tpr) {
      throw PreconditionError("auc: curve is not monotone");
    }
    area += dx * (curve[i].tpr + curve[i - 1].tpr) * 0.5;
  }
  return area;
}

// --- score files ------------------------------------------------------------

using ScoreTable = std::map<std::string, double>;

// `image_path,score` with scores in [0,1].
inline ScoreTable read_scores(const std::filesystem::path& path) {
  const csv::Table t = csv::read(path, {"image_path", "score"});
  ScoreTable out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string where = path.string() + ":" + std::to_string(t.line_numbers[r]);
    if (row.size() != 2) throw FormatError(where + ": expected image_path,score");
    const auto v = csv::parse_double(row[1]);
    if (!v || !(*v >= 0.0 && *v <= 1.0)) {
      throw FormatError(where + ": score must be a number in [0,1], got '" + row[1] + "'");
    }
    if (!out.emplace(row[0], *v).second) {
      throw FormatError(where + ": duplicate score for '" + row[0] + "'");
    }
  }
  return out;
}

inline void write_scores(const std::filesystem::path& path, const ScoreTable& scores) {
  std::vector<csv::Row> rows;
  for (const auto& [id, s] : scores) rows.push_back({id, csv::format_double(s)});
  csv::write(path, {"image_path", "score"}, rows);
}

// --- evaluation setups --------------------------------------------------------

enum class AttackSetup {
  attack_both,       // pristine and fake test images are attacked
  attack_fake_only,  // only fake images are attacked; pristine stay clean
};

inline std::string_view to_string(AttackSetup s) {
  return s == AttackSetup::attack_both ? "both" : "fake-only";
}

struct EvalRow {
  std::string model_tag;
  ForgeryMethod method = ForgeryMethod::none;
  bool sr = false;
  ConfusionCounts counts;
  ClassificationRates rates;
  double auc = 0.0;  // percentage
  std::vector<RocPoint> roc;
};

// One (no-SR, SR) row pair per forgery method present in `entries`, in
// canonical method order. Each group is the pristine entries plus the fakes of
// that method.
inline std::vector<EvalRow> evaluate_setup(const std::vector<ManifestEntry>& entries,
                                           const ScoreTable& plain, const ScoreTable& attacked,
                                           AttackSetup setup,
                                           double threshold = kDefaultThreshold,
                                           const std::string& model_tag = "detector") {
  auto lookup = [](const ScoreTable& table, const std::string& id, const char* which) {
    const auto it = table.find(id);
    if (it == table.end()) {
      throw FormatError(std::string("no ") + which + " score for manifest entry '" + id + "'");
    }
    return it->second;
  };

  std::vector<const ManifestEntry*> pristine;
  std::map<ForgeryMethod, std::vector<const ManifestEntry*>> fakes;
  for (const auto& e : entries) {
    if (!label_matches_method(e)) {
      throw FormatError("manifest entry '" + e.path + "' has an inconsistent label/method");
    }
    if (e.label == Label::pristine) {
      pristine.push_back(&e);
    } else {
      fakes[e.method].push_back(&e);
    }
  }
  if (pristine.empty()) throw PreconditionError("evaluate: manifest has no pristine entries");
  if (fakes.empty()) throw PreconditionError("evaluate: manifest has no fake entries");

  std::vector<EvalRow> rows;
  for (ForgeryMethod m : kForgeryMethods) {
    const auto it = fakes.find(m);
    if (it == fakes.end()) continue;
    for (bool sr : {false, true}) {
      std::vector<ScoreRecord> recs;
      recs.reserve(pristine.size() + it->second.size());
      const bool pristine_attacked = sr && setup == AttackSetup::attack_both;
      for (const ManifestEntry* e : pristine) {
        recs.push_back({e->path,
                        lookup(pristine_attacked ? attacked : plain, e->path,
                               pristine_attacked ? "attacked" : "plain"),
                        Label::pristine, pristine_attacked, ForgeryMethod::none});
      }
      for (const ManifestEntry* e : it->second) {
        recs.push_back({e->path, lookup(sr ? attacked : plain, e->path, sr ? "attacked" : "plain"),
                        Label::fake, sr, m});
      }
      EvalRow row;
      row.model_tag = model_tag;
      row.method = m;
      row.sr = sr;
      row.counts = confusion_at_threshold(recs, threshold);
      row.rates = classification_metrics(row.counts);
      row.roc = roc_curve(recs);
      row.auc = 100.0 * auc(row.roc);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

inline const csv::Row& report_header() {
  static const csv::Row h = {"model",         "method",     "sr",         "tp",
                             "fn",            "fp",         "tn",         "fnr",
                             "fpr",           "recall",     "precision",  "accuracy",
                             "auc",           "fnr_1dp",    "fpr_1dp",    "recall_1dp",
                             "precision_1dp", "accuracy_1dp", "auc_1dp"};
  return h;
}

inline csv::Row report_row(const EvalRow& r) {
  auto full = [](const std::optional<double>& v) {
    return v ? csv::format_double(*v) : std::string("undefined");
  };
  auto one = [](const std::optional<double>& v) {
    return v ? csv::format_fixed(*v, 1) : std::string("undefined");
  };
  return {r.model_tag,
          std::string(to_string(r.method)),
          r.sr ? "1" : "0",
          std::to_string(r.counts.tp),
          std::to_string(r.counts.fn),
          std::to_string(r.counts.fp),
          std::to_string(r.counts.tn),
          full(r.rates.fnr),
          full(r.rates.fpr),
          full(r.rates.recall),
          full(r.rates.precision),
          full(r.rates.accuracy),
          full(r.auc),
          one(r.rates.fnr),
          one(r.rates.fpr),
          one(r.rates.recall),
          one(r.rates.precision),
          one(r.rates.accuracy),
          one(r.auc)};
}

inline void write_report(const std::filesystem::path& path, const std::vector<EvalRow>& rows) {
  std::vector<csv::Row> out;
  for (const auto& r : rows) out.push_back(report_row(r));
  csv::write(path, report_header(), out);
}

inline std::string roc_file_name(const EvalRow& r) {
  return "roc_" + r.model_tag + "_" + std::string(to_string(r.method)) + (r.sr ? "_sr" : "_nosr") +
         ".csv";
}

inline void write_roc(const std::filesystem::path& path, std::span<const RocPoint> curve) {
  std::vector<csv::Row> rows;
  for (const auto& p : curve) rows.push_back({csv::format_double(p.fpr), csv::format_double(p.tpr)});
  csv::write(path, {"fpr", "tpr"}, rows);
}

struct SsimErrorCorrelation {
  std::string group;  // forgery method name or "pristine"
  std::size_t n = 0;
  // Pearson r between per-image SSIM and the change in misclassification
  // (attacked minus plain, each 0 or 1). nullopt when either side is constant.
  std::optional<double> r;
};

// Relates how much the attack changed an image (SSIM) to whether it changed
// the detector's decision. Images without an SSIM value are ignored.
inline std::vector<SsimErrorCorrelation> ssim_error_correlation(
    const std::vector<ManifestEntry>& entries, const ScoreTable& plain, const ScoreTable& attacked,
    const std::map<std::string, double>& ssim_by_path, double threshold = kDefaultThreshold) {
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> groups;
  for (const auto& e : entries) {
    const auto s = ssim_by_path.find(e.path);
    const auto p = plain.find(e.path);
    const auto a = attacked.find(e.path);
    if (s == ssim_by_path.end() || p == plain.end() || a == attacked.end()) continue;
    const bool fake = e.label == Label::fake;
    auto wrong = [&](double score) { return (score >= threshold) != fake ? 1.0 : 0.0; };
    auto& g = groups[fake ? std::string(to_string(e.method)) : std::string("pristine")];
    g.first.push_back(s->second);
    g.second.push_back(wrong(a->second) - wrong(p->second));
  }
  std::vector<SsimErrorCorrelation> out;
  for (const auto& [name, g] : groups) {
    SsimErrorCorrelation c{name, g.first.size(), std::nullopt};
    try {
      c.r = pearson_corr(g.first, g.second);
    } catch (const PreconditionError&) {
    }
    out.push_back(std::move(c));
  }
  return out;
}

inline void write_correlation(const std::filesystem::path& path,
                              const std::vector<SsimErrorCorrelation>& rows) {
  std::vector<csv::Row> out;
  for (const auto& c : rows) {
    out.push_back({c.group, std::to_string(c.n),
                   c.r ? csv::format_double(*c.r) : std::string("undefined")});
  }
  csv::write(path, {"group", "n", "pearson_ssim_vs_error_change"}, out);
}

}  // namespace srattack
