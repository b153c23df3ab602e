#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "srattack/error.hpp"
#include "srattack/image.hpp"

namespace srattack {

// Kahan-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double y = v - carry_;
    const double t = sum_ + y;
    carry_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

inline constexpr double kPeakValue = 255.0;

struct SsimComponents {
  double mu_x = 0.0;
  double mu_y = 0.0;
  double sigma_x = 0.0;  // standard deviation, population (1/N)
  double sigma_y = 0.0;
  double sigma_xy = 0.0;  // covariance, population (1/N)
  double c1 = (0.01 * kPeakValue) * (0.01 * kPeakValue);
  double c2 = (0.03 * kPeakValue) * (0.03 * kPeakValue);

  double ssim() const {
    return ((2.0 * mu_x * mu_y + c1) * (2.0 * sigma_xy + c2)) /
           ((mu_x * mu_x + mu_y * mu_y + c1) * (sigma_x * sigma_x + sigma_y * sigma_y + c2));
  }
};

struct PsnrInputs {
  double max_value = kPeakValue;
  double mse = 0.0;

  // +infinity when mse == 0.
  double psnr_db() const {
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(max_value * max_value / mse);
  }
};

namespace detail {

inline void require_same_dims(const Image& x, const Image& y, const char* what) {
  if (x.width() != y.width() || x.height() != y.height()) {
    throw PreconditionError(std::string(what) + ": dimension mismatch " +
                            std::to_string(x.width()) + "x" + std::to_string(x.height()) +
                            " vs " + std::to_string(y.width()) + "x" +
                            std::to_string(y.height()));
  }
}

}  // namespace detail

inline double mse(const Image& x, const Image& y) {
  detail::require_same_dims(x, y, "mse");
  const auto a = x.samples();
  const auto b = y.samples();
  CompensatedSum sum;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum.add(d * d);
  }
  return sum.value() / static_cast<double>(a.size());
}

inline double psnr(const Image& x, const Image& y) {
  return PsnrInputs{kPeakValue, mse(x, y)}.psnr_db();
}

// Global statistics over all samples, channels pooled.
inline SsimComponents ssim_components(const Image& x, const Image& y) {
  detail::require_same_dims(x, y, "ssim");
  const auto a = x.samples();
  const auto b = y.samples();
  const double n = static_cast<double>(a.size());

  CompensatedSum sa, sb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa.add(a[i]);
    sb.add(b[i]);
  }
  SsimComponents s;
  s.mu_x = sa.value() / n;
  s.mu_y = sb.value() / n;

  CompensatedSum vx, vy, cxy;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double dx = a[i] - s.mu_x;
    const double dy = b[i] - s.mu_y;
    vx.add(dx * dx);
    vy.add(dy * dy);
    cxy.add(dx * dy);
  }
  s.sigma_x = std::sqrt(vx.value() / n);
  s.sigma_y = std::sqrt(vy.value() / n);
  s.sigma_xy = cxy.value() / n;
  return s;
}

inline double ssim(const Image& x, const Image& y) {
  // Identical inputs give exactly 1; computing through sqrt and back could
  // leave a rounding residue.
  if (x == y) return 1.0;
  return ssim_components(x, y).ssim();
}

// Pearson correlation with population statistics. A constant sequence has no
// defined correlation and is rejected.
inline double pearson_corr(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw PreconditionError("pearson_corr: length mismatch");
  if (a.size() < 2) throw PreconditionError("pearson_corr: need at least two values");
  const double n = static_cast<double>(a.size());
  CompensatedSum sa, sb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa.add(a[i]);
    sb.add(b[i]);
  }
  const double ma = sa.value() / n;
  const double mb = sb.value() / n;
  CompensatedSum vab, va, vb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    vab.add(da * db);
    va.add(da * da);
    vb.add(db * db);
  }
  if (va.value() == 0.0 || vb.value() == 0.0) {
    throw PreconditionError("pearson_corr: correlation undefined for a constant sequence");
  }
  const double r = (vab.value() / n) / (std::sqrt(va.value() / n) * std::sqrt(vb.value() / n));
  return std::clamp(r, -1.0, 1.0);
}

struct SimilarityPair {
  double ssim = 0.0;
  double psnr_db = 0.0;  // may be +inf
};

struct SimilarityGroup {
  std::string group;
  std::size_t pair_count = 0;
  double ssim_mean = 0.0;
  // Mean over finite PSNR values; nullopt when every pair was identical.
  std::optional<double> psnr_mean_db;
  std::size_t infinite_psnr_count = 0;
};

// Per-group arithmetic means. Groups come back sorted by name.
inline std::vector<SimilarityGroup> aggregate_similarity(
    const std::vector<std::pair<std::string, SimilarityPair>>& values) {
  struct Acc {
    std::size_t n = 0;
    std::size_t finite = 0;
    std::size_t inf = 0;
    CompensatedSum ssim;
    CompensatedSum psnr;
  };
  std::map<std::string, Acc> groups;
  for (const auto& [group, v] : values) {
    if (group.empty()) throw PreconditionError("similarity pair with empty group key");
    Acc& acc = groups[group];
    ++acc.n;
    acc.ssim.add(v.ssim);
    if (std::isinf(v.psnr_db)) {
      ++acc.inf;
    } else {
      ++acc.finite;
      acc.psnr.add(v.psnr_db);
    }
  }
  std::vector<SimilarityGroup> out;
  for (const auto& [name, acc] : groups) {
    SimilarityGroup g;
    g.group = name;
    g.pair_count = acc.n;
    g.ssim_mean = acc.ssim.value() / static_cast<double>(acc.n);
    if (acc.finite > 0) g.psnr_mean_db = acc.psnr.value() / static_cast<double>(acc.finite);
    g.infinite_psnr_count = acc.inf;
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace srattack
