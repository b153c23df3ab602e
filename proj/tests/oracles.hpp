#pragma once

// Reference implementations used only by tests. They deliberately follow the
// textbook definitions with plain loops and share no code with the library
// paths they check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "srattack/image.hpp"
#include "srattack/sr_model.hpp"

namespace oracle {

// out(o,y,x) = bias(o) + sum_{i,dy,dx} w(o,i,dy,dx) * in(i, y+dy-1, x+dx-1)
inline srattack::Tensor3 conv2d_direct(const srattack::Tensor3& in,
                                       const srattack::ConvLayer& layer) {
  const int C = in.channels();
  const int H = in.height();
  const int W = in.width();
  srattack::Tensor3 out(layer.out_channels, H, W);
  for (int o = 0; o < layer.out_channels; ++o) {
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        double acc = layer.bias[o];
        for (int i = 0; i < C; ++i) {
          for (int dy = 0; dy < 3; ++dy) {
            for (int dx = 0; dx < 3; ++dx) {
              const int sy = y + dy - 1;
              const int sx = x + dx - 1;
              const double v = (sy < 0 || sy >= H || sx < 0 || sx >= W) ? 0.0 : in.at(i, sy, sx);
              acc += static_cast<double>(
                         layer.weights[((o * C + i) * 3 + dy) * 3 + dx]) * v;
            }
          }
        }
        out.at(o, y, x) = static_cast<float>(acc);
      }
    }
  }
  return out;
}

struct SsimParts {
  double mx, my, vx, vy, cxy;
};

// Two-pass textbook statistics, population normalisation.
inline double ssim_direct(const srattack::Image& a, const srattack::Image& b) {
  const std::size_t n = a.samples().size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += a.samples()[i];
    my += b.samples()[i];
  }
  mx /= n;
  my /= n;
  double vx = 0, vy = 0, cxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    vx += (a.samples()[i] - mx) * (a.samples()[i] - mx);
    vy += (b.samples()[i] - my) * (b.samples()[i] - my);
    cxy += (a.samples()[i] - mx) * (b.samples()[i] - my);
  }
  vx /= n;
  vy /= n;
  cxy /= n;
  const double c1 = 6.5025;   // (0.01*255)^2
  const double c2 = 58.5225;  // (0.03*255)^2
  return ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
}

inline double mse_direct(const srattack::Image& a, const srattack::Image& b) {
  double s = 0;
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x)
      for (int c = 0; c < 3; ++c) {
        const double d = a.at(y, x, c) - b.at(y, x, c);
        s += d * d;
      }
  return s / (static_cast<double>(a.width()) * a.height() * 3);
}

inline double psnr_direct(const srattack::Image& a, const srattack::Image& b) {
  return 10.0 * std::log10(255.0 * 255.0 / mse_direct(a, b));
}

// P(score_fake > score_pristine) + 0.5 * P(equal), over all cross-class pairs.
inline double auc_pairwise(const std::vector<int>& labels, const std::vector<double>& scores) {
  double num = 0;
  double den = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (labels[j] != 0) continue;
      den += 1;
      if (scores[i] > scores[j]) num += 1;
      else if (scores[i] == scores[j]) num += 0.5;
    }
  }
  return num / den;
}

// (fpr, tpr) at every candidate threshold, highest first, plus (0,0).
inline std::vector<std::pair<double, double>> roc_enumerate(const std::vector<int>& labels,
                                                            const std::vector<double>& scores) {
  std::vector<double> thresholds = scores;
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  double pos = 0, neg = 0;
  for (int l : labels) (l == 1 ? pos : neg) += 1;
  std::vector<std::pair<double, double>> pts{{0.0, 0.0}};
  for (double t : thresholds) {
    double tp = 0, fp = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (scores[i] >= t) (labels[i] == 1 ? tp : fp) += 1;
    }
    pts.emplace_back(fp / neg, tp / pos);
  }
  return pts;
}

inline double pearson_direct(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, sa = 0, sb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    sa += (a[i] - ma) * (a[i] - ma);
    sb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(sa * sb);
}

// Keys cubic, a = -0.5, written out independently of the library.
inline double keys(double t) {
  t = std::fabs(t);
  if (t < 1) return 1.5 * t * t * t - 2.5 * t * t + 1;
  if (t < 2) return -0.5 * t * t * t + 2.5 * t * t - 4 * t + 2;
  return 0;
}

// Normalised 1-D weight matrix (out_len x in_len) with edge clamping folded in.
inline std::vector<std::vector<double>> weight_matrix(int in_len, int out_len, double ratio,
                                                      double stretch) {
  std::vector<std::vector<double>> m(out_len, std::vector<double>(in_len, 0.0));
  for (int o = 0; o < out_len; ++o) {
    const double center = (o + 0.5) / ratio - 0.5;
    double sum = 0;
    std::vector<std::pair<int, double>> taps;
    for (int j = static_cast<int>(std::floor(center - 2 * stretch)) - 1;
         j <= static_cast<int>(std::ceil(center + 2 * stretch)) + 1; ++j) {
      const double w = keys((j - center) / stretch);
      if (w == 0) continue;
      taps.emplace_back(std::clamp(j, 0, in_len - 1), w);
      sum += w;
    }
    for (auto [j, w] : taps) m[o][j] += w / sum;
  }
  return m;
}

// Full 2-D (non-separated) evaluation: out(Y,X) = sum_j sum_i Wy[Y][j] Wx[X][i] in(j,i).
inline srattack::Image resample_2d(const srattack::Image& in, int out_w, int out_h, double ratio,
                                   double stretch) {
  const auto wx = weight_matrix(in.width(), out_w, ratio, stretch);
  const auto wy = weight_matrix(in.height(), out_h, ratio, stretch);
  srattack::Image out(out_w, out_h);
  for (int Y = 0; Y < out_h; ++Y)
    for (int X = 0; X < out_w; ++X)
      for (int c = 0; c < 3; ++c) {
        double acc = 0;
        for (int j = 0; j < in.height(); ++j) {
          if (wy[Y][j] == 0) continue;
          for (int i = 0; i < in.width(); ++i) acc += wy[Y][j] * wx[X][i] * in.at(j, i, c);
        }
        out.at(Y, X, c) = acc;
      }
  return out;
}

}  // namespace oracle
