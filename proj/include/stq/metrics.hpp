#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "stq/error.hpp"
#include "stq/flow.hpp"
#include "stq/frame.hpp"
#include "stq/masks.hpp"

namespace stq {

/// Mean squared error over every pixel and channel.
inline double mse(const Frame& a, const Frame& b) {
  require_same_shape(a, b, "mse");
  const auto x = a.data();
  const auto y = b.data();
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    sum += d * d;
  }
  return sum / static_cast<double>(x.size());
}

struct SsimConfig {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
};

namespace detail {

inline std::vector<double> gaussian_window(int size, double sigma) {
  std::vector<double> w(size);
  const double center = (size - 1) / 2.0;
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    const double d = i - center;
    w[i] = std::exp(-d * d / (2.0 * sigma * sigma));
    sum += w[i];
  }
  for (double& v : w) v /= sum;
  return w;
}

// Separable Gaussian filter restricted to windows that fit entirely inside
// the frame ("valid" region).
inline std::vector<double> filter_valid(std::span<const double> img, int width, int height,
                                        const std::vector<double>& kernel) {
  const int k = static_cast<int>(kernel.size());
  const int out_w = width - k + 1;
  const int out_h = height - k + 1;
  std::vector<double> rows(static_cast<std::size_t>(out_w) * height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < out_w; ++x) {
      double acc = 0.0;
      for (int i = 0; i < k; ++i) acc += kernel[i] * img[static_cast<std::size_t>(y) * width + x + i];
      rows[static_cast<std::size_t>(y) * out_w + x] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(out_w) * out_h);
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      double acc = 0.0;
      for (int i = 0; i < k; ++i) acc += kernel[i] * rows[static_cast<std::size_t>(y + i) * out_w + x];
      out[static_cast<std::size_t>(y) * out_w + x] = acc;
    }
  }
  return out;
}

}  // namespace detail

/// Mean SSIM over all fully contained Gaussian windows of two single-channel
/// frames.
inline double ssim(const Frame& a, const Frame& b, const SsimConfig& cfg = {}) {
  require_same_shape(a, b, "ssim");
  detail::require(a.channels() == 1, "ssim expects single-channel (luma) frames");
  detail::require(cfg.window >= 1 && cfg.sigma > 0.0, "ssim: invalid window configuration");
  detail::require(a.width() >= cfg.window && a.height() >= cfg.window,
                  "ssim: frame " + a.shape_string() + " is smaller than the " +
                      std::to_string(cfg.window) + "x" + std::to_string(cfg.window) + " window");

  const std::size_t n = a.size();
  std::vector<double> xx(n), yy(n), xy(n);
  for (std::size_t i = 0; i < n; ++i) {
    xx[i] = a.data()[i] * a.data()[i];
    yy[i] = b.data()[i] * b.data()[i];
    xy[i] = a.data()[i] * b.data()[i];
  }
  const auto kernel = detail::gaussian_window(cfg.window, cfg.sigma);
  const int w = a.width();
  const int h = a.height();
  const auto mu_x = detail::filter_valid(a.data(), w, h, kernel);
  const auto mu_y = detail::filter_valid(b.data(), w, h, kernel);
  const auto e_xx = detail::filter_valid(xx, w, h, kernel);
  const auto e_yy = detail::filter_valid(yy, w, h, kernel);
  const auto e_xy = detail::filter_valid(xy, w, h, kernel);

  const double c1 = (cfg.k1 * cfg.dynamic_range) * (cfg.k1 * cfg.dynamic_range);
  const double c2 = (cfg.k2 * cfg.dynamic_range) * (cfg.k2 * cfg.dynamic_range);
  double total = 0.0;
  for (std::size_t i = 0; i < mu_x.size(); ++i) {
    const double mxy = mu_x[i] * mu_y[i];
    const double mxx = mu_x[i] * mu_x[i];
    const double myy = mu_y[i] * mu_y[i];
    const double var_x = e_xx[i] - mxx;
    const double var_y = e_yy[i] - myy;
    const double cov = e_xy[i] - mxy;
    total += ((2.0 * mxy + c1) * (2.0 * cov + c2)) / ((mxx + myy + c1) * (var_x + var_y + c2));
  }
  return total / static_cast<double>(mu_x.size());
}

/// How per-channel squared differences collapse to one value per pixel.
enum class ChannelReduction { Mean, Sum };

struct WarpErrorConfig {
  ChannelReduction reduction = ChannelReduction::Mean;
};

/// E_warp(V_t, V_t+1) and the mask total it is normalized by.
struct PairWarpResult {
  double masked_sum = 0.0;
  double mask_sum = 0.0;

  double normalized() const {
    detail::require(mask_sum > 0.0, "warping error undefined: mask is empty");
    return masked_sum / mask_sum;
  }
};

namespace detail {

inline PairWarpResult masked_residual(const Frame& frame_t, const Frame& next_warped,
                                      std::span<const double> weights,
                                      ChannelReduction reduction) {
  const int ch = frame_t.channels();
  const auto a = frame_t.data();
  const auto b = next_warped.data();
  PairWarpResult r;
  for (std::size_t p = 0; p < weights.size(); ++p) {
    r.mask_sum += weights[p];
    if (weights[p] == 0.0) continue;
    double d2 = 0.0;
    for (int c = 0; c < ch; ++c) {
      const double d = a[p * ch + c] - b[p * ch + c];
      d2 += d * d;
    }
    if (reduction == ChannelReduction::Mean) d2 /= ch;
    r.masked_sum += weights[p] * d2;
  }
  return r;
}

}  // namespace detail

inline PairWarpResult warping_error_pair(const Frame& frame_t, const Frame& frame_next,
                                         const FlowField& flow, const OcclusionMask& mask,
                                         const WarpErrorConfig& cfg = {}) {
  require_same_shape(frame_t, frame_next, "warping_error_pair");
  detail::require(mask.matches(frame_t), "warping_error_pair: mask size differs from frames");
  return detail::masked_residual(frame_t, warp_backward(frame_next, flow), mask.weights(),
                                 cfg.reduction);
}

/// Video warping error: mean over consecutive pairs of the mask-normalized
/// pair error. Throws if any pair has an empty mask.
inline double warping_error_video(const Video& video, std::span<const FlowField> flows,
                                  std::span<const OcclusionMask> masks,
                                  const WarpErrorConfig& cfg = {}) {
  const std::size_t frames = video.frame_count();
  detail::require(frames >= 2, "warping error needs at least 2 frames");
  detail::require(flows.size() == frames - 1 && masks.size() == frames - 1,
                  "warping error needs " + std::to_string(frames - 1) +
                      " flows and masks, got " + std::to_string(flows.size()) + " and " +
                      std::to_string(masks.size()));
  double total = 0.0;
  for (std::size_t t = 0; t + 1 < frames; ++t) {
    const PairWarpResult r = warping_error_pair(video[t], video[t + 1], flows[t], masks[t], cfg);
    detail::require(r.mask_sum > 0.0,
                    "pair " + std::to_string(t) + "->" + std::to_string(t + 1) +
                        " is fully occluded (mask sum 0)");
    total += r.masked_sum / r.mask_sum;
  }
  return total / static_cast<double>(frames - 1);
}

/// Per-video metrics for one method.
struct MetricReport {
  std::string method;
  std::string video;
  double mse = 0.0;
  double ssim = 0.0;
  double warping_error = 0.0;
};

struct MethodSummary {
  double mse = 0.0;
  double ssim = 0.0;
  double warping_error = 0.0;
  std::size_t videos = 0;
};

/// Unweighted mean of per-video values, per method. Summation runs in input
/// order.
inline std::map<std::string, MethodSummary> aggregate_dataset(
    std::span<const MetricReport> reports) {
  detail::require(!reports.empty(), "aggregate_dataset: no reports");
  std::map<std::string, MethodSummary> out;
  for (const MetricReport& r : reports) {
    MethodSummary& s = out[r.method];
    s.mse += r.mse;
    s.ssim += r.ssim;
    s.warping_error += r.warping_error;
    ++s.videos;
  }
  for (auto& [method, s] : out) {
    const double n = static_cast<double>(s.videos);
    s.mse /= n;
    s.ssim /= n;
    s.warping_error /= n;
  }
  return out;
}

}  // namespace stq
