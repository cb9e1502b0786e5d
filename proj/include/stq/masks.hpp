#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "stq/error.hpp"
#include "stq/flow.hpp"
#include "stq/frame.hpp"

namespace stq {

namespace detail {

class MaskData {
public:
  MaskData() = default;
  MaskData(int width, int height, std::vector<double> weights)
      : width_(width), height_(height), weights_(std::move(weights)) {
    require(width > 0 && height > 0, "mask dimensions must be positive");
    require(weights_.size() == static_cast<std::size_t>(width) * height,
            "mask data length does not match " + std::to_string(width) + "x" +
                std::to_string(height));
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const { return weights_.size(); }
  double operator()(int x, int y) const {
    return weights_[static_cast<std::size_t>(y) * width_ + x];
  }
  std::span<const double> weights() const& { return weights_; }
  std::span<const double> weights() const&& = delete;
  bool matches(const Frame& f) const { return width_ == f.width() && height_ == f.height(); }

  double sum() const {
    double s = 0.0;
    for (double w : weights_) s += w;
    return s;
  }

  /// Single-channel frame view, for PNG export.
  Frame to_frame() const { return Frame(width_, height_, 1, weights_); }

protected:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> weights_;
};

}  // namespace detail

/// Binary validity mask: 1 where a pixel has a reliable correspondence.
class OcclusionMask : public detail::MaskData {
public:
  OcclusionMask() = default;
  OcclusionMask(int width, int height, std::vector<double> values)
      : MaskData(width, height, std::move(values)) {
    for (double v : weights_) detail::require(v == 0.0 || v == 1.0, "occlusion mask must be 0/1");
  }

  static OcclusionMask full(int width, int height) {
    return OcclusionMask(width, height,
                         std::vector<double>(static_cast<std::size_t>(width) * height, 1.0));
  }
};

/// Continuous weights in [0,1].
class SoftMask : public detail::MaskData {
public:
  SoftMask() = default;
  SoftMask(int width, int height, std::vector<double> values)
      : MaskData(width, height, std::move(values)) {
    for (double v : weights_) {
      detail::require(std::isfinite(v) && v >= 0.0 && v <= 1.0, "soft mask weight outside [0,1]");
    }
  }
};

/// Thresholds of the forward-backward consistency test
/// |fw + bw'|^2 <= relative * (|fw|^2 + |bw'|^2) + absolute.
struct FbConsistencyConfig {
  double relative = 0.01;
  double absolute = 0.5;
};

inline OcclusionMask fb_consistency_mask(const FlowField& forward, const FlowField& backward,
                                         const FbConsistencyConfig& cfg = {}) {
  detail::require(forward.same_size(backward), "fb_consistency_mask: flow sizes differ");
  detail::require(cfg.relative >= 0.0 && cfg.absolute >= 0.0,
                  "fb_consistency_mask: thresholds must be non-negative");
  const int w = forward.width();
  const int h = forward.height();
  std::vector<double> valid(forward.pixel_count(), 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double fu = forward.u(x, y);
      const double fv = forward.v(x, y);
      const double tx = x + fu;
      const double ty = y + fv;
      if (tx < 0.0 || ty < 0.0 || tx > w - 1 || ty > h - 1) continue;
      const auto t = detail::bilinear_taps(tx, ty, w, h);
      const double bu = t.w00 * backward.u(t.x0, t.y0) + t.w10 * backward.u(t.x1, t.y0) +
                        t.w01 * backward.u(t.x0, t.y1) + t.w11 * backward.u(t.x1, t.y1);
      const double bv = t.w00 * backward.v(t.x0, t.y0) + t.w10 * backward.v(t.x1, t.y0) +
                        t.w01 * backward.v(t.x0, t.y1) + t.w11 * backward.v(t.x1, t.y1);
      const double du = fu + bu;
      const double dv = fv + bv;
      const double lhs = du * du + dv * dv;
      const double rhs =
          cfg.relative * (fu * fu + fv * fv + bu * bu + bv * bv) + cfg.absolute;
      if (lhs <= rhs) valid[static_cast<std::size_t>(y) * w + x] = 1.0;
    }
  }
  return OcclusionMask(w, h, std::move(valid));
}

inline constexpr double kDefaultMaskSharpness = 50.0;

/// M(p) = exp(-sharpness * d(p)^2), d^2 the channel mean of squared differences.
inline SoftMask soft_mask(const Frame& frame_t, const Frame& next_warped,
                          double sharpness = kDefaultMaskSharpness) {
  require_same_shape(frame_t, next_warped, "soft_mask");
  detail::require(std::isfinite(sharpness) && sharpness > 0.0,
                  "soft_mask: sharpness must be positive");
  const int ch = frame_t.channels();
  const auto a = frame_t.data();
  const auto b = next_warped.data();
  std::vector<double> weights(frame_t.pixel_count());
  for (std::size_t p = 0; p < weights.size(); ++p) {
    double d2 = 0.0;
    for (int c = 0; c < ch; ++c) {
      const double d = a[p * ch + c] - b[p * ch + c];
      d2 += d * d;
    }
    weights[p] = std::exp(-sharpness * (d2 / ch));
  }
  return SoftMask(frame_t.width(), frame_t.height(), std::move(weights));
}

}  // namespace stq
