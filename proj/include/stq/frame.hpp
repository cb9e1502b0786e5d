#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stq/error.hpp"

namespace stq {

/// Row-major H x W x C image with real samples. Loaded frames live in [0,1];
/// optimizer iterates and gradients reuse the container without that bound.
class Frame {
public:
  Frame() = default;

  Frame(int width, int height, int channels, double fill = 0.0)
      : width_(width), height_(height), channels_(channels) {
    validate_shape();
    data_.assign(size(), fill);
  }

  Frame(int width, int height, int channels, std::vector<double> data)
      : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
    validate_shape();
    detail::require(data_.size() == size(), "frame data length does not match " +
                                                shape_string());
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }
  std::size_t size() const { return pixel_count() * channels_; }
  bool empty() const { return data_.empty(); }

  double& operator()(int x, int y, int c = 0) { return data_[index(x, y, c)]; }
  double operator()(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }

  std::span<double> data() & { return data_; }
  std::span<const double> data() const& { return data_; }
  std::span<const double> data() const&& = delete;

  std::size_t index(int x, int y, int c = 0) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  bool same_shape(const Frame& other) const {
    return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
  }
  bool same_size(const Frame& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  std::string shape_string() const {
    return std::to_string(width_) + "x" + std::to_string(height_) + "x" +
           std::to_string(channels_);
  }

  Frame clamped() const {
    Frame out = *this;
    for (double& v : out.data_) v = std::clamp(v, 0.0, 1.0);
    return out;
  }

  bool operator==(const Frame&) const = default;

private:
  void validate_shape() const {
    detail::require(width_ > 0 && height_ > 0, "frame dimensions must be positive, got " +
                                                   std::to_string(width_) + "x" +
                                                   std::to_string(height_));
    detail::require(channels_ == 1 || channels_ == 3,
                    "frame must have 1 or 3 channels, got " + std::to_string(channels_));
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

inline void require_same_shape(const Frame& a, const Frame& b, const char* what) {
  detail::require(a.same_shape(b), std::string(what) + ": shape mismatch " + a.shape_string() +
                                       " vs " + b.shape_string());
}

/// Ordered frames of identical shape.
class Video {
public:
  Video() = default;
  explicit Video(std::vector<Frame> frames) : frames_(std::move(frames)) {
    detail::require(!frames_.empty(), "video must contain at least one frame");
    for (std::size_t t = 1; t < frames_.size(); ++t) {
      detail::require(frames_[t].same_shape(frames_[0]),
                      "video frame " + std::to_string(t) + " has shape " +
                          frames_[t].shape_string() + ", expected " + frames_[0].shape_string());
    }
  }

  std::size_t frame_count() const { return frames_.size(); }
  const Frame& operator[](std::size_t t) const { return frames_[t]; }
  const std::vector<Frame>& frames() const { return frames_; }

private:
  std::vector<Frame> frames_;
};

// BT.601 luma weights.
inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

inline Frame rgb_to_luma(const Frame& rgb) {
  detail::require(rgb.channels() == 3,
                  "rgb_to_luma expects 3 channels, got " + std::to_string(rgb.channels()));
  Frame luma(rgb.width(), rgb.height(), 1);
  const auto src = rgb.data();
  auto dst = luma.data();
  for (std::size_t p = 0; p < luma.pixel_count(); ++p) {
    const double y = kLumaR * src[3 * p] + kLumaG * src[3 * p + 1] + kLumaB * src[3 * p + 2];
    dst[p] = std::clamp(y, 0.0, 1.0);
  }
  return luma;
}

/// Keys cubic convolution kernel with a = -0.5 (Catmull-Rom).
inline double cubic_kernel(double x) {
  constexpr double a = -0.5;
  const double ax = std::abs(x);
  const double ax2 = ax * ax;
  const double ax3 = ax2 * ax;
  if (ax <= 1.0) return (a + 2.0) * ax3 - (a + 3.0) * ax2 + 1.0;
  if (ax < 2.0) return a * ax3 - 5.0 * a * ax2 + 8.0 * a * ax - 4.0 * a;
  return 0.0;
}

namespace detail {

struct ResampleTaps {
  std::vector<std::size_t> offset;  // per output sample, start into index/weight
  std::vector<int> index;
  std::vector<double> weight;
};

// Output sample o sits at input coordinate (o + 0.5) / scale - 0.5. When
// minifying the kernel is stretched by 1/scale. Taps are edge-clamped and the
// weights renormalized to sum to one.
inline ResampleTaps resample_taps(int in_len, int out_len, double scale) {
  const double kernel_scale = std::min(scale, 1.0);
  const double support = 2.0 / kernel_scale;
  ResampleTaps taps;
  taps.offset.reserve(out_len + 1);
  for (int o = 0; o < out_len; ++o) {
    taps.offset.push_back(taps.index.size());
    const double center = (o + 0.5) / scale - 0.5;
    const int first = static_cast<int>(std::floor(center - support));
    const int last = static_cast<int>(std::ceil(center + support));
    const std::size_t begin = taps.weight.size();
    double sum = 0.0;
    for (int i = first; i <= last; ++i) {
      const double w = cubic_kernel((i - center) * kernel_scale);
      if (w == 0.0) continue;
      taps.index.push_back(std::clamp(i, 0, in_len - 1));
      taps.weight.push_back(w);
      sum += w;
    }
    for (std::size_t k = begin; k < taps.weight.size(); ++k) taps.weight[k] /= sum;
  }
  taps.offset.push_back(taps.index.size());
  return taps;
}

inline Frame resample(const Frame& f, int out_w, int out_h, double scale_x, double scale_y) {
  const int ch = f.channels();
  const ResampleTaps tx = resample_taps(f.width(), out_w, scale_x);
  const ResampleTaps ty = resample_taps(f.height(), out_h, scale_y);

  Frame horiz(out_w, f.height(), ch);
  for (int y = 0; y < f.height(); ++y) {
    for (int x = 0; x < out_w; ++x) {
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (std::size_t k = tx.offset[x]; k < tx.offset[x + 1]; ++k) {
          acc += tx.weight[k] * f(tx.index[k], y, c);
        }
        horiz(x, y, c) = acc;
      }
    }
  }

  Frame out(out_w, out_h, ch);
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (std::size_t k = ty.offset[y]; k < ty.offset[y + 1]; ++k) {
          acc += ty.weight[k] * horiz(x, ty.index[k], c);
        }
        out(x, y, c) = std::clamp(acc, 0.0, 1.0);
      }
    }
  }
  return out;
}

}  // namespace detail

/// Separable bicubic resampling by `scale` on both axes. Output dimensions are
/// round(input * scale).
inline Frame bicubic_resize(const Frame& f, double scale) {
  detail::require(std::isfinite(scale) && scale > 0.0, "resize scale must be positive");
  const long out_w = std::lround(f.width() * scale);
  const long out_h = std::lround(f.height() * scale);
  detail::require(out_w >= 1 && out_h >= 1,
                  "resize of " + f.shape_string() + " by " + std::to_string(scale) +
                      " produces an empty frame");
  return detail::resample(f, static_cast<int>(out_w), static_cast<int>(out_h), scale, scale);
}

/// Bicubic x4 down-sampling followed by x4 up-sampling back to the input size.
inline Frame degrade_x4(const Frame& f) {
  detail::require(f.width() >= 4 && f.height() >= 4,
                  "degrade_x4 needs at least 4x4 pixels, got " + f.shape_string());
  const Frame low = bicubic_resize(f, 0.25);
  return detail::resample(low, f.width(), f.height(), 4.0, 4.0);
}

}  // namespace stq
