#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "stq/error.hpp"
#include "stq/frame.hpp"

namespace stq {

/// Per-pixel displacement (u, v) in pixels. flow(p) is stored at pixel p of
/// frame t and points at the corresponding location p + flow(p) in frame t+1.
class FlowField {
public:
  /// Magnitudes above this are treated as "unknown flow" sentinels.
  static constexpr double kMaxMagnitude = 1e9;

  FlowField() = default;

  FlowField(int width, int height) : width_(width), height_(height) {
    validate_shape();
    data_.assign(2 * static_cast<std::size_t>(width) * height, 0.0f);
  }

  FlowField(int width, int height, std::vector<float> uv)
      : width_(width), height_(height), data_(std::move(uv)) {
    validate_shape();
    detail::require(data_.size() == 2 * static_cast<std::size_t>(width) * height,
                    "flow data length does not match " + std::to_string(width) + "x" +
                        std::to_string(height));
    for (float v : data_) {
      detail::require(std::isfinite(v) && std::abs(v) <= kMaxMagnitude,
                      "flow contains a non-finite or sentinel component");
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }

  float u(int x, int y) const { return data_[2 * (static_cast<std::size_t>(y) * width_ + x)]; }
  float v(int x, int y) const {
    return data_[2 * (static_cast<std::size_t>(y) * width_ + x) + 1];
  }
  void set(int x, int y, float u, float v) {
    const std::size_t i = 2 * (static_cast<std::size_t>(y) * width_ + x);
    data_[i] = u;
    data_[i + 1] = v;
  }

  std::span<const float> data() const& { return data_; }
  std::span<const float> data() const&& = delete;

  bool matches(const Frame& f) const { return width_ == f.width() && height_ == f.height(); }
  bool same_size(const FlowField& o) const { return width_ == o.width_ && height_ == o.height_; }

  bool operator==(const FlowField&) const = default;

private:
  void validate_shape() const {
    detail::require(width_ > 0 && height_ > 0, "flow dimensions must be positive");
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<float> data_;
};

inline constexpr float kFloMagic = 202021.25f;

namespace detail {

static_assert(std::endian::native == std::endian::little,
              ".flo codec assumes a little-endian host");

template <class T>
void write_le(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
bool read_le(std::istream& in, T& value) {
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  return in.gcount() == static_cast<std::streamsize>(sizeof(T));
}

}  // namespace detail

/// Reads a Middlebury `.flo` file.
inline FlowField read_flo(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  detail::require(static_cast<bool>(in), path.string() + ": cannot open flow file");
  float magic = 0.0f;
  std::int32_t width = 0;
  std::int32_t height = 0;
  detail::require(detail::read_le(in, magic), path.string() + ": truncated header");
  detail::require(magic == kFloMagic, path.string() + ": bad magic");
  detail::require(detail::read_le(in, width) && detail::read_le(in, height),
                  path.string() + ": truncated header");
  detail::require(width > 0 && height > 0, path.string() + ": non-positive dimensions " +
                                               std::to_string(width) + "x" +
                                               std::to_string(height));
  std::vector<float> uv(2 * static_cast<std::size_t>(width) * height);
  in.read(reinterpret_cast<char*>(uv.data()),
          static_cast<std::streamsize>(uv.size() * sizeof(float)));
  detail::require(in.gcount() == static_cast<std::streamsize>(uv.size() * sizeof(float)),
                  path.string() + ": truncated payload");
  return FlowField(width, height, std::move(uv));
}

inline void write_flo(const FlowField& flow, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  detail::require(static_cast<bool>(out), path.string() + ": cannot open for writing");
  detail::write_le(out, kFloMagic);
  detail::write_le(out, static_cast<std::int32_t>(flow.width()));
  detail::write_le(out, static_cast<std::int32_t>(flow.height()));
  out.write(reinterpret_cast<const char*>(flow.data().data()),
            static_cast<std::streamsize>(flow.data().size_bytes()));
  detail::require(static_cast<bool>(out), path.string() + ": write failed");
}

inline FlowField synth_translation_flow(int width, int height, double dx, double dy) {
  detail::require(std::isfinite(dx) && std::isfinite(dy), "translation must be finite");
  FlowField flow(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) flow.set(x, y, static_cast<float>(dx), static_cast<float>(dy));
  return flow;
}

namespace detail {

/// Four edge-clamped bilinear taps for sampling at (sx, sy).
struct BilinearTaps {
  int x0, x1, y0, y1;
  double w00, w10, w01, w11;
};

inline BilinearTaps bilinear_taps(double sx, double sy, int width, int height) {
  const double fx = std::floor(sx);
  const double fy = std::floor(sy);
  const double ax = sx - fx;
  const double ay = sy - fy;
  const auto clamp_x = [&](double i) {
    return static_cast<int>(std::clamp(i, 0.0, static_cast<double>(width - 1)));
  };
  const auto clamp_y = [&](double i) {
    return static_cast<int>(std::clamp(i, 0.0, static_cast<double>(height - 1)));
  };
  return {clamp_x(fx),
          clamp_x(fx + 1.0),
          clamp_y(fy),
          clamp_y(fy + 1.0),
          (1.0 - ax) * (1.0 - ay),
          ax * (1.0 - ay),
          (1.0 - ax) * ay,
          ax * ay};
}

inline void require_flow_matches(const Frame& f, const FlowField& flow, const char* what) {
  detail::require(flow.matches(f), std::string(what) + ": frame " + f.shape_string() +
                                       " and flow " + std::to_string(flow.width()) + "x" +
                                       std::to_string(flow.height()) + " differ in size");
}

}  // namespace detail

/// out(p) = f(p + flow(p)), bilinear with edge clamp.
inline Frame warp_backward(const Frame& f, const FlowField& flow) {
  detail::require_flow_matches(f, flow, "warp_backward");
  const int ch = f.channels();
  Frame out(f.width(), f.height(), ch);
  for (int y = 0; y < f.height(); ++y) {
    for (int x = 0; x < f.width(); ++x) {
      const auto t = detail::bilinear_taps(x + static_cast<double>(flow.u(x, y)),
                                           y + static_cast<double>(flow.v(x, y)), f.width(),
                                           f.height());
      for (int c = 0; c < ch; ++c) {
        out(x, y, c) = t.w00 * f(t.x0, t.y0, c) + t.w10 * f(t.x1, t.y0, c) +
                       t.w01 * f(t.x0, t.y1, c) + t.w11 * f(t.x1, t.y1, c);
      }
    }
  }
  return out;
}

/// Transpose of warp_backward: scatters g(p) onto the bilinear taps of p + flow(p).
inline Frame warp_adjoint(const Frame& g, const FlowField& flow) {
  detail::require_flow_matches(g, flow, "warp_adjoint");
  const int ch = g.channels();
  Frame out(g.width(), g.height(), ch);
  for (int y = 0; y < g.height(); ++y) {
    for (int x = 0; x < g.width(); ++x) {
      const auto t = detail::bilinear_taps(x + static_cast<double>(flow.u(x, y)),
                                           y + static_cast<double>(flow.v(x, y)), g.width(),
                                           g.height());
      for (int c = 0; c < ch; ++c) {
        const double v = g(x, y, c);
        out(t.x0, t.y0, c) += t.w00 * v;
        out(t.x1, t.y0, c) += t.w10 * v;
        out(t.x0, t.y1, c) += t.w01 * v;
        out(t.x1, t.y1, c) += t.w11 * v;
      }
    }
  }
  return out;
}

}  // namespace stq
