#pragma once

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "stq/error.hpp"
#include "stq/frame.hpp"

namespace stq {

namespace detail {

struct PngHeader {
  int bit_depth = 0;
  int color_type = 0;
};

// Reads the IHDR chunk directly; libpng's simplified reader would silently
// convert 16-bit, palette and alpha images, which we reject instead.
inline PngHeader read_png_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  detail::require(static_cast<bool>(in), path.string() + ": cannot open file");
  std::array<unsigned char, 26> head{};
  in.read(reinterpret_cast<char*>(head.data()), head.size());
  detail::require(in.gcount() == static_cast<std::streamsize>(head.size()),
                  path.string() + ": file too short to be a PNG");
  detail::require(png_sig_cmp(head.data(), 0, 8) == 0, path.string() + ": not a PNG file");
  detail::require(std::equal(head.begin() + 12, head.begin() + 16, "IHDR"),
                  path.string() + ": missing IHDR chunk");
  return {head[24], head[25]};
}

inline unsigned char quantize(double v) {
  return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace detail

/// Loads an 8-bit grayscale or RGB PNG as a Frame with samples in [0,1].
inline Frame load_frame(const std::filesystem::path& path) {
  const detail::PngHeader header = detail::read_png_header(path);
  detail::require(header.bit_depth == 8, path.string() + ": unsupported bit depth " +
                                             std::to_string(header.bit_depth) + " (need 8)");
  int channels = 0;
  if (header.color_type == PNG_COLOR_TYPE_GRAY) {
    channels = 1;
  } else if (header.color_type == PNG_COLOR_TYPE_RGB) {
    channels = 3;
  } else {
    throw Error(path.string() + ": unsupported PNG color type " +
                std::to_string(header.color_type) + " (need grayscale or RGB)");
  }

  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
    throw Error(path.string() + ": " + image.message);
  }
  image.format = channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  std::vector<unsigned char> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(path.string() + ": " + msg);
  }

  std::vector<double> samples(buffer.size());
  std::transform(buffer.begin(), buffer.end(), samples.begin(),
                 [](unsigned char b) { return b / 255.0; });
  return Frame(static_cast<int>(image.width), static_cast<int>(image.height), channels,
               std::move(samples));
}

/// Writes a Frame as an 8-bit PNG. Samples are clamped to [0,1] and rounded.
inline void save_frame(const Frame& f, const std::filesystem::path& path) {
  std::vector<unsigned char> buffer(f.size());
  std::transform(f.data().begin(), f.data().end(), buffer.begin(), detail::quantize);
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(f.width());
  image.height = static_cast<png_uint_32>(f.height());
  image.format = f.channels() == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, buffer.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(path.string() + ": cannot write PNG: " + msg);
  }
}

/// `%06d` file name for frame or pair index t.
inline std::string frame_stem(std::size_t t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu", t);
  return buf;
}

/// PNG files in `dir` whose stem is numeric, ordered by that number.
inline std::vector<std::filesystem::path> list_frames(const std::filesystem::path& dir) {
  detail::require(std::filesystem::is_directory(dir), dir.string() + ": not a directory");
  std::map<long long, std::filesystem::path> ordered;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".png") continue;
    const std::string stem = entry.path().stem().string();
    if (stem.empty() || !std::all_of(stem.begin(), stem.end(), ::isdigit)) continue;
    ordered.emplace(std::stoll(stem), entry.path());
  }
  std::vector<std::filesystem::path> out;
  out.reserve(ordered.size());
  for (auto& [index, path] : ordered) out.push_back(path);
  return out;
}

inline Video load_video(const std::filesystem::path& dir) {
  const auto paths = list_frames(dir);
  detail::require(!paths.empty(), dir.string() + ": no numbered PNG frames");
  std::vector<Frame> frames;
  frames.reserve(paths.size());
  for (const auto& p : paths) frames.push_back(load_frame(p));
  return Video(std::move(frames));
}

inline void save_video(const Video& video, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (std::size_t t = 0; t < video.frame_count(); ++t) {
    save_frame(video[t], dir / (frame_stem(t) + ".png"));
  }
}

}  // namespace stq
