#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "stq/error.hpp"
#include "stq/flow.hpp"
#include "stq/frame.hpp"
#include "stq/image_io.hpp"
#include "stq/joint_loss.hpp"
#include "stq/masks.hpp"
#include "stq/metrics.hpp"
#include "stq/parallel.hpp"

namespace stq {

// ---------------------------------------------------------------------------
// Tradeoff sweep

struct TradeoffRecord {
  double beta = 0.0;
  double mse = 0.0;
  double one_minus_ssim = 0.0;
  double warping_error = 0.0;
  double spatial_loss = 0.0;
  double temporal_loss = 0.0;
  std::size_t iterations = 0;
  StopReason stop = StopReason::MaxIterations;
};

struct TradeoffCurve {
  std::vector<TradeoffRecord> records;
  /// Normalized full-mask warping error of the HR pair itself.
  double hr_warping_error = 0.0;
  /// Non-fatal problems, e.g. a degenerate HR pair.
  std::vector<std::string> warnings;
};

/// SSIM between two frames of any channel count; RGB is compared on luma.
inline double luma_ssim(const Frame& a, const Frame& b) {
  if (a.channels() == 3) return ssim(rgb_to_luma(a), rgb_to_luma(b));
  return ssim(a, b);
}

/// Normalized warping error with every pixel valid.
inline double full_mask_warping_error(const Frame& frame_t, const Frame& frame_next,
                                      const FlowField& flow) {
  return warping_error_pair(frame_t, frame_next, flow,
                            OcclusionMask::full(frame_t.width(), frame_t.height()))
      .normalized();
}

/// One minimize run per beta from a shared initialization. Metrics of each
/// optimum are measured on the clamped frames. Records come back in beta order.
inline TradeoffCurve beta_sweep(const Frame& hr_t, const Frame& hr_next, const FlowField& flow,
                                const std::vector<double>& betas, const LossConfig& cfg,
                                const Frame& init_t, const Frame& init_next,
                                unsigned threads = 0) {
  detail::require(!betas.empty(), "beta_sweep: empty beta list");
  for (std::size_t i = 0; i < betas.size(); ++i) {
    detail::require(std::isfinite(betas[i]) && betas[i] >= 0.0,
                    "beta_sweep: betas must be finite and non-negative");
    detail::require(i == 0 || betas[i] > betas[i - 1], "beta_sweep: betas must be increasing");
  }
  require_same_shape(hr_t, hr_next, "beta_sweep");
  require_same_shape(init_t, hr_t, "beta_sweep (init_t)");
  require_same_shape(init_next, hr_next, "beta_sweep (init_next)");

  TradeoffCurve curve;
  curve.hr_warping_error = full_mask_warping_error(hr_t, hr_next, flow);
  if (curve.hr_warping_error == 0.0) {
    curve.warnings.push_back(
        "degenerate HR pair: zero warping error, the tradeoff curve is flat");
  }

  curve.records.resize(betas.size());
  parallel_for(betas.size(), threads, [&](std::size_t i) {
    LossConfig run_cfg = cfg;
    run_cfg.beta = betas[i];
    const MinimizeResult r = minimize(hr_t, hr_next, flow, init_t, init_next, run_cfg);
    const Frame sr_t = r.sr_t.clamped();
    const Frame sr_next = r.sr_next.clamped();
    const LossBreakdown& last = r.trace.back();
    TradeoffRecord& rec = curve.records[i];
    rec.beta = betas[i];
    rec.mse = mse(sr_t, hr_t);
    rec.one_minus_ssim = 1.0 - luma_ssim(sr_t, hr_t);
    rec.warping_error = full_mask_warping_error(sr_t, sr_next, flow);
    rec.spatial_loss = last.spatial_t + last.spatial_next;
    rec.temporal_loss = last.temporal;
    rec.iterations = r.trace.size() - 1;
    rec.stop = r.stop;
  });
  return curve;
}

/// Sweep initialized from the bicubic x4 degradation of the HR pair.
inline TradeoffCurve beta_sweep(const Frame& hr_t, const Frame& hr_next, const FlowField& flow,
                                const std::vector<double>& betas, const LossConfig& cfg,
                                unsigned threads = 0) {
  return beta_sweep(hr_t, hr_next, flow, betas, cfg, degrade_x4(hr_t), degrade_x4(hr_next),
                    threads);
}

inline const std::vector<double>& default_betas() {
  static const std::vector<double> betas{0.0, 0.01, 0.1, 1.0, 10.0, 100.0};
  return betas;
}

struct CurveCheck {
  bool ok = true;
  std::vector<std::string> failures;
};

/// Checks the spatial-temporal tradeoff shape: warping error non-increasing,
/// MSE and 1-SSIM non-decreasing in beta, each with slack `rel_slack` times
/// the column maximum.
inline CurveCheck validate_tradeoff(const TradeoffCurve& curve, double rel_slack = 1e-6) {
  CurveCheck check;
  const auto fail = [&](std::string msg) {
    check.ok = false;
    check.failures.push_back(std::move(msg));
  };
  const auto& rs = curve.records;
  if (rs.empty()) {
    fail("empty curve");
    return check;
  }
  double max_mse = 0.0, max_ssim = 0.0, max_warp = 0.0;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    const TradeoffRecord& r = rs[i];
    if (i > 0 && !(r.beta > rs[i - 1].beta)) fail("betas not strictly increasing");
    for (double v : {r.mse, r.warping_error, r.spatial_loss, r.temporal_loss}) {
      if (!std::isfinite(v) || v < 0.0) fail("non-finite or negative value at beta " + std::to_string(r.beta));
    }
    if (!std::isfinite(r.one_minus_ssim) || r.one_minus_ssim < -1e-9) {
      fail("invalid 1-SSIM at beta " + std::to_string(r.beta));
    }
    max_mse = std::max(max_mse, r.mse);
    max_ssim = std::max(max_ssim, std::abs(r.one_minus_ssim));
    max_warp = std::max(max_warp, r.warping_error);
  }
  for (std::size_t i = 1; i < rs.size(); ++i) {
    const std::string at = " between beta " + std::to_string(rs[i - 1].beta) + " and " +
                           std::to_string(rs[i].beta);
    if (rs[i].warping_error > rs[i - 1].warping_error + rel_slack * max_warp) {
      fail("warping error increases" + at);
    }
    if (rs[i].mse < rs[i - 1].mse - rel_slack * max_mse) fail("MSE decreases" + at);
    if (rs[i].one_minus_ssim < rs[i - 1].one_minus_ssim - rel_slack * max_ssim) {
      fail("1-SSIM decreases" + at);
    }
  }
  return check;
}

inline constexpr const char* kTradeoffHeader =
    "# beta mse one_minus_ssim warping_error spatial_loss temporal_loss";

/// Whitespace-separated columns, one header comment line.
inline void emit_gnuplot_data(const TradeoffCurve& curve, const std::filesystem::path& path) {
  detail::require(!curve.records.empty(), "emit_gnuplot_data: empty curve");
  std::ofstream out(path);
  detail::require(static_cast<bool>(out), path.string() + ": cannot open for writing");
  out << kTradeoffHeader << '\n';
  char line[256];
  for (const TradeoffRecord& r : curve.records) {
    std::snprintf(line, sizeof line, "%.9g %.9g %.9g %.9g %.9g %.9g\n", r.beta, r.mse,
                  r.one_minus_ssim, r.warping_error, r.spatial_loss, r.temporal_loss);
    out << line;
  }
  detail::require(static_cast<bool>(out), path.string() + ": write failed");
}

/// Parses a file written by emit_gnuplot_data (comment lines skipped).
inline TradeoffCurve read_gnuplot_data(const std::filesystem::path& path) {
  std::ifstream in(path);
  detail::require(static_cast<bool>(in), path.string() + ": cannot open");
  TradeoffCurve curve;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    TradeoffRecord r;
    row >> r.beta >> r.mse >> r.one_minus_ssim >> r.warping_error >> r.spatial_loss >>
        r.temporal_loss;
    detail::require(static_cast<bool>(row), path.string() + ": malformed row: " + line);
    curve.records.push_back(r);
  }
  return curve;
}

// ---------------------------------------------------------------------------
// Synthetic corpus

struct SynthCorpusConfig {
  int width = 64;
  int height = 48;
  int channels = 3;
  int frames = 4;
  int static_videos = 2;
  int pan_videos = 1;
  /// Integer horizontal pan per frame, in pixels.
  int pan_dx = 2;
  /// Per-frame sensor noise on the HR frames.
  double hr_noise = 0.01;
  /// Noise level of the two noisy "methods".
  double method_noise = 0.03;
  std::uint64_t seed = 1;
};

struct SynthVideo {
  std::string name;
  Video hr;
  std::vector<FlowField> forward;
  std::vector<FlowField> backward;
};

struct SynthCorpus {
  std::vector<SynthVideo> videos;
  /// method name -> one SR video per entry of `videos`
  std::map<std::string, std::vector<Video>> methods;
};

namespace detail {

struct TextureParams {
  double fx[3], fy[3], phase[3], amp[3];
};

inline double texture(const TextureParams& p, double x, double y, int c) {
  double v = 0.5;
  for (int k = 0; k < 3; ++k) {
    v += p.amp[k] * std::sin(2.0 * M_PI * (p.fx[k] * x + p.fy[k] * y) + p.phase[k] + 0.7 * c);
  }
  return std::clamp(v, 0.0, 1.0);
}

inline Frame add_noise(const Frame& f, const Frame& noise) {
  Frame out = f;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += noise.data()[i];
  return out.clamped();
}

inline Frame gaussian_field(int w, int h, int ch, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, sigma);
  Frame f(w, h, ch);
  for (double& v : f.data()) v = dist(rng);
  return f;
}

// Round to the 8-bit grid so in-memory and on-disk corpora agree.
inline Frame quantized(const Frame& f) {
  Frame out = f.clamped();
  for (double& v : out.data()) v = std::round(v * 255.0) / 255.0;
  return out;
}

}  // namespace detail

/// Static textured scenes and horizontally panning scenes with exact flows,
/// plus four SR "methods": identity, bicubic (degrade_x4), independent
/// per-frame noise and one noise field repeated on every frame.
inline SynthCorpus synth_corpus(const SynthCorpusConfig& cfg) {
  detail::require(cfg.width >= 11 && cfg.height >= 11, "synth corpus frames must be >= 11x11");
  detail::require(cfg.channels == 1 || cfg.channels == 3, "synth corpus channels must be 1 or 3");
  detail::require(cfg.frames >= 2, "synth corpus needs at least 2 frames per video");
  detail::require(cfg.static_videos >= 0 && cfg.pan_videos >= 0 &&
                      cfg.static_videos + cfg.pan_videos > 0,
                  "synth corpus needs at least one video");
  detail::require(cfg.pan_dx >= 0 && cfg.pan_dx < cfg.width, "pan_dx out of range");

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> freq(0.12, 0.3);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  std::uniform_real_distribution<double> amp(0.08, 0.14);

  SynthCorpus corpus;
  const int total = cfg.static_videos + cfg.pan_videos;
  for (int v = 0; v < total; ++v) {
    const bool pan = v >= cfg.static_videos;
    detail::TextureParams tex{};
    for (int k = 0; k < 3; ++k) {
      const double theta = angle(rng);
      const double f = freq(rng);
      tex.fx[k] = f * std::cos(theta);
      tex.fy[k] = f * std::sin(theta);
      tex.phase[k] = angle(rng);
      tex.amp[k] = amp(rng);
    }
    const int dx = pan ? cfg.pan_dx : 0;
    char name[32];
    std::snprintf(name, sizeof name, "%s_%02d", pan ? "pan" : "static",
                  pan ? v - cfg.static_videos : v);

    std::vector<Frame> frames;
    for (int t = 0; t < cfg.frames; ++t) {
      Frame f(cfg.width, cfg.height, cfg.channels);
      for (int y = 0; y < cfg.height; ++y)
        for (int x = 0; x < cfg.width; ++x)
          for (int c = 0; c < cfg.channels; ++c)
            f(x, y, c) = detail::texture(tex, x - static_cast<double>(t) * dx, y, c);
      const Frame noise =
          detail::gaussian_field(cfg.width, cfg.height, cfg.channels, cfg.hr_noise, rng);
      frames.push_back(detail::quantized(detail::add_noise(f, noise)));
    }
    SynthVideo video{name, Video(std::move(frames)), {}, {}};
    for (int t = 0; t + 1 < cfg.frames; ++t) {
      video.forward.push_back(synth_translation_flow(cfg.width, cfg.height, dx, 0.0));
      video.backward.push_back(synth_translation_flow(cfg.width, cfg.height, -dx, 0.0));
    }
    corpus.videos.push_back(std::move(video));
  }

  for (const SynthVideo& v : corpus.videos) {
    std::vector<Frame> identity, bicubic, independent, repeated;
    const Frame fixed_noise =
        detail::gaussian_field(cfg.width, cfg.height, cfg.channels, cfg.method_noise, rng);
    for (const Frame& f : v.hr.frames()) {
      identity.push_back(f);
      bicubic.push_back(detail::quantized(degrade_x4(f)));
      independent.push_back(detail::quantized(detail::add_noise(
          f, detail::gaussian_field(cfg.width, cfg.height, cfg.channels, cfg.method_noise, rng))));
      repeated.push_back(detail::quantized(detail::add_noise(f, fixed_noise)));
    }
    corpus.methods["identity"].emplace_back(std::move(identity));
    corpus.methods["bicubic"].emplace_back(std::move(bicubic));
    corpus.methods["independent_noise"].emplace_back(std::move(independent));
    corpus.methods["repeated_noise"].emplace_back(std::move(repeated));
  }
  return corpus;
}

inline std::string forward_flow_name(std::size_t t) { return "fw_" + frame_stem(t) + ".flo"; }
inline std::string backward_flow_name(std::size_t t) { return "bw_" + frame_stem(t) + ".flo"; }

/// Writes hr/, sr/<method>/, flows/ and manifest.ini under `root`.
inline std::filesystem::path write_synth_corpus(const SynthCorpus& corpus,
                                                const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  fs::create_directories(root);
  for (std::size_t i = 0; i < corpus.videos.size(); ++i) {
    const SynthVideo& v = corpus.videos[i];
    save_video(v.hr, root / "hr" / v.name);
    const fs::path flow_dir = root / "flows" / v.name;
    fs::create_directories(flow_dir);
    for (std::size_t t = 0; t < v.forward.size(); ++t) {
      write_flo(v.forward[t], flow_dir / forward_flow_name(t));
      write_flo(v.backward[t], flow_dir / backward_flow_name(t));
    }
    for (const auto& [method, videos] : corpus.methods) {
      save_video(videos[i], root / "sr" / method / v.name);
    }
  }
  const fs::path manifest = root / "manifest.ini";
  std::ofstream out(manifest);
  detail::require(static_cast<bool>(out), manifest.string() + ": cannot open for writing");
  out << "[data]\nhr = hr\nflows = flows\n\n[methods]\n";
  for (const auto& [method, videos] : corpus.methods) out << method << " = sr/" << method << "\n";
  out << "\n[masks]\nmode = fb\nfb_relative = 0.01\nfb_absolute = 0.5\n\n"
      << "[metrics]\nchannel_reduction = mean\n\n[output]\ndir = out\n";
  detail::require(static_cast<bool>(out), manifest.string() + ": write failed");
  return manifest;
}

// ---------------------------------------------------------------------------
// Batch evaluation

enum class MaskMode { ForwardBackward, Full };

struct EvalManifest {
  std::filesystem::path hr_root;
  std::filesystem::path flow_root;
  /// method name -> SR root, one subdirectory per video
  std::map<std::string, std::filesystem::path> methods;
  MaskMode mask_mode = MaskMode::ForwardBackward;
  FbConsistencyConfig fb;
  WarpErrorConfig warp;
  std::filesystem::path output_dir;
};

/// Reads an INI manifest. Relative paths resolve against the manifest's
/// directory.
inline EvalManifest load_manifest(const std::filesystem::path& path) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(path.string() + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  const std::filesystem::path base = path.parent_path();
  const auto resolve = [&](const std::string& p) {
    const std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : base / fp;
  };
  const auto required = [&](const char* key) {
    const auto v = tree.get_optional<std::string>(key);
    detail::require(v.has_value() && !v->empty(), path.string() + ": missing key " + key);
    return *v;
  };

  EvalManifest m;
  m.hr_root = resolve(required("data.hr"));
  m.flow_root = resolve(required("data.flows"));
  m.output_dir = resolve(tree.get<std::string>("output.dir", "out"));
  if (const auto methods = tree.get_child_optional("methods")) {
    for (const auto& [name, node] : *methods) {
      detail::require(!m.methods.contains(name), path.string() + ": duplicate method " + name);
      m.methods[name] = resolve(node.data());
    }
  }
  detail::require(!m.methods.empty(), path.string() + ": [methods] section is empty");

  const std::string mode = tree.get<std::string>("masks.mode", "fb");
  if (mode == "fb") {
    m.mask_mode = MaskMode::ForwardBackward;
  } else if (mode == "full") {
    m.mask_mode = MaskMode::Full;
  } else {
    throw Error(path.string() + ": masks.mode must be 'fb' or 'full', got '" + mode + "'");
  }
  try {
    m.fb.relative = tree.get<double>("masks.fb_relative", m.fb.relative);
    m.fb.absolute = tree.get<double>("masks.fb_absolute", m.fb.absolute);
  } catch (const pt::ptree_bad_data&) {
    throw Error(path.string() + ": fb thresholds must be numbers");
  }
  const std::string reduction = tree.get<std::string>("metrics.channel_reduction", "mean");
  if (reduction == "mean") {
    m.warp.reduction = ChannelReduction::Mean;
  } else if (reduction == "sum") {
    m.warp.reduction = ChannelReduction::Sum;
  } else {
    throw Error(path.string() + ": metrics.channel_reduction must be 'mean' or 'sum'");
  }
  return m;
}

struct EvaluationResult {
  /// Sorted by (method, video).
  std::vector<MetricReport> reports;
  std::map<std::string, MethodSummary> summary;
  /// "method/video: reason" for every video that could not be scored.
  std::vector<std::string> failures;
};

namespace detail {

struct VideoReference {
  std::string name;
  Video hr;
  std::vector<FlowField> flows;
  std::vector<OcclusionMask> masks;
  std::string error;
};

inline VideoReference load_reference(const EvalManifest& m, const std::string& name) {
  VideoReference ref{name, {}, {}, {}, {}};
  try {
    ref.hr = load_video(m.hr_root / name);
    const std::size_t pairs = ref.hr.frame_count() - 1;
    require(pairs >= 1, "needs at least 2 frames");
    for (std::size_t t = 0; t < pairs; ++t) {
      const std::filesystem::path dir = m.flow_root / name;
      FlowField fw = read_flo(dir / forward_flow_name(t));
      require(fw.matches(ref.hr[0]), (dir / forward_flow_name(t)).string() +
                                         ": flow size differs from frames");
      if (m.mask_mode == MaskMode::ForwardBackward) {
        FlowField bw = read_flo(dir / backward_flow_name(t));
        ref.masks.push_back(fb_consistency_mask(fw, bw, m.fb));
      } else {
        ref.masks.push_back(OcclusionMask::full(fw.width(), fw.height()));
      }
      ref.flows.push_back(std::move(fw));
    }
  } catch (const std::exception& e) {
    ref.error = e.what();
  }
  return ref;
}

inline MetricReport score_video(const std::string& method, const VideoReference& ref,
                                const Video& sr, const WarpErrorConfig& warp) {
  require(sr.frame_count() == ref.hr.frame_count(),
          "frame count " + std::to_string(sr.frame_count()) + " differs from HR " +
              std::to_string(ref.hr.frame_count()));
  require(sr[0].same_shape(ref.hr[0]),
          "frame shape " + sr[0].shape_string() + " differs from HR " + ref.hr[0].shape_string());
  MetricReport r{method, ref.name, 0.0, 0.0, 0.0};
  for (std::size_t t = 0; t < sr.frame_count(); ++t) {
    r.mse += mse(sr[t], ref.hr[t]);
    r.ssim += luma_ssim(sr[t], ref.hr[t]);
  }
  r.mse /= static_cast<double>(sr.frame_count());
  r.ssim /= static_cast<double>(sr.frame_count());
  r.warping_error = warping_error_video(sr, ref.flows, ref.masks, warp);
  return r;
}

}  // namespace detail

/// Scores every method against the HR videos. Videos are the subdirectories
/// of the HR root. Failures are recorded per (method, video) and do not stop
/// the batch. Output order is independent of scheduling.
inline EvaluationResult evaluate_methods(const EvalManifest& m, unsigned threads = 0) {
  namespace fs = std::filesystem;
  detail::require(fs::is_directory(m.hr_root), m.hr_root.string() + ": HR root not found");
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(m.hr_root)) {
    if (entry.is_directory()) names.push_back(entry.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  detail::require(!names.empty(), m.hr_root.string() + ": no video directories");

  std::vector<detail::VideoReference> refs(names.size());
  parallel_for(names.size(), threads,
               [&](std::size_t i) { refs[i] = detail::load_reference(m, names[i]); });

  std::vector<std::pair<std::string, std::size_t>> tasks;
  for (const auto& [method, root] : m.methods)
    for (std::size_t v = 0; v < names.size(); ++v) tasks.emplace_back(method, v);

  struct Slot {
    MetricReport report;
    std::string error;
  };
  std::vector<Slot> slots(tasks.size());
  parallel_for(tasks.size(), threads, [&](std::size_t i) {
    const auto& [method, v] = tasks[i];
    const detail::VideoReference& ref = refs[v];
    if (!ref.error.empty()) {
      slots[i].error = "reference: " + ref.error;
      return;
    }
    try {
      const Video sr = load_video(m.methods.at(method) / ref.name);
      slots[i].report = detail::score_video(method, ref, sr, m.warp);
    } catch (const std::exception& e) {
      slots[i].error = e.what();
    }
  });

  EvaluationResult result;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (slots[i].error.empty()) {
      result.reports.push_back(slots[i].report);
    } else {
      result.failures.push_back(tasks[i].first + "/" + names[tasks[i].second] + ": " +
                                slots[i].error);
    }
  }
  if (!result.reports.empty()) result.summary = aggregate_dataset(result.reports);
  return result;
}

namespace detail {

inline std::string fmt_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace detail

/// Writes per_video.csv, summary.json and the scatter files
/// scatter_mse_warping_error.dat and scatter_one_minus_ssim_warping_error.dat.
inline void write_evaluation(const EvaluationResult& result, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const auto open = [](const fs::path& p) {
    std::ofstream out(p);
    detail::require(static_cast<bool>(out), p.string() + ": cannot open for writing");
    return out;
  };

  {
    std::ofstream csv = open(dir / "per_video.csv");
    csv << "method,video,mse,ssim,one_minus_ssim,warping_error\n";
    for (const MetricReport& r : result.reports) {
      csv << r.method << ',' << r.video << ',' << detail::fmt_number(r.mse) << ','
          << detail::fmt_number(r.ssim) << ',' << detail::fmt_number(1.0 - r.ssim) << ','
          << detail::fmt_number(r.warping_error) << '\n';
    }
  }
  {
    nlohmann::ordered_json summary = nlohmann::ordered_json::object();
    for (const auto& [method, s] : result.summary) {
      summary[method] = {{"mse", s.mse},
                         {"ssim", s.ssim},
                         {"one_minus_ssim", 1.0 - s.ssim},
                         {"warping_error", s.warping_error},
                         {"videos", s.videos}};
    }
    std::ofstream json = open(dir / "summary.json");
    json << summary.dump(2) << '\n';
  }
  for (const bool use_ssim : {false, true}) {
    const std::string spatial = use_ssim ? "one_minus_ssim" : "mse";
    std::ofstream dat = open(dir / ("scatter_" + spatial + "_warping_error.dat"));
    dat << "# " << spatial << " warping_error\n# rows:";
    for (const auto& [method, s] : result.summary) dat << ' ' << method;
    dat << '\n';
    for (const auto& [method, s] : result.summary) {
      dat << detail::fmt_number(use_ssim ? 1.0 - s.ssim : s.mse) << ' '
          << detail::fmt_number(s.warping_error) << '\n';
    }
  }
}

}  // namespace stq
