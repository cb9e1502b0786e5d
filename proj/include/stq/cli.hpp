#pragma once

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "stq/stq.hpp"

namespace stq::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Invalid combination of otherwise well-formed flags.
class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Streams {
  std::ostream& out = std::cout;
  std::ostream& err = std::cerr;
};

namespace detail {

namespace fs = std::filesystem;

inline std::vector<double> parse_betas(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("--betas: '" + item + "' is not a number");
    }
  }
  if (out.empty()) throw UsageError("--betas: empty list");
  return out;
}

inline void write_report_csv(std::ostream& out, const std::vector<MetricReport>& reports) {
  out << "method,video,mse,ssim,one_minus_ssim,warping_error\n";
  char line[256];
  for (const MetricReport& r : reports) {
    std::snprintf(line, sizeof line, "%s,%s,%.12g,%.12g,%.12g,%.12g\n", r.method.c_str(),
                  r.video.c_str(), r.mse, r.ssim, 1.0 - r.ssim, r.warping_error);
    out << line;
  }
}

}  // namespace detail

/// Entry point shared by the `stq` binary and the tests. Returns the process
/// exit status: 0 success, 1 usage error, 2 data or validation error.
inline int run(const std::vector<std::string>& args, Streams io = {}) {
  namespace fs = std::filesystem;

  CLI::App app{"Spatial and temporal quality metrics for video super-resolution"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  unsigned threads = 0;
  bool verbose = false;
  app.add_option("--threads", threads, "Worker threads (0 = STQ_THREADS or hardware)")
      ->capture_default_str();
  app.add_flag("-v,--verbose", verbose, "Progress messages on stderr");

  // degrade
  std::string degrade_in, degrade_out;
  auto* degrade = app.add_subcommand("degrade", "Bicubic x4 down/up degradation of a frame or frame directory");
  degrade->add_option("--in", degrade_in, "Input PNG or frame directory")->required();
  degrade->add_option("--out", degrade_out, "Output PNG or directory")->required();

  // flow-synth
  int synth_w = 0, synth_h = 0;
  double synth_dx = 0.0, synth_dy = 0.0;
  std::string synth_out;
  auto* flow_synth = app.add_subcommand("flow-synth", "Write a constant translation flow as .flo");
  flow_synth->add_option("--width", synth_w, "Width in pixels")->required()->check(CLI::PositiveNumber);
  flow_synth->add_option("--height", synth_h, "Height in pixels")->required()->check(CLI::PositiveNumber);
  flow_synth->add_option("--dx", synth_dx, "Horizontal displacement")->capture_default_str();
  flow_synth->add_option("--dy", synth_dy, "Vertical displacement")->capture_default_str();
  flow_synth->add_option("--out", synth_out, "Output .flo")->required();

  // warp
  std::string warp_in, warp_flow, warp_out;
  bool warp_adj = false;
  auto* warp = app.add_subcommand("warp", "Backward-warp a frame along a flow");
  warp->add_option("--in", warp_in, "Input PNG (frame t+1)")->required();
  warp->add_option("--flow", warp_flow, "Flow t->t+1 (.flo)")->required();
  warp->add_option("--out", warp_out, "Output PNG")->required();
  warp->add_flag("--adjoint", warp_adj, "Apply the transpose of the warp instead");

  // mask
  std::string mask_type = "fb", mask_fw, mask_bw, mask_frame_t, mask_frame_next, mask_flow,
              mask_out;
  FbConsistencyConfig mask_fb;
  double mask_sharpness = kDefaultMaskSharpness;
  auto* mask = app.add_subcommand("mask", "Occlusion (fb) or soft exponential mask as PNG");
  mask->add_option("--type", mask_type, "fb | soft")
      ->check(CLI::IsMember({"fb", "soft"}))
      ->capture_default_str();
  mask->add_option("--fw", mask_fw, "Forward flow t->t+1 (fb)");
  mask->add_option("--bw", mask_bw, "Backward flow t+1->t (fb)");
  mask->add_option("--fb-relative", mask_fb.relative, "Relative fb threshold")->capture_default_str();
  mask->add_option("--fb-absolute", mask_fb.absolute, "Absolute fb threshold")->capture_default_str();
  mask->add_option("--frame-t", mask_frame_t, "Frame t (soft)");
  mask->add_option("--frame-next", mask_frame_next, "Frame t+1 (soft)");
  mask->add_option("--flow", mask_flow, "Flow t->t+1 (soft)");
  mask->add_option("--sharpness", mask_sharpness, "Soft mask sharpness")->capture_default_str();
  mask->add_option("--out", mask_out, "Output PNG")->required();

  // metrics
  std::string metrics_hr, metrics_sr, metrics_flows, metrics_out, metrics_method = "sr",
              metrics_mask = "fb", metrics_reduction = "mean";
  FbConsistencyConfig metrics_fb;
  auto* metrics = app.add_subcommand("metrics", "MSE, SSIM and warping error of one SR video");
  metrics->add_option("--hr", metrics_hr, "HR frame directory")->required();
  metrics->add_option("--sr", metrics_sr, "SR frame directory")->required();
  metrics->add_option("--flows", metrics_flows,
                      "Directory of fw_%06d.flo / bw_%06d.flo (default: zero flow, full mask)");
  metrics->add_option("--mask-mode", metrics_mask, "fb | full")
      ->check(CLI::IsMember({"fb", "full"}))
      ->capture_default_str();
  metrics->add_option("--fb-relative", metrics_fb.relative, "Relative fb threshold")->capture_default_str();
  metrics->add_option("--fb-absolute", metrics_fb.absolute, "Absolute fb threshold")->capture_default_str();
  metrics->add_option("--channel-reduction", metrics_reduction, "mean | sum")
      ->check(CLI::IsMember({"mean", "sum"}))
      ->capture_default_str();
  metrics->add_option("--method", metrics_method, "Method label in the report")->capture_default_str();
  metrics->add_option("--out", metrics_out, "Report CSV (default: stdout)");

  // evaluate
  std::string eval_manifest, eval_out;
  auto* evaluate = app.add_subcommand("evaluate", "Score every method of a manifest");
  evaluate->add_option("--manifest", eval_manifest, "INI manifest")->required();
  evaluate->add_option("--out-dir", eval_out, "Override [output] dir");

  // tradeoff
  std::string trade_hr_t, trade_hr_next, trade_flow, trade_out, trade_betas = "0,0.01,0.1,1,10,100";
  LossConfig trade_cfg;
  auto* tradeoff = app.add_subcommand("tradeoff", "Beta sweep of the joint spatial-temporal loss");
  tradeoff->add_option("--hr-t", trade_hr_t, "HR frame t (PNG)")->required();
  tradeoff->add_option("--hr-next", trade_hr_next, "HR frame t+1 (PNG)")->required();
  tradeoff->add_option("--flow", trade_flow, "Flow t->t+1 (default: zero)");
  tradeoff->add_option("--betas", trade_betas, "Comma-separated increasing betas")->capture_default_str();
  tradeoff->add_option("--alpha", trade_cfg.alpha, "Spatial weight")->capture_default_str();
  tradeoff->add_option("--sharpness", trade_cfg.mask_sharpness, "Soft mask sharpness")->capture_default_str();
  tradeoff->add_flag("--normalize-temporal", trade_cfg.normalize_temporal,
                     "Divide the temporal term by the mask total");
  tradeoff->add_option("--step-size", trade_cfg.step_size, "Initial line-search step")->capture_default_str();
  tradeoff->add_option("--max-iters", trade_cfg.max_iters, "Iteration cap per beta")->capture_default_str();
  tradeoff->add_option("--grad-tol", trade_cfg.grad_tol, "Stop when max |grad| falls below")->capture_default_str();
  tradeoff->add_option("--out", trade_out, "Output gnuplot data file")->required();

  // synth-corpus
  SynthCorpusConfig corpus_cfg;
  std::string corpus_out;
  auto* corpus = app.add_subcommand("synth-corpus", "Generate the synthetic evaluation corpus");
  corpus->add_option("--out", corpus_out, "Output directory")->required();
  corpus->add_option("--seed", corpus_cfg.seed, "RNG seed")->capture_default_str();
  corpus->add_option("--width", corpus_cfg.width, "Frame width")->capture_default_str();
  corpus->add_option("--height", corpus_cfg.height, "Frame height")->capture_default_str();
  corpus->add_option("--channels", corpus_cfg.channels, "1 or 3")->capture_default_str();
  corpus->add_option("--frames", corpus_cfg.frames, "Frames per video")->capture_default_str();
  corpus->add_option("--static-videos", corpus_cfg.static_videos, "Static scenes")->capture_default_str();
  corpus->add_option("--pan-videos", corpus_cfg.pan_videos, "Panning scenes")->capture_default_str();
  corpus->add_option("--pan-dx", corpus_cfg.pan_dx, "Pan per frame (pixels)")->capture_default_str();
  corpus->add_option("--hr-noise", corpus_cfg.hr_noise, "HR sensor noise sigma")->capture_default_str();
  corpus->add_option("--method-noise", corpus_cfg.method_noise, "Noise sigma of noisy methods")->capture_default_str();

  std::vector<std::string> argv_store{"stq"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    io.out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    io.out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    io.err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  const auto log = [&](const std::string& msg) {
    if (verbose) io.err << msg << "\n";
  };

  try {
    if (degrade->parsed()) {
      if (fs::is_directory(degrade_in)) {
        const Video v = load_video(degrade_in);
        std::vector<Frame> out;
        for (const Frame& f : v.frames()) out.push_back(degrade_x4(f));
        save_video(Video(std::move(out)), degrade_out);
        log("degraded " + std::to_string(v.frame_count()) + " frames");
      } else {
        save_frame(degrade_x4(load_frame(degrade_in)), degrade_out);
      }
    } else if (flow_synth->parsed()) {
      write_flo(synth_translation_flow(synth_w, synth_h, synth_dx, synth_dy), synth_out);
    } else if (warp->parsed()) {
      const Frame f = load_frame(warp_in);
      const FlowField flow = read_flo(warp_flow);
      save_frame(warp_adj ? warp_adjoint(f, flow) : warp_backward(f, flow), warp_out);
    } else if (mask->parsed()) {
      if (mask_type == "fb") {
        if (mask_fw.empty() || mask_bw.empty()) throw UsageError("mask --type fb needs --fw and --bw");
        if (!mask_frame_t.empty() || !mask_frame_next.empty() || !mask_flow.empty()) {
          throw UsageError("mask --type fb does not take --frame-t/--frame-next/--flow");
        }
        save_frame(fb_consistency_mask(read_flo(mask_fw), read_flo(mask_bw), mask_fb).to_frame(),
                   mask_out);
      } else {
        if (mask_frame_t.empty() || mask_frame_next.empty() || mask_flow.empty()) {
          throw UsageError("mask --type soft needs --frame-t, --frame-next and --flow");
        }
        if (!mask_fw.empty() || !mask_bw.empty()) {
          throw UsageError("mask --type soft does not take --fw/--bw");
        }
        const Frame ft = load_frame(mask_frame_t);
        const Frame fn = load_frame(mask_frame_next);
        save_frame(temporal_mask(ft, fn, read_flo(mask_flow), mask_sharpness).to_frame(), mask_out);
      }
    } else if (metrics->parsed()) {
      if (metrics_flows.empty() && metrics_mask == "fb" && metrics->count("--mask-mode") > 0) {
        throw UsageError("metrics --mask-mode fb needs --flows");
      }
      const Video hr = load_video(metrics_hr);
      const Video sr = load_video(metrics_sr);
      stq::detail::require(hr.frame_count() >= 2, "metrics: warping error needs at least 2 frames");
      stq::detail::require(sr.frame_count() == hr.frame_count(), "metrics: SR and HR frame counts differ");
      std::vector<FlowField> flows;
      std::vector<OcclusionMask> masks;
      const int w = hr[0].width();
      const int h = hr[0].height();
      for (std::size_t t = 0; t + 1 < hr.frame_count(); ++t) {
        if (metrics_flows.empty()) {
          flows.emplace_back(w, h);
          masks.push_back(OcclusionMask::full(w, h));
          continue;
        }
        FlowField fw = read_flo(fs::path(metrics_flows) / forward_flow_name(t));
        if (metrics_mask == "fb") {
          masks.push_back(fb_consistency_mask(
              fw, read_flo(fs::path(metrics_flows) / backward_flow_name(t)), metrics_fb));
        } else {
          masks.push_back(OcclusionMask::full(fw.width(), fw.height()));
        }
        flows.push_back(std::move(fw));
      }
      stq::detail::VideoReference ref{fs::path(metrics_hr).filename().string(), hr, flows, masks, {}};
      if (ref.name.empty()) ref.name = fs::path(metrics_hr).parent_path().filename().string();
      WarpErrorConfig warp_cfg;
      warp_cfg.reduction = metrics_reduction == "sum" ? ChannelReduction::Sum : ChannelReduction::Mean;
      const std::vector<MetricReport> reports{stq::detail::score_video(metrics_method, ref, sr, warp_cfg)};
      if (metrics_out.empty()) {
        detail::write_report_csv(io.out, reports);
      } else {
        std::ofstream out(metrics_out);
        stq::detail::require(static_cast<bool>(out), metrics_out + ": cannot open for writing");
        detail::write_report_csv(out, reports);
      }
    } else if (evaluate->parsed()) {
      EvalManifest manifest = load_manifest(eval_manifest);
      if (!eval_out.empty()) manifest.output_dir = eval_out;
      const EvaluationResult result = evaluate_methods(manifest, threads);
      write_evaluation(result, manifest.output_dir);
      for (const std::string& f : result.failures) io.err << "warning: " << f << "\n";
      log("scored " + std::to_string(result.reports.size()) + " method/video pairs into " +
          manifest.output_dir.string());
      if (result.reports.empty()) {
        io.err << "error: no video could be scored\n";
        return kExitData;
      }
    } else if (tradeoff->parsed()) {
      const std::vector<double> betas = detail::parse_betas(trade_betas);
      const Frame hr_t = load_frame(trade_hr_t);
      const Frame hr_next = load_frame(trade_hr_next);
      const FlowField flow = trade_flow.empty() ? FlowField(hr_t.width(), hr_t.height())
                                                : read_flo(trade_flow);
      const TradeoffCurve curve = beta_sweep(hr_t, hr_next, flow, betas, trade_cfg, threads);
      emit_gnuplot_data(curve, trade_out);
      for (const std::string& w : curve.warnings) io.err << "warning: " << w << "\n";
      for (const TradeoffRecord& r : curve.records) {
        log("beta " + std::to_string(r.beta) + ": " + std::to_string(r.iterations) +
            " iterations, stop=" + to_string(r.stop));
      }
      const CurveCheck check = validate_tradeoff(curve);
      if (!check.ok || !curve.warnings.empty()) {
        for (const std::string& f : check.failures) io.err << "monotonicity: " << f << "\n";
        io.out << "FAIL\n";
        return kExitData;
      }
      io.out << "PASS\n";
    } else if (corpus->parsed()) {
      const fs::path manifest = write_synth_corpus(synth_corpus(corpus_cfg), corpus_out);
      log("wrote " + manifest.string());
    }
  } catch (const UsageError& e) {
    io.err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace stq::cli
