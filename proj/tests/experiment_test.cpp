#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "stq/experiment.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using stq::FlowField;
using stq::Frame;
using stq::test::TempDir;

namespace {

struct NoisyPair {
  Frame hr_t, hr_next;
};

// Static textured scene observed twice with independent sensor noise.
NoisyPair noisy_static_pair(int w, int h, int ch, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, sigma);
  Frame scene(w, h, ch);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c)
        scene(x, y, c) = 0.5 + 0.2 * std::sin(0.9 * x + 0.3 * c) * std::cos(0.7 * y);
  NoisyPair p{scene, scene};
  for (double& v : p.hr_t.data()) v = std::clamp(v + n(rng), 0.0, 1.0);
  for (double& v : p.hr_next.data()) v = std::clamp(v + n(rng), 0.0, 1.0);
  return p;
}

stq::TradeoffCurve three_row_curve() {
  stq::TradeoffCurve c;
  c.records = {{0.0, 1e-9, 2.5e-7, 0.00123456789, 12.3456789, 0.5},
               {1.0, 2e-5, 1.0 / 3.0, 1e-4, 20.0, 0.25},
               {10.0, 3e-5, 0.5, 1e-6, 21.0, 1e-3}};
  return c;
}

}  // namespace

TEST(BetaSweep, BetaZeroEndpointIsHr) {
  const NoisyPair p = noisy_static_pair(24, 20, 3, 0.02, 1);
  const FlowField flow(24, 20);
  const auto curve = stq::beta_sweep(p.hr_t, p.hr_next, flow, {0.0, 1.0}, stq::LossConfig{}, 1);
  ASSERT_EQ(curve.records.size(), 2u);
  EXPECT_LT(curve.records[0].mse, 1e-8);
  EXPECT_NEAR(curve.records[0].warping_error, curve.hr_warping_error, 1e-6);
  EXPECT_NEAR(curve.hr_warping_error, stq::full_mask_warping_error(p.hr_t, p.hr_next, flow), 0.0);
  EXPECT_TRUE(curve.warnings.empty());
}

TEST(BetaSweep, TradeoffIsMonotone) {
  const NoisyPair p = noisy_static_pair(24, 20, 3, 0.02, 2);
  const auto curve =
      stq::beta_sweep(p.hr_t, p.hr_next, FlowField(24, 20), {0.0, 0.1, 1.0, 10.0, 100.0}, stq::LossConfig{}, 1);
  const auto check = stq::validate_tradeoff(curve);
  for (const auto& f : check.failures) ADD_FAILURE() << f;
  EXPECT_TRUE(check.ok);
  // Both ends of the tradeoff actually move.
  EXPECT_LT(curve.records.back().warping_error, 0.1 * curve.records.front().warping_error);
  EXPECT_GT(curve.records.back().mse, curve.records[1].mse);
  for (std::size_t i = 1; i < curve.records.size(); ++i) EXPECT_GT(curve.records[i].mse, curve.records[0].mse);
}

// With a very large beta the temporal term should end up near the minimum of
// the temporal term alone, found by a separate minimize run with alpha = 0.
TEST(BetaSweep, LargeBetaApproachesTemporalMinimum) {
  const NoisyPair p = noisy_static_pair(16, 16, 1, 0.03, 3);
  const FlowField flow(16, 16);
  stq::LossConfig cfg;
  cfg.max_iters = 4000;
  const auto curve = stq::beta_sweep(p.hr_t, p.hr_next, flow, {0.0, 1e4}, cfg, 1);

  stq::LossConfig temporal_only = cfg;
  temporal_only.alpha = 0.0;
  temporal_only.beta = 1.0;
  const auto alone = stq::minimize(p.hr_t, p.hr_next, flow, stq::degrade_x4(p.hr_t), stq::degrade_x4(p.hr_next),
                                   temporal_only);
  const double t_min = alone.trace.back().temporal;
  const double t_zero = curve.records[0].temporal_loss;
  const double t_large = curve.records[1].temporal_loss;
  ASSERT_GT(t_zero, t_min);
  EXPECT_LE(t_large - t_min, 0.05 * (t_zero - t_min));
}

TEST(BetaSweep, DegenerateHrPairIsFlagged) {
  const NoisyPair p = noisy_static_pair(16, 16, 1, 0.0, 4);
  const auto curve = stq::beta_sweep(p.hr_t, p.hr_t, FlowField(16, 16), {0.0, 1.0}, stq::LossConfig{}, 1);
  ASSERT_EQ(curve.warnings.size(), 1u);
  EXPECT_NE(curve.warnings[0].find("degenerate"), std::string::npos);
}

TEST(BetaSweep, RejectsBadBetaLists) {
  const NoisyPair p = noisy_static_pair(16, 16, 1, 0.02, 5);
  const FlowField flow(16, 16);
  EXPECT_THROW(stq::beta_sweep(p.hr_t, p.hr_next, flow, {}, stq::LossConfig{}), stq::Error);
  EXPECT_THROW(stq::beta_sweep(p.hr_t, p.hr_next, flow, {1.0, 0.5}, stq::LossConfig{}), stq::Error);
  EXPECT_THROW(stq::beta_sweep(p.hr_t, p.hr_next, flow, {1.0, 1.0}, stq::LossConfig{}), stq::Error);
  EXPECT_THROW(stq::beta_sweep(p.hr_t, p.hr_next, flow, {-1.0}, stq::LossConfig{}), stq::Error);
}

TEST(BetaSweep, ThreadCountDoesNotChangeResults) {
  const NoisyPair p = noisy_static_pair(16, 16, 3, 0.02, 6);
  const FlowField flow(16, 16);
  const std::vector<double> betas{0.0, 0.5, 5.0};
  const auto a = stq::beta_sweep(p.hr_t, p.hr_next, flow, betas, stq::LossConfig{}, 1);
  const auto b = stq::beta_sweep(p.hr_t, p.hr_next, flow, betas, stq::LossConfig{}, 3);
  for (std::size_t i = 0; i < betas.size(); ++i) {
    EXPECT_EQ(a.records[i].mse, b.records[i].mse);
    EXPECT_EQ(a.records[i].warping_error, b.records[i].warping_error);
    EXPECT_EQ(a.records[i].temporal_loss, b.records[i].temporal_loss);
  }
}

TEST(ValidateTradeoff, FlagsViolations) {
  auto curve = three_row_curve();
  EXPECT_TRUE(stq::validate_tradeoff(curve).ok);
  curve.records[2].warping_error = 2e-4;
  EXPECT_FALSE(stq::validate_tradeoff(curve).ok);
  curve = three_row_curve();
  curve.records[1].mse = 0.0;
  EXPECT_FALSE(stq::validate_tradeoff(curve).ok);
  curve = three_row_curve();
  curve.records[2].one_minus_ssim = 0.1;
  EXPECT_FALSE(stq::validate_tradeoff(curve).ok);
  curve = three_row_curve();
  curve.records[1].beta = 0.0;
  EXPECT_FALSE(stq::validate_tradeoff(curve).ok);
  EXPECT_FALSE(stq::validate_tradeoff(stq::TradeoffCurve{}).ok);
}

TEST(GnuplotData, LayoutAndRoundTrip) {
  TempDir dir("stq_gnuplot");
  const auto curve = three_row_curve();
  stq::emit_gnuplot_data(curve, dir / "t.dat");
  std::ifstream in(dir / "t.dat");
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], "# beta mse one_minus_ssim warping_error spatial_loss temporal_loss");
  EXPECT_EQ(lines[1], "0 1e-09 2.5e-07 0.00123456789 12.3456789 0.5");

  const auto back = stq::read_gnuplot_data(dir / "t.dat");
  ASSERT_EQ(back.records.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& a = curve.records[i];
    const auto& b = back.records[i];
    for (auto [x, y] : {std::pair{a.beta, b.beta}, {a.mse, b.mse}, {a.one_minus_ssim, b.one_minus_ssim},
                        {a.warping_error, b.warping_error}, {a.spatial_loss, b.spatial_loss},
                        {a.temporal_loss, b.temporal_loss}}) {
      EXPECT_NEAR(x, y, 5e-9 * std::abs(x));
    }
  }
}

TEST(GnuplotData, Errors) {
  TempDir dir("stq_gnuplot_err");
  EXPECT_THROW(stq::emit_gnuplot_data(stq::TradeoffCurve{}, dir / "empty.dat"), stq::Error);
  EXPECT_THROW(stq::emit_gnuplot_data(three_row_curve(), dir / "missing" / "t.dat"), stq::Error);
}

TEST(SynthCorpus, DeterministicAndConsistent) {
  stq::SynthCorpusConfig cfg;
  cfg.width = 24;
  cfg.height = 16;
  cfg.frames = 3;
  const auto a = stq::synth_corpus(cfg);
  const auto b = stq::synth_corpus(cfg);
  ASSERT_EQ(a.videos.size(), 3u);
  EXPECT_EQ(a.videos[0].name, "static_00");
  EXPECT_EQ(a.videos[2].name, "pan_00");
  for (std::size_t v = 0; v < a.videos.size(); ++v)
    for (std::size_t t = 0; t < 3; ++t) EXPECT_EQ(a.videos[v].hr[t], b.videos[v].hr[t]);
  EXPECT_EQ(a.methods.size(), 4u);

  cfg.seed = 2;
  EXPECT_NE(stq::synth_corpus(cfg).videos[0].hr[0], a.videos[0].hr[0]);

  // Panning frames line up exactly under the stored flow wherever the
  // forward-backward mask keeps the pixel, up to the HR sensor noise.
  const auto& pan = a.videos[2];
  const auto mask = stq::fb_consistency_mask(pan.forward[0], pan.backward[0]);
  EXPECT_EQ(mask.sum(), (24 - cfg.pan_dx) * 16.0);
  const auto r = stq::warping_error_pair(pan.hr[0], pan.hr[1], pan.forward[0], mask);
  EXPECT_LT(r.masked_sum / r.mask_sum, 4 * cfg.hr_noise * cfg.hr_noise);
}

class EvaluateTest : public ::testing::Test {
protected:
  void SetUp() override {
    stq::SynthCorpusConfig cfg;
    cfg.width = 40;
    cfg.height = 32;
    cfg.frames = 4;
    manifest_path_ = stq::write_synth_corpus(stq::synth_corpus(cfg), dir_.path());
  }

  TempDir dir_{"stq_eval"};
  fs::path manifest_path_;
};

TEST_F(EvaluateTest, IdentityAndNoiseMethods) {
  const auto m = stq::load_manifest(manifest_path_);
  const auto result = stq::evaluate_methods(m, 1);
  EXPECT_TRUE(result.failures.empty());
  ASSERT_EQ(result.reports.size(), 12u);

  // Identity scores perfectly and carries the HR video's own warping error.
  for (const auto& r : result.reports) {
    if (r.method != "identity") continue;
    EXPECT_EQ(r.mse, 0.0);
    EXPECT_NEAR(r.ssim, 1.0, 1e-9);
    const stq::Video hr = stq::load_video(m.hr_root / r.video);
    std::vector<FlowField> flows;
    std::vector<stq::OcclusionMask> masks;
    for (std::size_t t = 0; t + 1 < hr.frame_count(); ++t) {
      flows.push_back(stq::read_flo(m.flow_root / r.video / stq::forward_flow_name(t)));
      masks.push_back(stq::fb_consistency_mask(
          flows.back(), stq::read_flo(m.flow_root / r.video / stq::backward_flow_name(t))));
    }
    EXPECT_DOUBLE_EQ(r.warping_error, stq::warping_error_video(hr, flows, masks));
  }

  const auto& s = result.summary;
  // Same noise energy, but only fresh-per-frame noise flickers on static scenes.
  for (const auto& r : result.reports) {
    if (r.method != "independent_noise" || r.video.rfind("static", 0) != 0) continue;
    const auto twin = std::find_if(result.reports.begin(), result.reports.end(), [&](const auto& o) {
      return o.method == "repeated_noise" && o.video == r.video;
    });
    EXPECT_NEAR(r.mse, twin->mse, 0.1 * r.mse);
    EXPECT_GT(r.warping_error, twin->warping_error);
  }
  // Oversmoothed bicubic output: worse MSE, better temporal consistency.
  EXPECT_GT(s.at("bicubic").mse, s.at("independent_noise").mse);
  EXPECT_LT(s.at("bicubic").warping_error, s.at("independent_noise").warping_error);
}

TEST_F(EvaluateTest, OutputsAreDeterministicAndOrderIndependent) {
  auto m = stq::load_manifest(manifest_path_);
  stq::write_evaluation(stq::evaluate_methods(m, 1), dir_ / "serial");
  stq::write_evaluation(stq::evaluate_methods(m, 4), dir_ / "parallel");

  // Same methods declared in reverse order.
  std::ofstream(dir_ / "reversed.ini")
      << "[data]\nhr = hr\nflows = flows\n[methods]\nrepeated_noise = sr/repeated_noise\n"
         "independent_noise = sr/independent_noise\nidentity = sr/identity\nbicubic = sr/bicubic\n";
  stq::write_evaluation(stq::evaluate_methods(stq::load_manifest(dir_ / "reversed.ini"), 2), dir_ / "reversed");

  for (const char* name : {"per_video.csv", "summary.json", "scatter_mse_warping_error.dat",
                           "scatter_one_minus_ssim_warping_error.dat"}) {
    const std::string serial = stq::test::read_file(dir_ / "serial" / name);
    EXPECT_FALSE(serial.empty()) << name;
    EXPECT_EQ(serial, stq::test::read_file(dir_ / "parallel" / name)) << name;
    EXPECT_EQ(serial, stq::test::read_file(dir_ / "reversed" / name)) << name;
  }
  const std::string csv = stq::test::read_file(dir_ / "serial" / "per_video.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "method,video,mse,ssim,one_minus_ssim,warping_error");
}

TEST_F(EvaluateTest, MissingFlowIsReportedPerVideo) {
  fs::remove(dir_ / "flows" / "static_01" / stq::backward_flow_name(1));
  const auto result = stq::evaluate_methods(stq::load_manifest(manifest_path_), 1);
  EXPECT_EQ(result.reports.size(), 8u);
  ASSERT_EQ(result.failures.size(), 4u);
  for (const auto& f : result.failures) EXPECT_NE(f.find("static_01"), std::string::npos) << f;
}

TEST_F(EvaluateTest, MismatchedMethodVideoIsReported) {
  fs::remove(dir_ / "sr" / "bicubic" / "pan_00" / "000003.png");
  const auto result = stq::evaluate_methods(stq::load_manifest(manifest_path_), 1);
  ASSERT_EQ(result.failures.size(), 1u);
  EXPECT_NE(result.failures[0].find("bicubic/pan_00"), std::string::npos);
  EXPECT_EQ(result.summary.at("bicubic").videos, 2u);
}

TEST_F(EvaluateTest, ManifestErrors) {
  std::ofstream(dir_ / "no_methods.ini") << "[data]\nhr = hr\nflows = flows\n";
  EXPECT_THROW(stq::load_manifest(dir_ / "no_methods.ini"), stq::Error);
  std::ofstream(dir_ / "no_hr.ini") << "[data]\nflows = flows\n[methods]\na = sr/identity\n";
  EXPECT_THROW(stq::load_manifest(dir_ / "no_hr.ini"), stq::Error);
  std::ofstream(dir_ / "bad_mode.ini") << "[data]\nhr = hr\nflows = flows\n[methods]\na = b\n[masks]\nmode = x\n";
  EXPECT_THROW(stq::load_manifest(dir_ / "bad_mode.ini"), stq::Error);
  std::ofstream(dir_ / "garbage.ini") << "[data\nhr\n";
  EXPECT_THROW(stq::load_manifest(dir_ / "garbage.ini"), stq::Error);

  const auto m = stq::load_manifest(manifest_path_);
  EXPECT_EQ(m.hr_root, dir_.path() / "hr");
  EXPECT_EQ(m.output_dir, dir_.path() / "out");
  EXPECT_EQ(m.fb.relative, 0.01);
  EXPECT_EQ(m.fb.absolute, 0.5);
  EXPECT_EQ(m.methods.size(), 4u);
}
