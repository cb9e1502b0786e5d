#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "stq/cli.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using stq::test::TempDir;
using stq::test::read_file;

namespace {

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

RunResult run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = stq::cli::run(args, {out, err});
  return {code, out.str(), err.str()};
}

// Small corpus for fast end-to-end runs.
fs::path small_corpus(const TempDir& dir, const std::string& name) {
  const RunResult r = run({"synth-corpus", "--out", (dir / name).string(), "--width", "24", "--height", "16",
                           "--frames", "3"});
  EXPECT_EQ(r.code, 0) << r.err;
  return dir / name;
}

}  // namespace

TEST(Cli, HelpListsDefaults) {
  const RunResult top = run({"--help"});
  EXPECT_EQ(top.code, 0);
  for (const char* sub : {"degrade", "flow-synth", "warp", "mask", "metrics", "evaluate", "tradeoff",
                          "synth-corpus"}) {
    EXPECT_NE(top.out.find(sub), std::string::npos) << sub;
  }
  const RunResult trade = run({"tradeoff", "--help"});
  EXPECT_EQ(trade.code, 0);
  EXPECT_NE(trade.out.find("0.5"), std::string::npos);
  EXPECT_NE(trade.out.find("50"), std::string::npos);
  const RunResult mask = run({"mask", "--help"});
  EXPECT_NE(mask.out.find("0.01"), std::string::npos);
  EXPECT_NE(mask.out.find("0.5"), std::string::npos);
}

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  EXPECT_EQ(run({"warp", "--in", "a.png", "--flow", "f.flo", "--out", "o.png", "--bogus"}).code, 1);
  EXPECT_EQ(run({"warp", "--in", "a.png"}).code, 1);
  EXPECT_EQ(run({"mask", "--type", "fb", "--out", "m.png"}).code, 1);
  EXPECT_EQ(run({"mask", "--type", "wobbly", "--out", "m.png"}).code, 1);
}

TEST(Cli, DataErrorsExitTwo) {
  TempDir dir("stq_cli_err");
  const RunResult r = run({"warp", "--in", (dir / "missing.png").string(), "--flow", (dir / "f.flo").string(),
                           "--out", (dir / "o.png").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("missing.png"), std::string::npos);
  EXPECT_EQ(run({"evaluate", "--manifest", (dir / "none.ini").string()}).code, 2);
  EXPECT_EQ(run({"tradeoff", "--hr-t", "a.png", "--hr-next", "b.png", "--betas", "1,0", "--out", "x"}).code, 2);
}

TEST(Cli, WarpWithZeroFlowIsIdentity) {
  TempDir dir("stq_cli_warp");
  std::mt19937_64 rng(1);
  stq::Frame f = stq::test::random_frame(rng, 9, 6, 3);
  for (double& v : f.data()) v = std::round(v * 255.0) / 255.0;
  stq::save_frame(f, dir / "in.png");
  ASSERT_EQ(run({"flow-synth", "--width", "9", "--height", "6", "--out", (dir / "zero.flo").string()}).code, 0);
  for (const char* mode : {"", "--adjoint"}) {
    std::vector<std::string> args{"warp", "--in", (dir / "in.png").string(), "--flow", (dir / "zero.flo").string(),
                                  "--out", (dir / "out.png").string()};
    if (*mode) args.push_back(mode);
    ASSERT_EQ(run(args).code, 0);
    EXPECT_EQ(stq::load_frame(dir / "out.png"), f);
  }
}

TEST(Cli, FlowSynthAndMask) {
  TempDir dir("stq_cli_mask");
  ASSERT_EQ(run({"flow-synth", "--width", "8", "--height", "4", "--dx", "2", "--out", (dir / "fw.flo").string()}).code,
            0);
  ASSERT_EQ(run({"flow-synth", "--width", "8", "--height", "4", "--dx", "-2", "--out", (dir / "bw.flo").string()})
                .code,
            0);
  const stq::FlowField fw = stq::read_flo(dir / "fw.flo");
  EXPECT_EQ(fw.u(3, 2), 2.0f);
  ASSERT_EQ(run({"mask", "--fw", (dir / "fw.flo").string(), "--bw", (dir / "bw.flo").string(), "--out",
                 (dir / "m.png").string()})
                .code,
            0);
  const stq::Frame m = stq::load_frame(dir / "m.png");
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 8; ++x) EXPECT_EQ(m(x, y), x < 6 ? 1.0 : 0.0);
}

TEST(Cli, MetricsOfHrAgainstItself) {
  TempDir dir("stq_cli_metrics");
  const fs::path root = small_corpus(dir, "c");
  const RunResult r = run({"metrics", "--hr", (root / "hr" / "pan_00").string(), "--sr",
                           (root / "hr" / "pan_00").string(), "--flows", (root / "flows" / "pan_00").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  EXPECT_EQ(header, "method,video,mse,ssim,one_minus_ssim,warping_error");
  EXPECT_EQ(row.rfind("sr,pan_00,0,1,0,", 0), 0u) << row;
}

TEST(Cli, DegradeKeepsSize) {
  TempDir dir("stq_cli_degrade");
  stq::save_frame(stq::Frame(20, 12, 3, 0.4), dir / "in.png");
  ASSERT_EQ(run({"degrade", "--in", (dir / "in.png").string(), "--out", (dir / "out.png").string()}).code, 0);
  const stq::Frame out = stq::load_frame(dir / "out.png");
  EXPECT_EQ(out.width(), 20);
  EXPECT_EQ(out.height(), 12);
}

TEST(Cli, TradeoffPrintsPass) {
  TempDir dir("stq_cli_trade");
  const fs::path root = small_corpus(dir, "c");
  const RunResult r = run({"tradeoff", "--hr-t", (root / "hr" / "static_00" / "000000.png").string(), "--hr-next",
                           (root / "hr" / "static_00" / "000001.png").string(), "--betas", "0,1,10", "--out",
                           (dir / "t.dat").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "PASS\n");
  EXPECT_EQ(stq::read_gnuplot_data(dir / "t.dat").records.size(), 3u);
}

TEST(Cli, TradeoffOnIdenticalFramesFails) {
  TempDir dir("stq_cli_flat");
  stq::save_frame(stq::Frame(16, 16, 1, 0.5), dir / "a.png");
  const RunResult r = run({"tradeoff", "--hr-t", (dir / "a.png").string(), "--hr-next", (dir / "a.png").string(),
                           "--betas", "0,1", "--out", (dir / "t.dat").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.out, "FAIL\n");
  EXPECT_NE(r.err.find("degenerate"), std::string::npos);
}

TEST(Cli, OutputsAreByteIdenticalAcrossRunsAndThreads) {
  TempDir dir("stq_cli_det");
  const fs::path a = small_corpus(dir, "a");
  const fs::path b = small_corpus(dir, "b");
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    EXPECT_EQ(read_file(entry.path()), read_file(b / fs::relative(entry.path(), a))) << entry.path();
  }

  ASSERT_EQ(run({"--threads", "1", "evaluate", "--manifest", (a / "manifest.ini").string(), "--out-dir",
                 (dir / "e1").string()})
                .code,
            0);
  ASSERT_EQ(run({"evaluate", "--threads", "4", "--manifest", (a / "manifest.ini").string(), "--out-dir",
                 (dir / "e4").string()})
                .code,
            0);
  for (const char* f : {"per_video.csv", "summary.json", "scatter_mse_warping_error.dat",
                        "scatter_one_minus_ssim_warping_error.dat"}) {
    EXPECT_EQ(read_file(dir / "e1" / f), read_file(dir / "e4" / f)) << f;
  }

  const std::string t0 = (a / "hr" / "static_01" / "000000.png").string();
  const std::string t1 = (a / "hr" / "static_01" / "000001.png").string();
  for (const char* threads : {"1", "3"}) {
    ASSERT_EQ(run({"--threads", threads, "tradeoff", "--hr-t", t0, "--hr-next", t1, "--betas", "0,0.5,5", "--out",
                   (dir / (std::string("t") + threads + ".dat")).string()})
                  .code,
              0);
  }
  EXPECT_EQ(read_file(dir / "t1.dat"), read_file(dir / "t3.dat"));
}
