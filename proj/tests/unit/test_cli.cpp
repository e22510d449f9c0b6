#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "hpcgen/array_container.hpp"
#include "hpcgen/cli.hpp"
#include "hpcgen/depth_renderer.hpp"
#include "hpcgen/pipeline.hpp"
#include "hpcgen/toy_assets.hpp"
#include "process_support.hpp"
#include "test_support.hpp"

// After Eigen: resolv.h (via httplib) defines a _res macro.
#include <httplib.h>

using namespace hpcgen;
using hpcgen::testkit::source_path;
using hpcgen::testkit::TempDir;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string fixture(const std::string& name) { return source_path("tests/fixtures/" + name).string(); }

}  // namespace

TEST(Cli, HelpForEverySubcommand) {
  EXPECT_EQ(run({"--help"}).code, 0);
  for (const char* sub :
       {"generate", "score-pose", "render-depth", "evaluate", "serve-mock", "make-toy-assets", "verify-dataset"}) {
    const Result r = run({sub, "--help"});
    EXPECT_EQ(r.code, 0) << sub;
    EXPECT_NE(r.out.find("--"), std::string::npos) << sub;
  }
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, cli::kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"generate", "--prompt", "a"}).code, cli::kExitUsage);  // no --out
  TempDir dir;
  const std::string out = (dir / "ds").string();
  EXPECT_EQ(run({"generate", "--prompt", "a", "--out", out, "--tau", "-1"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"generate", "--prompt", "a", "--out", out, "--strength", "0"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"generate", "--out", out}).code, cli::kExitUsage);  // no input
  EXPECT_EQ(run({"generate", "--prompt", "a", "--out", out, "--person-policy", "crowd"}).code, cli::kExitUsage);
  write_text(dir / "bad.json", R"({"tau": 1, "colour": "red"})");
  EXPECT_EQ(run({"generate", "--prompt", "a", "--out", out, "--config", (dir / "bad.json").string()}).code,
            cli::kExitUsage);
}

TEST(Cli, GenerateWithMockBackend) {
  TempDir dir;
  const std::string out = (dir / "ds").string();
  const Result r = run({"generate", "--prompt", "a photo of an athlete doing yoga", "--prompt", "a dancer",
                        "--backend", "mock", "--seed", "7", "--image-size", "64", "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("inputs: 2"), std::string::npos) << r.out;
  std::ifstream in(dir / "ds" / "manifest.json");
  const auto manifest = nlohmann::json::parse(in);
  EXPECT_EQ(manifest["model_id"], "hpcgen-mock-1");
  EXPECT_EQ(manifest["config"]["seed"], 7);
  const auto samples = read_annotations(dir / "ds");
  EXPECT_EQ(manifest["record_count"], samples.size());
  EXPECT_GE(samples.size(), 2u);

  EXPECT_EQ(run({"verify-dataset", "--dir", out}).code, 0);

  // Same flags, same bytes.
  const std::string again = (dir / "again").string();
  ASSERT_EQ(run({"generate", "--prompt", "a photo of an athlete doing yoga", "--prompt", "a dancer", "--backend",
                 "mock", "--seed", "7", "--image-size", "64", "--out", again})
                .code,
            0);
  EXPECT_EQ(read_text(dir / "ds" / "annotations.jsonl"), read_text(dir / "again" / "annotations.jsonl"));
}

TEST(Cli, GenerateConfigFileAndOverrides) {
  TempDir dir;
  write_text(dir / "cfg.json", R"({"tau": "inf", "augmentations_per_input": 0, "image_size": 64, "seed": 3})");
  const std::string out = (dir / "ds").string();
  const Result r = run({"generate", "--prompt", "a", "--config", (dir / "cfg.json").string(), "--backend", "mock",
                        "--seed", "5", "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(dir / "ds" / "manifest.json");
  const auto manifest = nlohmann::json::parse(in);
  EXPECT_EQ(manifest["config"]["tau"], "inf");
  EXPECT_EQ(manifest["config"]["seed"], 5);
  for (const auto& s : read_annotations(dir / "ds")) EXPECT_FALSE(s.gated);
}

TEST(Cli, GenerateNothingEmittedFails) {
  TempDir dir;
  const std::string out = (dir / "ds").string();
  const std::vector<std::string> base = {"generate", "--prompt", "a", "--backend", "mock", "--tau", "inf",
                                         "--no-ungated", "--image-size", "64", "--out", out};
  EXPECT_EQ(run(base).code, cli::kExitFailure);
  std::vector<std::string> allow = base;
  allow.push_back("--allow-empty");
  EXPECT_EQ(run(allow).code, 0);
}

TEST(Cli, GenerateUnreachableBackendFails) {
  TempDir dir;
  const Result r = run({"generate", "--prompt", "a", "--backend", "http://127.0.0.1:1", "--image-size", "64",
                        "--out", (dir / "ds").string()});
  EXPECT_EQ(r.code, cli::kExitFailure);
  EXPECT_NE(r.err.find("backend"), std::string::npos) << r.err;
}

TEST(Cli, ScorePose) {
  const Result mean = run({"score-pose", "--pose", fixture("zero_pose.json"), "--mean"});
  ASSERT_EQ(mean.code, 0) << mean.err;
  EXPECT_NE(mean.out.find("score: 0\n"), std::string::npos) << mean.out;
  EXPECT_NE(mean.out.find("verdict: easy"), std::string::npos);

  const Result sampled = run({"score-pose", "--pose", fixture("zero_pose.json"), "--seed", "4"});
  ASSERT_EQ(sampled.code, 0);
  EXPECT_EQ(sampled.out, run({"score-pose", "--pose", fixture("zero_pose.json"), "--seed", "4"}).out);
  EXPECT_NE(sampled.out.find("mode: sampled"), std::string::npos);

  TempDir dir;
  write_text(dir / "hard.json", R"({"body_pose": [[1.2, 0, 0], [0, 0, -0.9]]})");
  const Result hard = run({"score-pose", "--pose", (dir / "hard.json").string(), "--mean"});
  EXPECT_NE(hard.out.find("verdict: hard"), std::string::npos) << hard.out;
  EXPECT_NE(run({"score-pose", "--pose", (dir / "hard.json").string(), "--mean", "--tau", "1e9"})
                .out.find("verdict: easy"),
            std::string::npos);

  write_text(dir / "bad.json", R"({"body_pose": [[1, 2]]})");
  EXPECT_EQ(run({"score-pose", "--pose", (dir / "bad.json").string()}).code, cli::kExitUsage);
  write_text(dir / "three.json", R"({"body_pose": [[0, 0, 0], [0, 0, 0], [0, 0, 0]]})");
  EXPECT_EQ(run({"score-pose", "--pose", (dir / "three.json").string()}).code, cli::kExitUsage);
  EXPECT_EQ(run({"score-pose", "--pose", (dir / "missing.json").string()}).code, cli::kExitUsage);
  EXPECT_EQ(run({"score-pose", "--pose", fixture("zero_pose.json"), "--tau", "-2"}).code, cli::kExitUsage);
}

TEST(Cli, RenderDepthMatchesFixture) {
  TempDir dir;
  const std::string bin = (dir / "d.bin").string();
  const Result r = run({"render-depth", "--pose", fixture("zero_pose.json"), "--cam", fixture("toy_camera.json"),
                        "--size", "64", "--out", bin});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_file_bytes(bin), read_file_bytes(fixture("toy_zero_pose_depth64.bin")));

  const std::string png = (dir / "d.png").string();
  ASSERT_EQ(run({"render-depth", "--pose", fixture("zero_pose.json"), "--cam", fixture("toy_camera.json"), "--out",
                 png})
                .code,
            0);
  const auto bytes = read_file_bytes(png);
  ASSERT_GT(bytes.size(), 8u);
  EXPECT_EQ(bytes[1], 'P');

  EXPECT_EQ(run({"render-depth", "--pose", fixture("zero_pose.json"), "--cam", fixture("toy_camera.json"), "--size",
                 "0", "--out", bin})
                .code,
            cli::kExitUsage);
  EXPECT_EQ(run({"render-depth", "--pose", fixture("zero_pose.json"), "--out", bin}).code, cli::kExitUsage);
}

TEST(Cli, EvaluateIdenticalAndMismatched) {
  TempDir dir;
  const std::string rec =
      R"({"sample_id": "s1", "joints": [[0,0,0],[0.1,0.2,0],[0.3,0,0.1],[0,0.4,0.2]], "keypoints": [[1,2],[3,4],[5,6],[7,8]]})"
      "\n"
      R"({"sample_id": "s2", "joints": [[0,0,0],[0.2,0.1,0],[0.1,0.3,0.1],[0.4,0,0.2]], "keypoints": [[2,2],[3,3],[5,5],[8,8]]})"
      "\n";
  write_text(dir / "pred.jsonl", rec);
  write_text(dir / "gt.jsonl", rec);
  const Result r = run({"evaluate", "--pred", (dir / "pred.jsonl").string(), "--gt", (dir / "gt.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("MPJPE (mm): 0.0000"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("PCK: 1.0000"), std::string::npos) << r.out;
  const auto report_path = dir / "pred.report.jsonl";
  ASSERT_TRUE(std::filesystem::exists(report_path));
  const std::string first = read_text(report_path);
  EXPECT_NE(first.find("\"threshold_px\":10.0"), std::string::npos) << first;
  ASSERT_EQ(run({"evaluate", "--pred", (dir / "pred.jsonl").string(), "--gt", (dir / "gt.jsonl").string()}).code, 0);
  EXPECT_EQ(read_text(report_path), first);

  write_text(dir / "other.jsonl", rec.substr(0, rec.find('\n') + 1));
  const Result mismatch =
      run({"evaluate", "--pred", (dir / "pred.jsonl").string(), "--gt", (dir / "other.jsonl").string()});
  EXPECT_EQ(mismatch.code, cli::kExitFailure);
  EXPECT_NE(mismatch.err.find("only in --pred: s2"), std::string::npos) << mismatch.err;

  EXPECT_EQ(run({"evaluate", "--pred", (dir / "pred.jsonl").string(), "--gt", (dir / "gt.jsonl").string(),
                 "--pck-thresh", "0"})
                .code,
            cli::kExitUsage);
  write_text(dir / "junk.jsonl", "{not json\n");
  EXPECT_EQ(run({"evaluate", "--pred", (dir / "junk.jsonl").string(), "--gt", (dir / "gt.jsonl").string()}).code,
            cli::kExitUsage);
}

TEST(Cli, MakeToyAssetsMatchesShippedData) {
  TempDir dir;
  ASSERT_EQ(run({"make-toy-assets", "--out-dir", dir.path().string()}).code, 0);
  EXPECT_EQ(read_file_bytes(dir / "toy_body_model.npz"), read_file_bytes(source_path("data/toy_body_model.npz")));
  EXPECT_EQ(read_file_bytes(dir / "toy_pose_prior.npz"), read_file_bytes(source_path("data/toy_pose_prior.npz")));
}

TEST(Cli, VerifyDatasetDetectsTampering) {
  TempDir dir;
  const std::string out = (dir / "ds").string();
  ASSERT_EQ(run({"generate", "--prompt", "x", "--backend", "mock", "--tau", "0", "--augs", "0", "--image-size", "64",
                 "--out", out})
                .code,
            0);
  const auto samples = read_annotations(out);
  ASSERT_FALSE(samples.empty());
  DepthMap d = read_depth_bin(dir / "ds" / samples[0].depth_file);
  d.data[0] += 1.0f;
  write_depth_bin(d, dir / "ds" / samples[0].depth_file);
  EXPECT_EQ(run({"verify-dataset", "--dir", out}).code, cli::kExitFailure);
}

TEST(Cli, ServeMockOverHttp) {
  hpcgen::testkit::ChildProcess server({hpcgen::testkit::cli_path().string(), "serve-mock", "--port", "0"});
  const int port = hpcgen::testkit::port_from_banner(server.read_line());
  ASSERT_GT(port, 0);
  httplib::Client client("127.0.0.1", port);
  const auto health = client.Get("/v1/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  EXPECT_EQ(nlohmann::json::parse(health->body)["status"], "ok");
  const auto missing = client.Post("/v1/nothing", R"({"api_version":"1"})", "application/json");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
  server.terminate();
  EXPECT_EQ(server.wait(), 0);
}

TEST(Cli, ServeMockBadPort) { EXPECT_EQ(run({"serve-mock", "--port", "70000"}).code, cli::kExitUsage); }
