#include <cstring>

#include <gtest/gtest.h>

#include "hpcgen/backend/rle.hpp"
#include "hpcgen/backend/wire.hpp"
#include "hpcgen/error.hpp"
#include "hpcgen/rng.hpp"

using namespace hpcgen;
using nlohmann::json;

namespace {

// Naive column-major run-length codec used as the oracle.
std::vector<std::uint32_t> naive_counts(const MaskImage& m) {
  std::vector<std::uint32_t> counts;
  bool current = false;
  std::uint32_t run = 0;
  for (int x = 0; x < m.width; ++x) {
    for (int y = 0; y < m.height; ++y) {
      if (m.at(x, y) != current) {
        counts.push_back(run);
        run = 0;
        current = !current;
      }
      ++run;
    }
  }
  counts.push_back(run);
  return counts;
}

MaskImage random_mask(Rng& rng, int w, int h) {
  MaskImage m(w, h);
  // Mix of densities and blocky structure so long runs occur too.
  const double p = rng.uniform01();
  const int block = 1 + static_cast<int>(rng.next_u64() % 4);
  const std::uint64_t salt = rng.next_u64();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      Rng cell(derive_seed(salt, static_cast<std::uint64_t>(x / block), static_cast<std::uint64_t>(y / block)));
      m.set(x, y, cell.uniform01() < p);
    }
  }
  return m;
}

HmrResult sample_hmr() {
  HmrPerson p;
  p.theta = PoseParams::zero(3);
  p.theta.global_orient << 0.1, -0.2, 0.3;
  p.theta.body_pose << 0.25, 0.5, -0.75, 1e-17, 3.0, -0.125;
  p.beta.betas = Eigen::Vector4d(0.1, 0.2, -0.3, 1.0 / 3.0);
  p.camera.scale = 0.8;
  p.camera.tx = 0.0625;
  p.camera.ty = -0.1;
  p.camera.width = 512;
  p.camera.height = 512;
  p.confidence = 0.93;
  return {{p}};
}

}  // namespace

TEST(Base64, KnownVectors) {
  auto enc = [](const std::string& s) { return wire::base64_encode({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()}); };
  EXPECT_EQ(enc(""), "");
  EXPECT_EQ(enc("f"), "Zg==");
  EXPECT_EQ(enc("fo"), "Zm8=");
  EXPECT_EQ(enc("foo"), "Zm9v");
  EXPECT_EQ(enc("foob"), "Zm9vYg==");
  EXPECT_EQ(enc("fooba"), "Zm9vYmE=");
  EXPECT_EQ(enc("foobar"), "Zm9vYmFy");
  const auto dec = wire::base64_decode("Zm9vYmE=");
  EXPECT_EQ(std::string(dec.begin(), dec.end()), "fooba");
  EXPECT_THROW(wire::base64_decode("Zm9"), ProtocolError);
  EXPECT_THROW(wire::base64_decode("Zm9*"), ProtocolError);
}

TEST(Base64, RandomRoundTrip) {
  Rng rng(3);
  for (int n = 0; n < 200; ++n) {
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(n));
    for (auto& b : bytes) b = static_cast<std::uint8_t>(rng.next_u64());
    EXPECT_EQ(wire::base64_decode(wire::base64_encode(bytes)), bytes);
  }
}

TEST(Rle, Examples) {
  MaskImage m(3, 2);
  // Column-major order: (0,0) (0,1) (1,0) (1,1) (2,0) (2,1).
  m.set(1, 0, true);
  m.set(1, 1, true);
  m.set(2, 0, true);
  const RleMask r = encode_rle(m);
  EXPECT_EQ(r.height, 2);
  EXPECT_EQ(r.width, 3);
  EXPECT_EQ(r.counts, (std::vector<std::uint32_t>{2, 3, 1}));

  MaskImage full(2, 2);
  std::fill(full.data.begin(), full.data.end(), 1);
  EXPECT_EQ(encode_rle(full).counts, (std::vector<std::uint32_t>{0, 4}));
  EXPECT_EQ(encode_rle(MaskImage(2, 2)).counts, (std::vector<std::uint32_t>{4}));
}

TEST(Rle, RoundTripAgainstNaiveCodec) {
  Rng rng(500);
  for (int trial = 0; trial < 500; ++trial) {
    const int w = 1 + static_cast<int>(rng.next_u64() % 40), h = 1 + static_cast<int>(rng.next_u64() % 40);
    const MaskImage m = random_mask(rng, w, h);
    const RleMask r = encode_rle(m);
    ASSERT_EQ(r.counts, naive_counts(m)) << "trial " << trial;
    ASSERT_TRUE(decode_rle(r).same_pixels(m)) << "trial " << trial;
    ASSERT_EQ(encode_rle(decode_rle(r)), r);
    ASSERT_EQ(wire::rle_from_json(json::parse(wire::rle_to_json(r).dump())), r);
  }
}

TEST(Rle, RunsMustCoverMask) {
  EXPECT_THROW(decode_rle({2, 2, {1, 2}}), ProtocolError);
  EXPECT_THROW(decode_rle({2, 2, {3, 2}}), ProtocolError);
  EXPECT_EQ(decode_rle({2, 2, {1, 2, 1}}, "chair").class_label, "chair");
}

TEST(Rle, ResampleByPixelCenters) {
  MaskImage m(4, 4);
  m.set(1, 1, true);
  m.set(3, 3, true);
  const MaskImage d = resample_mask(m, 2, 2);
  EXPECT_TRUE(d.at(0, 0));
  EXPECT_TRUE(d.at(1, 1));
  EXPECT_FALSE(d.at(1, 0));
  const MaskImage u = resample_mask(d, 8, 8);
  EXPECT_EQ(u.count(), 32u);
}

TEST(Wire, VersionEnforced) {
  EXPECT_NO_THROW(wire::check_api_version({{"api_version", "1"}}));
  EXPECT_THROW(wire::check_api_version({{"api_version", "2"}}), ProtocolError);
  EXPECT_THROW(wire::check_api_version({{"api_version", 1}}), ProtocolError);
  EXPECT_THROW(wire::check_api_version({{"model_id", "x"}}), ProtocolError);
  EXPECT_THROW(wire::check_api_version(json::array()), ProtocolError);
}

TEST(Wire, ImageRoundTrip) {
  Rng rng(1);
  ImageBuffer img(13, 7);
  for (auto& b : img.rgb) b = static_cast<std::uint8_t>(rng.next_u64());
  EXPECT_EQ(wire::image_from_json(json::parse(wire::image_to_json(img).dump())), img);
  json bad = wire::image_to_json(img);
  bad["width"] = 12;
  EXPECT_THROW(wire::image_from_json(bad), ProtocolError);
  EXPECT_THROW(wire::image_from_json({{"width", 1}, {"height", 1}, {"png_base64", "AAAA"}}), ProtocolError);
}

TEST(Wire, LatentsAndDepthRoundTrip) {
  Rng rng(2);
  Latents z(4, 8, 6);
  for (float& v : z.data) v = static_cast<float>(rng.normal());
  z.data[0] = -0.0f;
  z.data[1] = 1e-40f;  // subnormal survives
  const Latents back = wire::latents_from_json(json::parse(wire::latents_to_json(z).dump()));
  EXPECT_EQ(std::memcmp(back.data.data(), z.data.data(), z.data.size() * 4), 0);
  EXPECT_EQ(back.checksum(), z.checksum());
  json bad = wire::latents_to_json(z);
  bad["shape"] = {4, 8, 5};
  EXPECT_THROW(wire::latents_from_json(bad), ProtocolError);
  bad = wire::latents_to_json(z);
  bad["dtype"] = "float64";
  EXPECT_THROW(wire::latents_from_json(bad), ProtocolError);

  DepthMap d(5, 3);
  for (float& v : d.data) v = static_cast<float>(rng.uniform(0, 2));
  EXPECT_EQ(wire::depth_from_json(json::parse(wire::depth_to_json(d).dump())), d);
}

TEST(Wire, CameraAndRequestRoundTrip) {
  WeakPerspectiveCamera c;
  c.scale = 0.1 + 0.2;  // not exactly representable in short decimal
  c.tx = -1.0 / 3.0;
  c.ty = 1e-300;
  c.width = 640;
  c.height = 480;
  const WeakPerspectiveCamera b = wire::camera_from_json(json::parse(wire::camera_to_json(c).dump()));
  EXPECT_EQ(b.scale, c.scale);
  EXPECT_EQ(b.tx, c.tx);
  EXPECT_EQ(b.ty, c.ty);
  EXPECT_EQ(b.width, 640);
  EXPECT_THROW(wire::camera_from_json({{"scale", 1}}), ProtocolError);

  GenerationRequest req;
  req.prompt = "a photo of an athlete doing \"ski\" jumps \xc3\xa9";
  req.seed = 0xffffffffffffffffULL;
  req.num_steps = 25;
  req.strength = 0.35;
  req.width = 256;
  req.height = 128;
  req.guidance = {{"cfg", 7.5}};
  json j = json::object();
  wire::put_generation_request(j, req);
  const GenerationRequest r = wire::generation_request_from_json(json::parse(j.dump()));
  EXPECT_EQ(r.prompt, req.prompt);
  EXPECT_EQ(r.seed, req.seed);
  EXPECT_EQ(r.num_steps, 25);
  EXPECT_EQ(r.strength, 0.35);
  EXPECT_EQ(r.width, 256);
  EXPECT_EQ(r.height, 128);
  EXPECT_EQ(r.guidance, req.guidance);
}

TEST(Wire, RequestValidation) {
  GenerationRequest req;
  req.prompt = "a";
  EXPECT_NO_THROW(req.validate());
  req.strength = 0.0;
  EXPECT_THROW(req.validate(), ValidationError);
  req.strength = 1.0;
  EXPECT_NO_THROW(req.validate());
  req.strength = 1.01;
  EXPECT_THROW(req.validate(), ValidationError);
  req.strength = 0.5;
  req.num_steps = 0;
  EXPECT_THROW(req.validate(), ValidationError);
  req.num_steps = 1;
  req.prompt.clear();
  EXPECT_THROW(req.validate(), ValidationError);
}

TEST(Wire, HmrRoundTrip) {
  const HmrResult h = sample_hmr();
  const json j = json::parse(wire::hmr_result_to_json(h).dump());
  EXPECT_EQ(j["people"][0]["theta"].size(), 9u);
  const HmrResult back = wire::hmr_result_from_json(j, 0);
  ASSERT_EQ(back.people.size(), 1u);
  EXPECT_EQ(back.people[0].theta.global_orient, h.people[0].theta.global_orient);
  EXPECT_EQ(back.people[0].theta.body_pose, h.people[0].theta.body_pose);
  EXPECT_EQ(back.people[0].beta.betas, h.people[0].beta.betas);
  EXPECT_EQ(back.people[0].camera.scale, h.people[0].camera.scale);
  EXPECT_EQ(back.people[0].confidence, h.people[0].confidence);
  EXPECT_TRUE(wire::hmr_result_from_json({{"people", json::array()}}, 0).people.empty());
}

TEST(Wire, HmrRejectsBadValues) {
  json j = wire::hmr_result_to_json(sample_hmr());
  j["people"][0]["confidence"] = 1.5;
  EXPECT_THROW(wire::hmr_result_from_json(j, 0), ProtocolError);
  j = wire::hmr_result_to_json(sample_hmr());
  j["people"][0]["camera"]["scale"] = -1.0;
  EXPECT_THROW(wire::hmr_result_from_json(j, 0), ProtocolError);
  j = wire::hmr_result_to_json(sample_hmr());
  j["people"][0].erase("beta");
  EXPECT_THROW(wire::hmr_result_from_json(j, 0), ProtocolError);
}

TEST(Wire, ThetaConventions) {
  std::vector<double> full(72);
  for (int i = 0; i < 72; ++i) full[static_cast<std::size_t>(i)] = 0.01 * i;
  const PoseParams p = wire::normalize_theta(full, std::string("full"), 0);
  EXPECT_EQ(p.global_orient, Eigen::Vector3d(0.0, 0.01, 0.02));
  ASSERT_EQ(p.body_pose.rows(), 23);
  EXPECT_EQ(p.body_pose(0, 0), 0.03);
  EXPECT_EQ(p.body_pose(22, 2), 0.71);

  const std::vector<double> body(full.begin() + 3, full.end());
  const PoseParams q = wire::normalize_theta(body, std::string("body"), 0);
  EXPECT_EQ(q.global_orient, Eigen::Vector3d::Zero());
  EXPECT_EQ(q.body_pose, p.body_pose);

  // Undeclared: decided by length against the expected joint count.
  EXPECT_EQ(wire::normalize_theta(full, std::nullopt, 23).body_pose, p.body_pose);
  EXPECT_EQ(wire::normalize_theta(full, std::nullopt, 23).global_orient, p.global_orient);
  EXPECT_EQ(wire::normalize_theta(body, std::nullopt, 23).body_pose, p.body_pose);
  EXPECT_THROW(wire::normalize_theta(body, std::nullopt, 0), ProtocolError);
  EXPECT_THROW(wire::normalize_theta(std::vector<double>(70), std::nullopt, 23), ProtocolError);
  EXPECT_THROW(wire::normalize_theta(full, std::string("euler"), 0), ProtocolError);
  EXPECT_THROW(wire::normalize_theta(std::vector<double>(71), std::string("full"), 0), ProtocolError);
}

TEST(Wire, SegmentationRoundTripAndScoreRange) {
  Rng rng(4);
  SegmentationResult s;
  for (int i = 0; i < 3; ++i) s.instances.push_back({i == 0 ? "person" : "chair", encode_rle(random_mask(rng, 9, 5)), 0.25 * i});
  const SegmentationResult back = wire::segmentation_from_json(json::parse(wire::segmentation_to_json(s).dump()));
  ASSERT_EQ(back.instances.size(), 3u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(back.instances[i].class_label, s.instances[i].class_label);
    EXPECT_EQ(back.instances[i].mask, s.instances[i].mask);
    EXPECT_EQ(back.instances[i].score, s.instances[i].score);
  }
  json j = wire::segmentation_to_json(s);
  j["instances"][1]["score"] = 1.2;
  EXPECT_THROW(wire::segmentation_from_json(j), ProtocolError);
  j["instances"][1]["score"] = -0.1;
  EXPECT_THROW(wire::segmentation_from_json(j), ProtocolError);
}

TEST(Wire, Envelope) {
  const json e = wire::response_envelope("m", 42, "r-1");
  EXPECT_EQ(e["api_version"], "1");
  EXPECT_EQ(e["model_id"], "m");
  EXPECT_EQ(e["seed"], 42);
  EXPECT_EQ(e["request_id"], "r-1");
  EXPECT_NO_THROW(wire::check_api_version(e));
}
