#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <string>

#include "hpcgen/backend/backend.hpp"

namespace hpcgen {

struct MockBackendConfig {
  std::string model_id = "hpcgen-mock-1";
  int body_joint_count = 2;  // toy body: K = 3
  int shape_count = 4;
  int latent_channels = 4;
  int latent_factor = 8;  // image pixels per latent cell
};

/** Deterministic stand-in for the real models; every output is a pure
 *  function of the inputs. The procedural rules are documented in
 *  docs/mock_backend.md so fixtures can be recomputed independently.
 *
 *  HMR answers can be pinned per image with set_canned_hmr(); otherwise a
 *  pose is derived from the image hash. */
class MockBackend final : public Backend {
 public:
  explicit MockBackend(MockBackendConfig config = {});

  ImageBuffer txt2img(const GenerationRequest& req) override;
  Latents encode_latents(const ImageBuffer& image) override;
  ImageBuffer depth2img(const Latents& z, const DepthMap& depth, const GenerationRequest& req) override;
  HmrResult hmr(const ImageBuffer& image) override;
  SegmentationResult segment(const ImageBuffer& image) override;
  std::string model_id() const override { return config_.model_id; }

  const MockBackendConfig& config() const { return config_; }

  void set_canned_hmr(std::uint64_t image_hash, HmrResult result);
  static std::uint64_t image_hash(const ImageBuffer& image);

 private:
  MockBackendConfig config_;
  mutable std::mutex canned_mutex_;
  std::map<std::uint64_t, HmrResult> canned_hmr_;
};

// Procedural background shared by txt2img and depth2img.
ImageBuffer mock_procedural_image(const std::string& prompt, std::uint64_t seed, int num_steps, int width,
                                  int height);

}  // namespace hpcgen
