#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "hpcgen/backend/rle.hpp"
#include "hpcgen/body_model.hpp"
#include "hpcgen/camera.hpp"
#include "hpcgen/image_io.hpp"

namespace hpcgen {

inline constexpr int kDefaultImageSize = 512;
inline constexpr int kDefaultSteps = 50;
inline constexpr double kDefaultStrength = 0.8;

// Compressed image latents, C x H x W float32, C-order.
struct Latents {
  int channels = 4;
  int height = 64;
  int width = 64;
  std::vector<float> data;

  Latents() = default;
  Latents(int c, int h, int w)
      : channels(c), height(h), width(w), data(static_cast<std::size_t>(c) * static_cast<std::size_t>(h) * static_cast<std::size_t>(w), 0.0f) {}

  void validate() const;
  // Hex FNV-1a 64 of the raw float bytes; echoed by backends for provenance.
  std::string checksum() const;
  bool operator==(const Latents&) const = default;
};

// Text prompt plus sampler knobs. Text embeddings are computed inside the
// backend; `guidance` is passed through untouched.
struct GenerationRequest {
  std::string prompt;
  std::uint64_t seed = 0;
  int num_steps = kDefaultSteps;
  double strength = kDefaultStrength;  // latent noise level, (0, 1]
  int width = kDefaultImageSize;
  int height = kDefaultImageSize;
  nlohmann::json guidance = nlohmann::json::object();

  // Throws ValidationError on an empty prompt, num_steps < 1 or strength
  // outside (0, 1].
  void validate() const;
};

struct HmrPerson {
  PoseParams theta;
  ShapeParams beta;
  WeakPerspectiveCamera camera;
  double confidence = 1.0;
};

struct HmrResult {
  std::vector<HmrPerson> people;
};

struct SegmentationInstance {
  std::string class_label;
  RleMask mask;
  double score = 1.0;
};

struct SegmentationResult {
  std::vector<SegmentationInstance> instances;
};

}  // namespace hpcgen
