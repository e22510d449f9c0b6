#include "hpcgen/backend/mock_backend.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "hpcgen/error.hpp"
#include "hpcgen/rng.hpp"

namespace hpcgen {

namespace {

constexpr double kGradientSpan = 96.0;
constexpr std::uint64_t kSegmentSalt = 0x5e6e5e6e5e6e5e6eULL;
constexpr std::array<const char*, 4> kOccluderClasses = {"chair", "surfboard", "bench", "horse"};

std::uint8_t to_u8(double v) { return static_cast<std::uint8_t>(std::clamp<long>(std::lround(v), 0, 255)); }

bool is_constant(const ImageBuffer& image) {
  for (std::size_t i = 3; i < image.rgb.size(); i += 3) {
    if (image.rgb[i] != image.rgb[0] || image.rgb[i + 1] != image.rgb[1] || image.rgb[i + 2] != image.rgb[2]) {
      return false;
    }
  }
  return true;
}

MaskImage rectangle(int width, int height, int x0, int y0, int x1, int y1, std::string label) {
  MaskImage m(width, height, std::move(label));
  for (int y = std::max(0, y0); y < std::min(height, y1); ++y) {
    for (int x = std::max(0, x0); x < std::min(width, x1); ++x) m.set(x, y, true);
  }
  return m;
}

}  // namespace

ImageBuffer mock_procedural_image(const std::string& prompt, std::uint64_t seed, int num_steps, int width,
                                  int height) {
  const std::uint64_t h = fnv1a64(prompt.data(), prompt.size());
  const double base[3] = {static_cast<double>(h & 0xff), static_cast<double>((h >> 8) & 0xff),
                          static_cast<double>((h >> 16) & 0xff)};
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(num_steps)));
  double gx[3], gy[3];
  for (int c = 0; c < 3; ++c) {
    gx[c] = rng.uniform(-kGradientSpan, kGradientSpan);
    gy[c] = rng.uniform(-kGradientSpan, kGradientSpan);
  }
  ImageBuffer image(width, height);
  for (int y = 0; y < height; ++y) {
    const double fy = (y + 0.5) / height - 0.5;
    for (int x = 0; x < width; ++x) {
      const double fx = (x + 0.5) / width - 0.5;
      const std::size_t i = 3 * (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x));
      for (int c = 0; c < 3; ++c) image.rgb[i + static_cast<std::size_t>(c)] = to_u8(base[c] + gx[c] * fx + gy[c] * fy);
    }
  }
  return image;
}

MockBackend::MockBackend(MockBackendConfig config) : config_(std::move(config)) {}

std::uint64_t MockBackend::image_hash(const ImageBuffer& image) {
  const std::uint32_t dims[2] = {static_cast<std::uint32_t>(image.width), static_cast<std::uint32_t>(image.height)};
  return fnv1a64(image.rgb.data(), image.rgb.size(), fnv1a64(dims, sizeof dims));
}

void MockBackend::set_canned_hmr(std::uint64_t image_hash, HmrResult result) {
  std::lock_guard lock(canned_mutex_);
  canned_hmr_.insert_or_assign(image_hash, std::move(result));
}

ImageBuffer MockBackend::txt2img(const GenerationRequest& req) {
  req.validate();
  return mock_procedural_image(req.prompt, req.seed, req.num_steps, req.width, req.height);
}

Latents MockBackend::encode_latents(const ImageBuffer& image) {
  image.validate();
  const int f = config_.latent_factor;
  if (image.width % f != 0 || image.height % f != 0) {
    throw ValidationError("mock encode: image size must be a multiple of " + std::to_string(f));
  }
  // Channels 0-2: block mean of R, G, B / 255; channel 3: block mean luma.
  Latents z(config_.latent_channels, image.height / f, image.width / f);
  const double norm = 1.0 / (255.0 * f * f);
  for (int ly = 0; ly < z.height; ++ly) {
    for (int lx = 0; lx < z.width; ++lx) {
      double sum[4] = {0, 0, 0, 0};
      for (int y = ly * f; y < (ly + 1) * f; ++y) {
        for (int x = lx * f; x < (lx + 1) * f; ++x) {
          const std::size_t i = 3 * (static_cast<std::size_t>(y) * static_cast<std::size_t>(image.width) + static_cast<std::size_t>(x));
          const double r = image.rgb[i], g = image.rgb[i + 1], b = image.rgb[i + 2];
          sum[0] += r;
          sum[1] += g;
          sum[2] += b;
          sum[3] += 0.299 * r + 0.587 * g + 0.114 * b;
        }
      }
      for (int c = 0; c < std::min(4, z.channels); ++c) {
        z.data[(static_cast<std::size_t>(c) * static_cast<std::size_t>(z.height) + static_cast<std::size_t>(ly)) * static_cast<std::size_t>(z.width) + static_cast<std::size_t>(lx)] =
            static_cast<float>(sum[c] * norm);
      }
    }
  }
  return z;
}

ImageBuffer MockBackend::depth2img(const Latents& z, const DepthMap& depth, const GenerationRequest& req) {
  req.validate();
  z.validate();
  if (depth.width != z.width || depth.height != z.height) {
    throw ShapeError("depth2img: depth is " + std::to_string(depth.width) + "x" + std::to_string(depth.height) +
                     " but latents are " + std::to_string(z.width) + "x" + std::to_string(z.height));
  }
  const int f = config_.latent_factor;
  ImageBuffer image = mock_procedural_image(req.prompt, req.seed, req.num_steps, z.width * f, z.height * f);
  // Silhouette composite: covered pixels become gray level round(255 d).
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const float d = depth.at(x / f, y / f);
      if (d <= 0.0f) continue;
      const std::uint8_t v = to_u8(255.0 * d);
      const std::size_t i = 3 * (static_cast<std::size_t>(y) * static_cast<std::size_t>(image.width) + static_cast<std::size_t>(x));
      image.rgb[i] = image.rgb[i + 1] = image.rgb[i + 2] = v;
    }
  }
  return image;
}

HmrResult MockBackend::hmr(const ImageBuffer& image) {
  image.validate();
  const std::uint64_t key = image_hash(image);
  {
    std::lock_guard lock(canned_mutex_);
    const auto it = canned_hmr_.find(key);
    if (it != canned_hmr_.end()) return it->second;
  }
  if (is_constant(image)) return {};

  Rng rng(key);
  const bool hard = rng.uniform01() < 0.5;
  const double amplitude = hard ? 0.9 : 0.15;
  const auto J = static_cast<Eigen::Index>(config_.body_joint_count);

  HmrPerson main;
  main.theta.body_pose.resize(J, 3);
  for (Eigen::Index i = 0; i < main.theta.body_pose.size(); ++i) {
    main.theta.body_pose.data()[i] = amplitude * rng.uniform(-1.0, 1.0);
  }
  // Upright in a y-down image: half turn about x plus a small wobble.
  main.theta.global_orient = Eigen::Vector3d(std::numbers::pi + 0.1 * rng.uniform(-1.0, 1.0),
                                             0.1 * rng.uniform(-1.0, 1.0), 0.1 * rng.uniform(-1.0, 1.0));
  main.beta.betas.resize(config_.shape_count);
  for (Eigen::Index i = 0; i < main.beta.betas.size(); ++i) main.beta.betas(i) = 0.5 * rng.normal();
  main.camera.scale = 0.8 + 0.2 * rng.uniform01();
  main.camera.tx = rng.uniform(-0.1, 0.1);
  main.camera.ty = rng.uniform(-0.1, 0.1);
  main.camera.width = image.width;
  main.camera.height = image.height;
  main.confidence = 0.9;

  // A small low-confidence bystander off to the side.
  HmrPerson bystander = main;
  bystander.theta.body_pose *= 0.2;
  bystander.camera.scale = 0.3;
  bystander.camera.tx = 0.65;
  bystander.confidence = 0.35;

  return {{main, bystander}};
}

SegmentationResult MockBackend::segment(const ImageBuffer& image) {
  image.validate();
  if (is_constant(image)) return {};
  const int W = image.width, H = image.height;
  Rng rng(image_hash(image) ^ kSegmentSalt);

  SegmentationResult result;
  result.instances.push_back({"person",
                              encode_rle(rectangle(W, H, static_cast<int>(0.35 * W), static_cast<int>(0.2 * H),
                                                   static_cast<int>(0.65 * W), static_cast<int>(0.8 * H), "person")),
                              0.95});
  const char* label = kOccluderClasses[rng.next_u64() % kOccluderClasses.size()];
  const int w = static_cast<int>((0.2 + 0.15 * rng.uniform01()) * W);
  const int h = static_cast<int>((0.2 + 0.15 * rng.uniform01()) * H);
  const int x0 = static_cast<int>(rng.uniform01() * (W - w));
  const int y0 = static_cast<int>(rng.uniform01() * (H - h));
  const double score = 0.5 + 0.49 * rng.uniform01();
  result.instances.push_back({label, encode_rle(rectangle(W, H, x0, y0, x0 + w, y0 + h, label)), score});
  return result;
}

}  // namespace hpcgen
