#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "hpcgen/body_model.hpp"
#include "hpcgen/camera.hpp"

namespace hpcgen {

inline constexpr int kDefaultDepthSize = 64;

// Row-major H x W depth raster. 0 marks background; foreground values are
// camera depths (> 0, larger is farther).
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  DepthMap() = default;
  DepthMap(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0.0f) {}

  float& at(int x, int y) { return data[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)]; }
  float at(int x, int y) const { return data[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)]; }

  bool operator==(const DepthMap&) const = default;
};

/// Rasterize the mesh depth with a z-buffer.
///
/// Coverage: pixel (x, y) has center (x + 0.5, y + 0.5) in grid units and is
/// covered by a triangle iff the center lies strictly inside it, or exactly
/// on an edge that is a top or left edge (y grows downward). Triangles of
/// either winding are rasterized; zero-area ones are skipped. Each covered
/// pixel keeps the smallest barycentric-interpolated camera depth. Weak
/// perspective makes screen-space affine interpolation exact.
DepthMap render_depth(const Mesh& mesh, const WeakPerspectiveCamera& cam, int width = kDefaultDepthSize,
                      int height = kDefaultDepthSize);

// Rasterize explicit screen-space triangles: vertices in pixel units plus a
// per-vertex depth. render_depth projects and then calls this.
DepthMap rasterize_depth(const Points2& screen, const Eigen::VectorXd& depth, const Triangles& faces,
                         int width, int height);

// True when an edge from a to b is a top or left edge of a triangle whose
// signed area (b-a) x (c-a) is positive.
constexpr bool is_top_left_edge(double ax, double ay, double bx, double by) {
  const double dx = bx - ax;
  const double dy = by - ay;
  return (dy == 0.0 && dx > 0.0) || dy < 0.0;
}

struct NormalizedDepth {
  DepthMap map;
  bool empty_foreground = false;  // input had no foreground; returned unchanged
};

// Linear map of foreground depth onto [0.05, 1.0], nearest -> 1.0 and
// farthest -> 0.05. A flat foreground maps to 1.0; background stays 0.
NormalizedDepth normalize_for_conditioning(const DepthMap& depth);

// Nearest-neighbour resampling by pixel centers (same rule as masks).
DepthMap resample_depth(const DepthMap& depth, int width, int height);

// Binary format: u32 width, u32 height (little-endian), then H*W float32.
std::vector<std::uint8_t> encode_depth_bin(const DepthMap& depth);
DepthMap decode_depth_bin(std::span<const std::uint8_t> bytes);
void write_depth_bin(const DepthMap& depth, const std::filesystem::path& path);
DepthMap read_depth_bin(const std::filesystem::path& path);

// 16-bit grayscale PNG with value round(d * 65535 / max(d)).
std::vector<std::uint8_t> encode_depth_png16(const DepthMap& depth);
void write_depth_png16(const DepthMap& depth, const std::filesystem::path& path);

}  // namespace hpcgen
