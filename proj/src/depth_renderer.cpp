#include "hpcgen/depth_renderer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "hpcgen/array_container.hpp"
#include "hpcgen/error.hpp"
#include "hpcgen/image_io.hpp"

namespace hpcgen {

namespace {

constexpr float kNearValue = 1.0f;
constexpr float kFarValue = 0.05f;

double edge(double ax, double ay, double bx, double by, double px, double py) {
  return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
}

}  // namespace

DepthMap rasterize_depth(const Points2& screen, const Eigen::VectorXd& depth, const Triangles& faces,
                         int width, int height) {
  if (width <= 0 || height <= 0) throw ValidationError("depth map size must be positive");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> zbuf(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), inf);

  for (Eigen::Index f = 0; f < faces.rows(); ++f) {
    int ia = faces(f, 0), ib = faces(f, 1), ic = faces(f, 2);
    double area = edge(screen(ia, 0), screen(ia, 1), screen(ib, 0), screen(ib, 1), screen(ic, 0), screen(ic, 1));
    if (area == 0.0 || !std::isfinite(area)) continue;
    if (area < 0.0) {
      std::swap(ib, ic);
      area = -area;
    }
    const double ax = screen(ia, 0), ay = screen(ia, 1);
    const double bx = screen(ib, 0), by = screen(ib, 1);
    const double cx = screen(ic, 0), cy = screen(ic, 1);
    const double za = depth(ia), zb = depth(ib), zc = depth(ic);
    const bool tl_bc = is_top_left_edge(bx, by, cx, cy);
    const bool tl_ca = is_top_left_edge(cx, cy, ax, ay);
    const bool tl_ab = is_top_left_edge(ax, ay, bx, by);

    // Pixel centers x + 0.5 inside [min, max] of the projected triangle.
    const double min_x = std::min({ax, bx, cx}), max_x = std::max({ax, bx, cx});
    const double min_y = std::min({ay, by, cy}), max_y = std::max({ay, by, cy});
    const int x0 = std::max(0, static_cast<int>(std::ceil(min_x - 0.5)));
    const int x1 = std::min(width - 1, static_cast<int>(std::floor(max_x - 0.5)));
    const int y0 = std::max(0, static_cast<int>(std::ceil(min_y - 0.5)));
    const int y1 = std::min(height - 1, static_cast<int>(std::floor(max_y - 0.5)));

    for (int y = y0; y <= y1; ++y) {
      const double py = y + 0.5;
      for (int x = x0; x <= x1; ++x) {
        const double px = x + 0.5;
        const double w0 = edge(bx, by, cx, cy, px, py);
        const double w1 = edge(cx, cy, ax, ay, px, py);
        const double w2 = edge(ax, ay, bx, by, px, py);
        if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;
        if ((w0 == 0.0 && !tl_bc) || (w1 == 0.0 && !tl_ca) || (w2 == 0.0 && !tl_ab)) continue;
        const double z = (w0 * za + w1 * zb + w2 * zc) / area;
        double& slot = zbuf[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
        if (z < slot) slot = z;
      }
    }
  }

  DepthMap out(width, height);
  for (std::size_t i = 0; i < zbuf.size(); ++i) {
    if (zbuf[i] != inf) out.data[i] = static_cast<float>(zbuf[i]);
  }
  return out;
}

DepthMap render_depth(const Mesh& mesh, const WeakPerspectiveCamera& cam, int width, int height) {
  if (width <= 0 || height <= 0) throw ValidationError("depth map size must be positive");
  if (mesh.vertices.rows() == 0) return DepthMap(width, height);
  const Points2 screen = project_to_grid(cam, mesh.vertices, width, height);
  const Eigen::VectorXd depth = camera_depth(cam, mesh.vertices);
  return rasterize_depth(screen, depth, mesh.faces, width, height);
}

NormalizedDepth normalize_for_conditioning(const DepthMap& depth) {
  float lo = std::numeric_limits<float>::infinity();
  float hi = 0.0f;
  for (float d : depth.data) {
    if (d > 0.0f) {
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
  }
  if (hi == 0.0f) return {depth, true};

  NormalizedDepth out{DepthMap(depth.width, depth.height), false};
  const double range = static_cast<double>(hi) - static_cast<double>(lo);
  for (std::size_t i = 0; i < depth.data.size(); ++i) {
    const float d = depth.data[i];
    if (d <= 0.0f) continue;
    if (range == 0.0) {
      out.map.data[i] = kNearValue;
    } else {
      const double t = (static_cast<double>(d) - lo) / range;
      out.map.data[i] = static_cast<float>(kNearValue - t * (kNearValue - static_cast<double>(kFarValue)));
    }
  }
  return out;
}

DepthMap resample_depth(const DepthMap& depth, int width, int height) {
  if (depth.width == width && depth.height == height) return depth;
  if (depth.width <= 0 || depth.height <= 0) throw ShapeError("cannot resample an empty depth map");
  if (width <= 0 || height <= 0) throw ShapeError("resample target must be positive");
  DepthMap out(width, height);
  for (int y = 0; y < height; ++y) {
    const int sy = static_cast<int>((static_cast<long long>(2 * y + 1) * depth.height) / (2LL * height));
    for (int x = 0; x < width; ++x) {
      const int sx = static_cast<int>((static_cast<long long>(2 * x + 1) * depth.width) / (2LL * width));
      out.at(x, y) = depth.at(sx, sy);
    }
  }
  return out;
}

std::vector<std::uint8_t> encode_depth_bin(const DepthMap& depth) {
  std::vector<std::uint8_t> out(8 + depth.data.size() * 4);
  const auto w = static_cast<std::uint32_t>(depth.width);
  const auto h = static_cast<std::uint32_t>(depth.height);
  std::memcpy(out.data(), &w, 4);
  std::memcpy(out.data() + 4, &h, 4);
  std::memcpy(out.data() + 8, depth.data.data(), depth.data.size() * 4);
  return out;
}

DepthMap decode_depth_bin(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8) throw LoadError("depth file: missing header");
  std::uint32_t w = 0, h = 0;
  std::memcpy(&w, bytes.data(), 4);
  std::memcpy(&h, bytes.data() + 4, 4);
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (bytes.size() != 8 + 4 * n) {
    throw LoadError("depth file: expected " + std::to_string(8 + 4 * n) + " bytes for " +
                    std::to_string(w) + "x" + std::to_string(h) + ", got " + std::to_string(bytes.size()));
  }
  DepthMap d(static_cast<int>(w), static_cast<int>(h));
  std::memcpy(d.data.data(), bytes.data() + 8, 4 * n);
  return d;
}

void write_depth_bin(const DepthMap& depth, const std::filesystem::path& path) {
  write_file_bytes(path, encode_depth_bin(depth));
}

DepthMap read_depth_bin(const std::filesystem::path& path) {
  return decode_depth_bin(read_file_bytes(path));
}

std::vector<std::uint8_t> encode_depth_png16(const DepthMap& depth) {
  float d_max = 0.0f;
  for (float d : depth.data) d_max = std::max(d_max, d);
  std::vector<std::uint16_t> gray(depth.data.size(), 0);
  if (d_max > 0.0f) {
    for (std::size_t i = 0; i < gray.size(); ++i) {
      gray[i] = static_cast<std::uint16_t>(std::lround(static_cast<double>(depth.data[i]) * 65535.0 / d_max));
    }
  }
  return encode_png_gray16(gray, depth.width, depth.height);
}

void write_depth_png16(const DepthMap& depth, const std::filesystem::path& path) {
  write_file_bytes(path, encode_depth_png16(depth));
}

}  // namespace hpcgen
