#include "hpcgen/depth_compose.hpp"

#include <algorithm>

#include "hpcgen/error.hpp"

namespace hpcgen {

std::size_t MaskImage::count() const {
  return static_cast<std::size_t>(std::count_if(data.begin(), data.end(), [](std::uint8_t v) { return v != 0; }));
}

std::vector<std::string> default_person_classes() { return {"person"}; }

MaskImage union_masks(std::span<const MaskImage> masks, int width, int height) {
  MaskImage out(width, height, "occluders");
  for (const MaskImage& m : masks) {
    if (m.width != width || m.height != height) {
      throw ShapeError("mask '" + m.class_label + "' is " + std::to_string(m.width) + "x" +
                       std::to_string(m.height) + ", expected " + std::to_string(width) + "x" +
                       std::to_string(height));
    }
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] |= (m.data[i] != 0);
  }
  return out;
}

MaskImage union_occluders(std::span<const MaskImage> masks, int width, int height,
                          std::span<const std::string> person_classes) {
  std::vector<MaskImage> kept;
  for (const MaskImage& m : masks) {
    if (std::find(person_classes.begin(), person_classes.end(), m.class_label) == person_classes.end()) {
      kept.push_back(m);
    }
  }
  return union_masks(kept, width, height);
}

DepthMap apply_occlusion(const DepthMap& depth, const MaskImage& mask) {
  if (depth.width != mask.width || depth.height != mask.height) {
    throw ShapeError("occlusion mask is " + std::to_string(mask.width) + "x" + std::to_string(mask.height) +
                     " but depth map is " + std::to_string(depth.width) + "x" + std::to_string(depth.height));
  }
  DepthMap out(depth.width, depth.height);
  for (std::size_t i = 0; i < depth.data.size(); ++i) {
    const bool keep = mask.data[i] == 0 && depth.data[i] > 0.0f;
    out.data[i] = keep ? depth.data[i] : 0.0f;
  }
  return out;
}

}  // namespace hpcgen
