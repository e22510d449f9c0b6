#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hpcgen/depth_renderer.hpp"

namespace hpcgen {

// Row-major boolean raster (1 = occluder present).
struct MaskImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;
  std::string class_label;

  MaskImage() = default;
  MaskImage(int w, int h, std::string label = {})
      : width(w), height(h), data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0), class_label(std::move(label)) {}

  bool at(int x, int y) const { return data[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)] != 0; }
  void set(int x, int y, bool v) { data[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)] = v ? 1 : 0; }
  std::size_t count() const;

  // Compares pixels and size only.
  bool same_pixels(const MaskImage& other) const {
    return width == other.width && height == other.height && data == other.data;
  }
};

// Class names treated as people and therefore never used as occluders.
std::vector<std::string> default_person_classes();

/// Pixelwise OR. An empty list yields an all-false mask of the given size.
MaskImage union_masks(std::span<const MaskImage> masks, int width, int height);

/// Union of the masks whose class_label is not a person class.
MaskImage union_occluders(std::span<const MaskImage> masks, int width, int height,
                          std::span<const std::string> person_classes);

/// Erase occluded body depth: d*[p] = d[p] if !m[p] and d[p] > 0, else 0.
/// Masks are applied regardless of whether the object lies in front of the
/// person.
DepthMap apply_occlusion(const DepthMap& depth, const MaskImage& mask);

}  // namespace hpcgen
