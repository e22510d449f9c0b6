#pragma once

#include <cstdint>
#include <vector>

#include "hpcgen/depth_compose.hpp"

namespace hpcgen {

// COCO-style uncompressed RLE: run lengths over the mask in column-major
// order, alternating background / foreground and starting with background
// (the first run may be 0).
struct RleMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint32_t> counts;

  bool operator==(const RleMask&) const = default;
};

RleMask encode_rle(const MaskImage& mask);
// Throws ProtocolError when the runs do not cover height*width exactly.
MaskImage decode_rle(const RleMask& rle, const std::string& class_label = {});

// Nearest-neighbour resampling by pixel centers.
MaskImage resample_mask(const MaskImage& mask, int width, int height);

}  // namespace hpcgen
