#include "hpcgen/backend/rle.hpp"

#include "hpcgen/error.hpp"

namespace hpcgen {

RleMask encode_rle(const MaskImage& mask) {
  RleMask rle{mask.height, mask.width, {}};
  bool current = false;
  std::uint32_t run = 0;
  for (int x = 0; x < mask.width; ++x) {
    for (int y = 0; y < mask.height; ++y) {
      const bool v = mask.at(x, y);
      if (v != current) {
        rle.counts.push_back(run);
        run = 0;
        current = v;
      }
      ++run;
    }
  }
  rle.counts.push_back(run);
  return rle;
}

MaskImage decode_rle(const RleMask& rle, const std::string& class_label) {
  if (rle.height < 0 || rle.width < 0) throw ProtocolError("rle: negative size");
  MaskImage mask(rle.width, rle.height, class_label);
  const std::size_t total = static_cast<std::size_t>(rle.height) * static_cast<std::size_t>(rle.width);
  std::size_t pos = 0;
  bool value = false;
  for (std::uint32_t run : rle.counts) {
    if (pos + run > total) throw ProtocolError("rle: runs exceed mask size");
    if (value) {
      for (std::size_t i = pos; i < pos + run; ++i) {
        // Column-major index -> (x, y).
        mask.set(static_cast<int>(i / static_cast<std::size_t>(rle.height)), static_cast<int>(i % static_cast<std::size_t>(rle.height)), true);
      }
    }
    pos += run;
    value = !value;
  }
  if (pos != total) {
    throw ProtocolError("rle: runs cover " + std::to_string(pos) + " pixels, mask has " + std::to_string(total));
  }
  return mask;
}

MaskImage resample_mask(const MaskImage& mask, int width, int height) {
  if (mask.width == width && mask.height == height) return mask;
  if (mask.width <= 0 || mask.height <= 0) throw ShapeError("cannot resample an empty mask");
  MaskImage out(width, height, mask.class_label);
  for (int y = 0; y < height; ++y) {
    const int sy = static_cast<int>((static_cast<long long>(2 * y + 1) * mask.height) / (2LL * height));
    for (int x = 0; x < width; ++x) {
      const int sx = static_cast<int>((static_cast<long long>(2 * x + 1) * mask.width) / (2LL * width));
      out.set(x, y, mask.at(sx, sy));
    }
  }
  return out;
}

}  // namespace hpcgen
