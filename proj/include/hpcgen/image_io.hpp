#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace hpcgen {

// Interleaved RGB8, row-major.
struct ImageBuffer {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  ImageBuffer() = default;
  ImageBuffer(int w, int h) : width(w), height(h), rgb(3 * static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0) {}

  // Throws ValidationError unless rgb.size() == 3 * width * height.
  void validate() const;
  bool operator==(const ImageBuffer&) const = default;
};

std::vector<std::uint8_t> encode_png_rgb8(const ImageBuffer& image);
// Any PNG color type / bit depth, converted to RGB8. Throws LoadError.
ImageBuffer decode_png_rgb8(std::span<const std::uint8_t> png);

std::vector<std::uint8_t> encode_png_gray16(std::span<const std::uint16_t> gray, int width, int height);
std::vector<std::uint16_t> decode_png_gray16(std::span<const std::uint8_t> png, int& width, int& height);

ImageBuffer read_png(const std::filesystem::path& path);
void write_png(const ImageBuffer& image, const std::filesystem::path& path);

}  // namespace hpcgen
