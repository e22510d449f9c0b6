#include "hpcgen/image_io.hpp"

#include <csetjmp>
#include <cstring>
#include <string>

#include <png.h>

#include "hpcgen/array_container.hpp"
#include "hpcgen/error.hpp"

namespace hpcgen {

namespace {

struct MemoryReader {
  std::span<const std::uint8_t> data;
  std::size_t pos = 0;
};

void read_callback(png_structp png, png_bytep out, png_size_t n) {
  auto* r = static_cast<MemoryReader*>(png_get_io_ptr(png));
  if (r->pos + n > r->data.size()) png_error(png, "truncated PNG stream");
  std::memcpy(out, r->data.data() + r->pos, n);
  r->pos += n;
}

void write_callback(png_structp png, png_bytep in, png_size_t n) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), in, in + n);
}

void flush_callback(png_structp) {}

void error_callback(png_structp png, png_const_charp msg) {
  auto* message = static_cast<std::string*>(png_get_error_ptr(png));
  *message = msg;
  png_longjmp(png, 1);
}

void warning_callback(png_structp, png_const_charp) {}

// Writes an 8-bit RGB or 16-bit gray image. `rows` point at packed rows in
// PNG byte order.
std::vector<std::uint8_t> write_png_rows(int width, int height, int bit_depth, int color_type,
                                         std::vector<png_bytep>& rows) {
  std::string message;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, error_callback, warning_callback);
  if (!png) throw Error("png: cannot create write struct");
  png_infop info = png_create_info_struct(png);
  std::vector<std::uint8_t> out;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("png: encode failed: " + message);
  }
  png_set_write_fn(png, &out, write_callback, flush_callback);
  png_set_compression_level(png, 6);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth,
               color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

}  // namespace

void ImageBuffer::validate() const {
  if (width <= 0 || height <= 0) throw ValidationError("image size must be positive");
  if (rgb.size() != 3 * static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw ValidationError("image data length " + std::to_string(rgb.size()) + " does not match " +
                          std::to_string(width) + "x" + std::to_string(height) + "x3");
  }
}

std::vector<std::uint8_t> encode_png_rgb8(const ImageBuffer& image) {
  image.validate();
  std::vector<png_bytep> rows(static_cast<std::size_t>(image.height));
  for (int y = 0; y < image.height; ++y) {
    rows[static_cast<std::size_t>(y)] = const_cast<png_bytep>(image.rgb.data() + 3 * static_cast<std::size_t>(y) * static_cast<std::size_t>(image.width));
  }
  return write_png_rows(image.width, image.height, 8, PNG_COLOR_TYPE_RGB, rows);
}

ImageBuffer decode_png_rgb8(std::span<const std::uint8_t> data) {
  if (data.size() < 8 || png_sig_cmp(data.data(), 0, 8) != 0) throw LoadError("png: bad signature");
  std::string message;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, error_callback, warning_callback);
  if (!png) throw Error("png: cannot create read struct");
  png_infop info = png_create_info_struct(png);
  MemoryReader reader{data};
  ImageBuffer image;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw LoadError("png: decode failed: " + message);
  }
  png_set_read_fn(png, &reader, read_callback);
  png_read_info(png, info);
  const png_byte color = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);
  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  image = ImageBuffer(static_cast<int>(png_get_image_width(png, info)),
                      static_cast<int>(png_get_image_height(png, info)));
  if (png_get_rowbytes(png, info) != 3 * static_cast<std::size_t>(image.width)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw LoadError("png: unexpected row layout after conversion");
  }
  rows.resize(static_cast<std::size_t>(image.height));
  for (int y = 0; y < image.height; ++y) {
    rows[static_cast<std::size_t>(y)] = image.rgb.data() + 3 * static_cast<std::size_t>(y) * static_cast<std::size_t>(image.width);
  }
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return image;
}

std::vector<std::uint8_t> encode_png_gray16(std::span<const std::uint16_t> gray, int width, int height) {
  if (width <= 0 || height <= 0 || gray.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw ValidationError("gray16 image size mismatch");
  }
  // PNG stores 16-bit samples big-endian.
  std::vector<std::uint8_t> bytes(gray.size() * 2);
  for (std::size_t i = 0; i < gray.size(); ++i) {
    bytes[2 * i] = static_cast<std::uint8_t>(gray[i] >> 8);
    bytes[2 * i + 1] = static_cast<std::uint8_t>(gray[i] & 0xff);
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) {
    rows[static_cast<std::size_t>(y)] = bytes.data() + 2 * static_cast<std::size_t>(y) * static_cast<std::size_t>(width);
  }
  return write_png_rows(width, height, 16, PNG_COLOR_TYPE_GRAY, rows);
}

std::vector<std::uint16_t> decode_png_gray16(std::span<const std::uint8_t> data, int& width, int& height) {
  if (data.size() < 8 || png_sig_cmp(data.data(), 0, 8) != 0) throw LoadError("png: bad signature");
  std::string message;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, error_callback, warning_callback);
  if (!png) throw Error("png: cannot create read struct");
  png_infop info = png_create_info_struct(png);
  MemoryReader reader{data};
  std::vector<std::uint8_t> bytes;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw LoadError("png: decode failed: " + message);
  }
  png_set_read_fn(png, &reader, read_callback);
  png_read_info(png, info);
  if (png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY || png_get_bit_depth(png, info) != 16) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw LoadError("png: expected 16-bit grayscale");
  }
  width = static_cast<int>(png_get_image_width(png, info));
  height = static_cast<int>(png_get_image_height(png, info));
  bytes.resize(2 * static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  rows.resize(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) {
    rows[static_cast<std::size_t>(y)] = bytes.data() + 2 * static_cast<std::size_t>(y) * static_cast<std::size_t>(width);
  }
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  std::vector<std::uint16_t> gray(bytes.size() / 2);
  for (std::size_t i = 0; i < gray.size(); ++i) {
    gray[i] = static_cast<std::uint16_t>((bytes[2 * i] << 8) | bytes[2 * i + 1]);
  }
  return gray;
}

ImageBuffer read_png(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return decode_png_rgb8(bytes);
  } catch (const LoadError& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
}

void write_png(const ImageBuffer& image, const std::filesystem::path& path) {
  write_file_bytes(path, encode_png_rgb8(image));
}

}  // namespace hpcgen
