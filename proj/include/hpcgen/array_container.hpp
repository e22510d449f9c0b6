#pragma once

// Model container: a zip archive of named .npy arrays plus a one-line JSON
// manifest entry. The layout is the one numpy.savez produces, so containers
// can be inspected with numpy.load() and converters can be written in Python.

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace hpcgen {

enum class DType { kFloat64, kInt64 };

// Dense C-order array. Exactly one of the value vectors is populated,
// selected by dtype.
struct NdArray {
  DType dtype = DType::kFloat64;
  std::vector<std::size_t> shape;
  std::vector<double> f64;
  std::vector<std::int64_t> i64;

  static NdArray from_f64(std::vector<std::size_t> shape, std::vector<double> values);
  static NdArray from_i64(std::vector<std::size_t> shape, std::vector<std::int64_t> values);

  std::size_t element_count() const;
  std::string shape_string() const;
};

// Serialize / parse a single array in .npy v1.0 format.
std::vector<std::uint8_t> encode_npy(const NdArray& array);
NdArray decode_npy(std::span<const std::uint8_t> bytes);

// Minimal zip support: entries are written uncompressed with fixed
// timestamps so archives are byte-reproducible; deflated entries (as written
// by numpy.savez_compressed) are accepted on read.
std::vector<std::uint8_t> write_zip(
    const std::vector<std::pair<std::string, std::vector<std::uint8_t>>>& entries);
std::map<std::string, std::vector<std::uint8_t>> read_zip(
    std::span<const std::uint8_t> archive);

class ArrayContainer {
 public:
  static constexpr const char* kManifestEntry = "manifest.json";

  static ArrayContainer read(const std::filesystem::path& path);
  static ArrayContainer from_bytes(std::span<const std::uint8_t> bytes);

  void write(const std::filesystem::path& path) const;
  std::vector<std::uint8_t> to_bytes() const;

  void put(const std::string& name, NdArray array);
  bool contains(const std::string& name) const { return arrays_.count(name) != 0; }
  // Throws LoadError naming the missing entry.
  const NdArray& get(const std::string& name) const;
  const std::map<std::string, NdArray>& arrays() const { return arrays_; }

  // User fields; the "arrays" key is filled in on write with every entry's
  // dtype and shape, and cross-checked on read.
  nlohmann::json& manifest() { return manifest_; }
  const nlohmann::json& manifest() const { return manifest_; }

 private:
  std::map<std::string, NdArray> arrays_;
  nlohmann::json manifest_ = nlohmann::json::object();
};

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace hpcgen
