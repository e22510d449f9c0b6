#include "hpcgen/array_container.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <numeric>
#include <regex>
#include <sstream>

#include <zlib.h>

#include "hpcgen/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "container I/O assumes a little-endian host");

namespace hpcgen {

namespace {

constexpr std::uint32_t kLocalHeaderSig = 0x04034b50;
constexpr std::uint32_t kCentralHeaderSig = 0x02014b50;
constexpr std::uint32_t kEndOfCentralSig = 0x06054b50;

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t off) {
  if (off + 2 > b.size()) throw LoadError("zip: truncated archive");
  return static_cast<std::uint16_t>(b[off] | (b[off + 1] << 8));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t off) {
  if (off + 4 > b.size()) throw LoadError("zip: truncated archive");
  return static_cast<std::uint32_t>(b[off]) | (static_cast<std::uint32_t>(b[off + 1]) << 8) |
         (static_cast<std::uint32_t>(b[off + 2]) << 16) |
         (static_cast<std::uint32_t>(b[off + 3]) << 24);
}

std::uint32_t crc_of(std::span<const std::uint8_t> data) {
  return static_cast<std::uint32_t>(
      crc32(0L, data.data(), static_cast<uInt>(data.size())));
}

std::vector<std::uint8_t> inflate_raw(std::span<const std::uint8_t> src, std::size_t expected) {
  std::vector<std::uint8_t> out(expected);
  z_stream zs{};
  if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw LoadError("zip: inflateInit failed");
  zs.next_in = const_cast<Bytef*>(src.data());
  zs.avail_in = static_cast<uInt>(src.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || zs.total_out != expected) {
    throw LoadError("zip: corrupt deflate stream");
  }
  return out;
}

std::string dtype_descr(DType t) { return t == DType::kFloat64 ? "<f8" : "<i8"; }

std::string manifest_dtype(DType t) { return t == DType::kFloat64 ? "f64" : "i64"; }

}  // namespace

NdArray NdArray::from_f64(std::vector<std::size_t> shape, std::vector<double> values) {
  NdArray a;
  a.dtype = DType::kFloat64;
  a.shape = std::move(shape);
  a.f64 = std::move(values);
  if (a.f64.size() != a.element_count()) throw ShapeError("array values do not match shape " + a.shape_string());
  return a;
}

NdArray NdArray::from_i64(std::vector<std::size_t> shape, std::vector<std::int64_t> values) {
  NdArray a;
  a.dtype = DType::kInt64;
  a.shape = std::move(shape);
  a.i64 = std::move(values);
  if (a.i64.size() != a.element_count()) throw ShapeError("array values do not match shape " + a.shape_string());
  return a;
}

std::size_t NdArray::element_count() const {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string NdArray::shape_string() const {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

std::vector<std::uint8_t> encode_npy(const NdArray& array) {
  // Python tuple syntax: (), (n,), (a, b, c)
  std::string shape = "(";
  for (std::size_t i = 0; i < array.shape.size(); ++i) {
    if (i) shape += ", ";
    shape += std::to_string(array.shape[i]);
  }
  if (array.shape.size() == 1) shape += ",";
  shape += ")";

  std::string header = "{'descr': '" + dtype_descr(array.dtype) +
                       "', 'fortran_order': False, 'shape': " + shape + ", }";
  // magic(6) + version(2) + len(2) + header, padded to 64 with a trailing newline.
  const std::size_t unpadded = 10 + header.size() + 1;
  header.append((64 - unpadded % 64) % 64, ' ');
  header.push_back('\n');

  std::vector<std::uint8_t> out = {0x93, 'N', 'U', 'M', 'P', 'Y', 1, 0};
  put_u16(out, static_cast<std::uint16_t>(header.size()));
  out.insert(out.end(), header.begin(), header.end());
  const auto* raw = array.dtype == DType::kFloat64
                        ? reinterpret_cast<const std::uint8_t*>(array.f64.data())
                        : reinterpret_cast<const std::uint8_t*>(array.i64.data());
  out.insert(out.end(), raw, raw + array.element_count() * 8);
  return out;
}

NdArray decode_npy(std::span<const std::uint8_t> bytes) {
  static const std::uint8_t kMagic[6] = {0x93, 'N', 'U', 'M', 'P', 'Y'};
  if (bytes.size() < 10 || std::memcmp(bytes.data(), kMagic, 6) != 0) {
    throw LoadError("npy: bad magic");
  }
  const int major = bytes[6];
  std::size_t header_len = 0;
  std::size_t header_start = 0;
  if (major == 1) {
    header_len = get_u16(bytes, 8);
    header_start = 10;
  } else if (major == 2 || major == 3) {
    header_len = get_u32(bytes, 8);
    header_start = 12;
  } else {
    throw LoadError("npy: unsupported version " + std::to_string(major));
  }
  if (header_start + header_len > bytes.size()) throw LoadError("npy: truncated header");
  const std::string header(reinterpret_cast<const char*>(bytes.data() + header_start), header_len);

  std::smatch m;
  static const std::regex kDescr(R"('descr'\s*:\s*'([<>|=]?)([a-z])(\d+)')");
  static const std::regex kFortran(R"('fortran_order'\s*:\s*(True|False))");
  static const std::regex kShape(R"('shape'\s*:\s*\(([^)]*)\))");
  if (!std::regex_search(header, m, kDescr)) throw LoadError("npy: missing descr");
  const std::string order = m[1], kind = m[2];
  const int width = std::stoi(m[3]);
  if (order == ">") throw LoadError("npy: big-endian arrays are not supported");
  if (!std::regex_search(header, m, kFortran)) throw LoadError("npy: missing fortran_order");
  if (m[1] == "True") throw LoadError("npy: fortran-order arrays are not supported");
  if (!std::regex_search(header, m, kShape)) throw LoadError("npy: missing shape");

  NdArray a;
  std::stringstream dims(m[1].str());
  std::string tok;
  while (std::getline(dims, tok, ',')) {
    tok.erase(std::remove_if(tok.begin(), tok.end(), ::isspace), tok.end());
    if (!tok.empty()) a.shape.push_back(static_cast<std::size_t>(std::stoull(tok)));
  }
  const std::size_t n = a.element_count();
  const std::uint8_t* data = bytes.data() + header_start + header_len;
  const std::size_t avail = bytes.size() - header_start - header_len;
  if (avail < n * static_cast<std::size_t>(width)) throw LoadError("npy: truncated data");

  // Narrower types are widened so callers only deal with f64 / i64.
  if (kind == "f" && width == 8) {
    a.dtype = DType::kFloat64;
    a.f64.resize(n);
    std::memcpy(a.f64.data(), data, n * 8);
  } else if (kind == "f" && width == 4) {
    a.dtype = DType::kFloat64;
    std::vector<float> tmp(n);
    std::memcpy(tmp.data(), data, n * 4);
    a.f64.assign(tmp.begin(), tmp.end());
  } else if (kind == "i" && width == 8) {
    a.dtype = DType::kInt64;
    a.i64.resize(n);
    std::memcpy(a.i64.data(), data, n * 8);
  } else if (kind == "i" && width == 4) {
    a.dtype = DType::kInt64;
    std::vector<std::int32_t> tmp(n);
    std::memcpy(tmp.data(), data, n * 4);
    a.i64.assign(tmp.begin(), tmp.end());
  } else if ((kind == "u" || kind == "b") && width == 1) {
    a.dtype = DType::kInt64;
    a.i64.assign(data, data + n);
  } else {
    throw LoadError("npy: unsupported dtype " + kind + std::to_string(width));
  }
  return a;
}

std::vector<std::uint8_t> write_zip(
    const std::vector<std::pair<std::string, std::vector<std::uint8_t>>>& entries) {
  std::vector<std::uint8_t> out;
  std::vector<std::uint8_t> central;
  for (const auto& [name, data] : entries) {
    if (data.size() > 0xffffffffULL || out.size() > 0xffffffffULL) {
      throw Error("zip: entry too large (zip64 not supported)");
    }
    const auto offset = static_cast<std::uint32_t>(out.size());
    const std::uint32_t crc = crc_of(data);
    const auto size = static_cast<std::uint32_t>(data.size());
    const auto name_len = static_cast<std::uint16_t>(name.size());

    put_u32(out, kLocalHeaderSig);
    put_u16(out, 20);  // version needed
    put_u16(out, 0);   // flags
    put_u16(out, 0);   // stored
    put_u16(out, 0);   // mod time
    put_u16(out, 0x21);  // mod date: 1980-01-01
    put_u32(out, crc);
    put_u32(out, size);
    put_u32(out, size);
    put_u16(out, name_len);
    put_u16(out, 0);
    out.insert(out.end(), name.begin(), name.end());
    out.insert(out.end(), data.begin(), data.end());

    put_u32(central, kCentralHeaderSig);
    put_u16(central, 20);  // version made by
    put_u16(central, 20);
    put_u16(central, 0);
    put_u16(central, 0);
    put_u16(central, 0);
    put_u16(central, 0x21);
    put_u32(central, crc);
    put_u32(central, size);
    put_u32(central, size);
    put_u16(central, name_len);
    put_u16(central, 0);  // extra
    put_u16(central, 0);  // comment
    put_u16(central, 0);  // disk
    put_u16(central, 0);  // internal attrs
    put_u32(central, 0);  // external attrs
    put_u32(central, offset);
    central.insert(central.end(), name.begin(), name.end());
  }
  const auto central_offset = static_cast<std::uint32_t>(out.size());
  out.insert(out.end(), central.begin(), central.end());
  put_u32(out, kEndOfCentralSig);
  put_u16(out, 0);
  put_u16(out, 0);
  put_u16(out, static_cast<std::uint16_t>(entries.size()));
  put_u16(out, static_cast<std::uint16_t>(entries.size()));
  put_u32(out, static_cast<std::uint32_t>(central.size()));
  put_u32(out, central_offset);
  put_u16(out, 0);
  return out;
}

std::map<std::string, std::vector<std::uint8_t>> read_zip(std::span<const std::uint8_t> archive) {
  if (archive.size() < 22) throw LoadError("zip: file too small");
  // The end-of-central-directory record may be followed by a comment.
  std::size_t eocd = archive.size() - 22;
  while (true) {
    if (get_u32(archive, eocd) == kEndOfCentralSig) break;
    if (eocd == 0 || archive.size() - eocd > 22 + 0xffff) {
      throw LoadError("zip: end of central directory not found");
    }
    --eocd;
  }
  const std::size_t count = get_u16(archive, eocd + 10);
  std::size_t pos = get_u32(archive, eocd + 16);

  std::map<std::string, std::vector<std::uint8_t>> entries;
  for (std::size_t i = 0; i < count; ++i) {
    if (get_u32(archive, pos) != kCentralHeaderSig) throw LoadError("zip: bad central header");
    const std::uint16_t method = get_u16(archive, pos + 10);
    const std::uint32_t crc = get_u32(archive, pos + 16);
    const std::uint32_t csize = get_u32(archive, pos + 20);
    const std::uint32_t usize = get_u32(archive, pos + 24);
    const std::uint16_t name_len = get_u16(archive, pos + 28);
    const std::uint16_t extra_len = get_u16(archive, pos + 30);
    const std::uint16_t comment_len = get_u16(archive, pos + 32);
    const std::uint32_t local = get_u32(archive, pos + 42);
    if (pos + 46 + name_len > archive.size()) throw LoadError("zip: truncated central header");
    std::string name(reinterpret_cast<const char*>(archive.data() + pos + 46), name_len);
    pos += 46 + name_len + extra_len + comment_len;

    if (get_u32(archive, local) != kLocalHeaderSig) throw LoadError("zip: bad local header for " + name);
    const std::size_t data_start =
        local + 30 + get_u16(archive, local + 26) + get_u16(archive, local + 28);
    if (data_start + csize > archive.size()) throw LoadError("zip: truncated entry " + name);
    auto payload = archive.subspan(data_start, csize);

    std::vector<std::uint8_t> data;
    if (method == 0) {
      data.assign(payload.begin(), payload.end());
    } else if (method == 8) {
      data = inflate_raw(payload, usize);
    } else {
      throw LoadError("zip: unsupported compression method for " + name);
    }
    if (crc_of(data) != crc) throw LoadError("zip: CRC mismatch in " + name);
    entries.emplace(std::move(name), std::move(data));
  }
  return entries;
}

ArrayContainer ArrayContainer::read(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return from_bytes(bytes);
  } catch (const LoadError& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
}

ArrayContainer ArrayContainer::from_bytes(std::span<const std::uint8_t> bytes) {
  ArrayContainer c;
  for (auto& [entry, data] : read_zip(bytes)) {
    if (entry == kManifestEntry) {
      try {
        c.manifest_ = nlohmann::json::parse(data.begin(), data.end());
      } catch (const nlohmann::json::exception& e) {
        throw LoadError(std::string("manifest is not valid JSON: ") + e.what());
      }
      continue;
    }
    std::string name = entry;
    if (name.size() > 4 && name.ends_with(".npy")) name.resize(name.size() - 4);
    c.arrays_.emplace(name, decode_npy(data));
  }
  if (c.manifest_.contains("arrays")) {
    for (const auto& [name, info] : c.manifest_["arrays"].items()) {
      const auto it = c.arrays_.find(name);
      if (it == c.arrays_.end()) throw LoadError("manifest lists missing array '" + name + "'");
      const auto shape = info.at("shape").get<std::vector<std::size_t>>();
      if (shape != it->second.shape) {
        throw LoadError("array '" + name + "' has shape " + it->second.shape_string() +
                        " but manifest records " + nlohmann::json(shape).dump());
      }
    }
  }
  return c;
}

std::vector<std::uint8_t> ArrayContainer::to_bytes() const {
  nlohmann::json manifest = manifest_;
  manifest["arrays"] = nlohmann::json::object();
  std::vector<std::pair<std::string, std::vector<std::uint8_t>>> entries;
  for (const auto& [name, array] : arrays_) {
    manifest["arrays"][name] = {{"dtype", manifest_dtype(array.dtype)}, {"shape", array.shape}};
    entries.emplace_back(name + ".npy", encode_npy(array));
  }
  const std::string text = manifest.dump();
  entries.emplace_back(kManifestEntry, std::vector<std::uint8_t>(text.begin(), text.end()));
  return write_zip(entries);
}

void ArrayContainer::write(const std::filesystem::path& path) const {
  write_file_bytes(path, to_bytes());
}

void ArrayContainer::put(const std::string& name, NdArray array) {
  arrays_.insert_or_assign(name, std::move(array));
}

const NdArray& ArrayContainer::get(const std::string& name) const {
  const auto it = arrays_.find(name);
  if (it == arrays_.end()) throw LoadError("missing array '" + name + "'");
  return it->second;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace hpcgen
