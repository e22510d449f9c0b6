#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>

#include "hpcgen/body_model.hpp"
#include "hpcgen/camera.hpp"
#include "hpcgen/rng.hpp"

namespace hpcgen::testkit {

inline std::filesystem::path source_path(const std::string& rel) {
  return std::filesystem::path(HPCGEN_SOURCE_DIR) / rel;
}

inline std::filesystem::path cli_path() { return std::filesystem::path(HPCGEN_CLI_PATH); }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& prefix = "hpcgen") {
    std::string tmpl = (std::filesystem::temp_directory_path() / (prefix + "-XXXXXX")).string();
    if (mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

inline WeakPerspectiveCamera random_camera(Rng& rng, int size = 64) {
  WeakPerspectiveCamera cam;
  cam.scale = rng.uniform(0.4, 1.2);
  cam.tx = rng.uniform(-0.3, 0.3);
  cam.ty = rng.uniform(-0.3, 0.3);
  cam.width = size;
  cam.height = size;
  return cam;
}

// Random triangle soup in [-1, 1]^3. With snap, x and y are multiples of
// 1/32 so that (under a unit camera at 64 px) edges regularly pass through
// pixel centers and exercise the tie rule.
inline Mesh random_soup(Rng& rng, int vertices, int faces, bool snap) {
  Mesh m;
  m.vertices.resize(vertices, 3);
  for (int v = 0; v < vertices; ++v) {
    for (int c = 0; c < 3; ++c) {
      double x = rng.uniform(-1.0, 1.0);
      if (snap && c < 2) x = std::round(x * 32.0 + 0.5) / 32.0 - 1.0 / 64.0;
      m.vertices(v, c) = x;
    }
  }
  m.faces.resize(faces, 3);
  for (int f = 0; f < faces; ++f) {
    for (int c = 0; c < 3; ++c) m.faces(f, c) = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(vertices));
  }
  return m;
}

}  // namespace hpcgen::testkit
