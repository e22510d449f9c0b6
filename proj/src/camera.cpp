#include "hpcgen/camera.hpp"

#include <cmath>

#include "hpcgen/error.hpp"

namespace hpcgen {

void WeakPerspectiveCamera::validate() const {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ValidationError("camera scale must be positive");
  if (!std::isfinite(tx) || !std::isfinite(ty)) throw ValidationError("camera translation must be finite");
  if (width <= 0 || height <= 0) throw ValidationError("camera image size must be positive");
}

Points2 project_to_grid(const WeakPerspectiveCamera& cam, const Points3& points, int width,
                        int height) {
  if (!points.allFinite()) throw ValidationError("cannot project non-finite points");
  Points2 out(points.rows(), 2);
  const double half_w = 0.5 * width;
  const double half_h = 0.5 * height;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const double u = cam.scale * points(i, 0) + cam.tx;
    const double v = cam.scale * points(i, 1) + cam.ty;
    out(i, 0) = (u + 1.0) * half_w;
    out(i, 1) = (v + 1.0) * half_h;
  }
  return out;
}

Points2 project(const WeakPerspectiveCamera& cam, const Points3& points) {
  return project_to_grid(cam, points, cam.width, cam.height);
}

Eigen::VectorXd camera_depth(const WeakPerspectiveCamera& /*cam*/, const Points3& points,
                             double depth_floor) {
  if (points.rows() == 0) throw ShapeError("camera_depth needs at least one point");
  const double z_min = points.col(2).minCoeff();
  return (points.col(2).array() - z_min + depth_floor).matrix();
}

}  // namespace hpcgen
