#pragma once

#include <vector>

#include "hpcgen/body_model.hpp"

namespace hpcgen {

/** Weak-perspective (scaled orthographic) camera.
 *
 *  A point (x, y, z) maps to normalized coordinates (s*x + tx, s*y + ty);
 *  the square [-1, 1]^2 spans the full image, so
 *    px = (u + 1) / 2 * width,   py = (v + 1) / 2 * height.
 *  HMR adapters must translate their outputs into this convention.
 */
struct WeakPerspectiveCamera {
  double scale = 1.0;
  double tx = 0.0;
  double ty = 0.0;
  int width = 64;
  int height = 64;

  void validate() const;
};

inline constexpr double kDefaultDepthFloor = 0.1;

// N x 3 points (meters) to N x 2 pixel coordinates.
Points2 project(const WeakPerspectiveCamera& cam, const Points3& points);

// Same mapping, but onto an arbitrary pixel grid instead of cam.width/height.
Points2 project_to_grid(const WeakPerspectiveCamera& cam, const Points3& points, int width,
                        int height);

// Camera-space depth of each point: z shifted so the nearest point sits at
// depth_floor. Larger is farther. Throws ShapeError on an empty point set.
Eigen::VectorXd camera_depth(const WeakPerspectiveCamera& cam, const Points3& points,
                             double depth_floor = kDefaultDepthFloor);

}  // namespace hpcgen
