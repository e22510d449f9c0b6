#pragma once

// JSON interchange for poses, shapes, cameras and keypoints. Angles are
// axis-angle radians, lengths meters, keypoints pixels.
//
//   pose:      {"global_orient": [x, y, z], "body_pose": [[x, y, z], ...]}
//              (body_pose may also be a flat list of 3*(K-1) numbers)
//   shape:     {"betas": [...]}
//   camera:    {"scale": s, "tx": tx, "ty": ty, "width": W, "height": H}
//   keypoints: {"points": [[u, v], ...], "visible": [true, ...]}

#include <filesystem>

#include <json.hpp>

#include "hpcgen/body_model.hpp"
#include "hpcgen/camera.hpp"
#include "hpcgen/hmr_eval.hpp"

namespace hpcgen {

nlohmann::json pose_to_json(const PoseParams& pose);
PoseParams pose_from_json(const nlohmann::json& j);

nlohmann::json shape_to_json(const ShapeParams& shape);
ShapeParams shape_from_json(const nlohmann::json& j);

nlohmann::json camera_to_json(const WeakPerspectiveCamera& cam);
WeakPerspectiveCamera camera_from_json(const nlohmann::json& j);

nlohmann::json keypoints_to_json(const Keypoints2D& kp);
Keypoints2D keypoints_from_json(const nlohmann::json& j);

nlohmann::json points3_to_json(const Points3& p);
Points3 points3_from_json(const nlohmann::json& j);

// Throws LoadError when the file is missing or not JSON.
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace hpcgen
