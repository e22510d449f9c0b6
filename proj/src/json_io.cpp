#include "hpcgen/json_io.hpp"

#include <fstream>

#include "hpcgen/error.hpp"

namespace hpcgen {

namespace {

template <typename T>
T get(const nlohmann::json& j, const char* name) {
  try {
    return j.at(name).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("field '") + name + "': " + e.what());
  }
}

Eigen::Vector3d vec3(const nlohmann::json& j, const char* name) {
  const auto v = get<std::vector<double>>(j, name);
  if (v.size() != 3) throw ValidationError(std::string("field '") + name + "' must have 3 numbers");
  return {v[0], v[1], v[2]};
}

}  // namespace

nlohmann::json pose_to_json(const PoseParams& pose) {
  nlohmann::json body = nlohmann::json::array();
  for (Eigen::Index j = 0; j < pose.body_pose.rows(); ++j) {
    body.push_back({pose.body_pose(j, 0), pose.body_pose(j, 1), pose.body_pose(j, 2)});
  }
  return {{"global_orient", {pose.global_orient.x(), pose.global_orient.y(), pose.global_orient.z()}},
          {"body_pose", body}};
}

PoseParams pose_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("pose must be a JSON object");
  PoseParams pose;
  pose.global_orient = j.contains("global_orient") ? vec3(j, "global_orient") : Eigen::Vector3d::Zero();
  const nlohmann::json& body = j.at("body_pose");
  if (!body.is_array()) throw ValidationError("body_pose must be an array");
  if (!body.empty() && body[0].is_array()) {
    pose.body_pose.resize(static_cast<Eigen::Index>(body.size()), 3);
    for (std::size_t r = 0; r < body.size(); ++r) {
      const auto row = body[r].get<std::vector<double>>();
      if (row.size() != 3) throw ValidationError("body_pose rows must have 3 numbers");
      for (int c = 0; c < 3; ++c) pose.body_pose(static_cast<Eigen::Index>(r), c) = row[static_cast<std::size_t>(c)];
    }
  } else {
    const auto flat = body.get<std::vector<double>>();
    if (flat.size() % 3 != 0) throw ValidationError("flat body_pose length must be a multiple of 3");
    pose = PoseParams::from_flat_body(Eigen::Map<const Eigen::VectorXd>(flat.data(), static_cast<Eigen::Index>(flat.size())),
                                      pose.global_orient);
  }
  if (!pose.is_finite()) throw ValidationError("pose contains non-finite values");
  return pose;
}

nlohmann::json shape_to_json(const ShapeParams& shape) {
  return {{"betas", std::vector<double>(shape.betas.data(), shape.betas.data() + shape.betas.size())}};
}

ShapeParams shape_from_json(const nlohmann::json& j) {
  const auto betas = get<std::vector<double>>(j, "betas");
  ShapeParams s{Eigen::Map<const Eigen::VectorXd>(betas.data(), static_cast<Eigen::Index>(betas.size()))};
  if (!s.betas.allFinite()) throw ValidationError("betas contain non-finite values");
  return s;
}

nlohmann::json camera_to_json(const WeakPerspectiveCamera& cam) {
  return {{"scale", cam.scale}, {"tx", cam.tx}, {"ty", cam.ty}, {"width", cam.width}, {"height", cam.height}};
}

WeakPerspectiveCamera camera_from_json(const nlohmann::json& j) {
  WeakPerspectiveCamera cam;
  cam.scale = get<double>(j, "scale");
  cam.tx = j.value("tx", 0.0);
  cam.ty = j.value("ty", 0.0);
  cam.width = j.value("width", 64);
  cam.height = j.value("height", 64);
  cam.validate();
  return cam;
}

nlohmann::json keypoints_to_json(const Keypoints2D& kp) {
  nlohmann::json pts = nlohmann::json::array();
  for (Eigen::Index i = 0; i < kp.points.rows(); ++i) pts.push_back({kp.points(i, 0), kp.points(i, 1)});
  return {{"points", pts}, {"visible", kp.visible}};
}

Keypoints2D keypoints_from_json(const nlohmann::json& j) {
  const auto pts = get<std::vector<std::vector<double>>>(j, "points");
  Keypoints2D kp;
  kp.points.resize(static_cast<Eigen::Index>(pts.size()), 2);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].size() != 2) throw ValidationError("keypoints must be [u, v] pairs");
    kp.points(static_cast<Eigen::Index>(i), 0) = pts[i][0];
    kp.points(static_cast<Eigen::Index>(i), 1) = pts[i][1];
  }
  if (j.contains("visible")) {
    kp.visible = get<std::vector<bool>>(j, "visible");
    if (kp.visible.size() != pts.size()) throw ValidationError("visible must have one flag per keypoint");
  } else {
    kp.visible.assign(pts.size(), true);
  }
  return kp;
}

nlohmann::json points3_to_json(const Points3& p) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < p.rows(); ++i) out.push_back({p(i, 0), p(i, 1), p(i, 2)});
  return out;
}

Points3 points3_from_json(const nlohmann::json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  Points3 p(static_cast<Eigen::Index>(rows.size()), 3);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != 3) throw ValidationError("3D points must be [x, y, z] triples");
    for (int c = 0; c < 3; ++c) p(static_cast<Eigen::Index>(i), c) = rows[i][static_cast<std::size_t>(c)];
  }
  return p;
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(path.string() + ": invalid JSON: " + e.what());
  }
}

}  // namespace hpcgen
