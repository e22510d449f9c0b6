#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

namespace hpcgen {

using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Points3 = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using Points2 = Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>;
using Triangles = Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor>;

/** SMPL-style parametric body.
 *
 *  V vertices, K joints, B shape coefficients, P pose-blend coefficients
 *  (P is 9*(K-1), or 0 when pose-dependent blend shapes are disabled).
 *  Blend-shape tensors are stored flattened as (3V x B) and (3V x P) with
 *  row index 3*v + axis, matching a C-order [V,3,B] array.
 */
struct BodyModelSpec {
  Points3 template_vertices;     // V x 3, meters
  RowMatrixXd shape_dirs;        // 3V x B
  RowMatrixXd pose_dirs;         // 3V x P
  RowMatrixXd joint_regressor;   // K x V
  RowMatrixXd skinning_weights;  // V x K
  std::vector<int> parent;       // K entries, parent[0] == -1
  Triangles faces;               // F x 3

  std::size_t vertex_count() const { return static_cast<std::size_t>(template_vertices.rows()); }
  std::size_t joint_count() const { return parent.size(); }
  std::size_t shape_count() const { return static_cast<std::size_t>(shape_dirs.cols()); }
  std::size_t pose_blend_count() const { return static_cast<std::size_t>(pose_dirs.cols()); }

  // Checks every dimension and invariant; throws ShapeError / ValidationError.
  void validate() const;
};

// Axis-angle pose, radians. The root orientation is kept separate from the
// K-1 body joints.
struct PoseParams {
  Eigen::Vector3d global_orient = Eigen::Vector3d::Zero();
  Points3 body_pose;  // (K-1) x 3

  static PoseParams zero(std::size_t joint_count);
  // Body joints flattened row-major, length 3*(K-1).
  Eigen::VectorXd flat_body() const;
  static PoseParams from_flat_body(const Eigen::VectorXd& flat,
                                   const Eigen::Vector3d& global_orient = Eigen::Vector3d::Zero());
  bool is_finite() const;
};

struct ShapeParams {
  Eigen::VectorXd betas;

  static ShapeParams zero(std::size_t shape_count) { return {Eigen::VectorXd::Zero(static_cast<Eigen::Index>(shape_count))}; }
};

struct Mesh {
  Points3 vertices;
  Triangles faces;

  void validate() const;
};

struct Joints3D {
  Points3 joints;  // K x 3, meters
};

// Rodrigues formula. A zero vector yields the identity exactly.
Eigen::Matrix3d axis_angle_to_matrix(const Eigen::Vector3d& axis_angle);
// Inverse of axis_angle_to_matrix with the angle in [0, pi].
Eigen::Vector3d matrix_to_axis_angle(const Eigen::Matrix3d& rotation);

/// Posed mesh for (pose, shape): shape and pose blend shapes on the
/// template, then linear blend skinning along the kinematic tree.
Mesh forward(const BodyModelSpec& spec, const PoseParams& pose, const ShapeParams& shape);

/// Joint locations regressed from mesh vertices, X = W * vertices.
Joints3D regress_joints(const BodyModelSpec& spec, const Mesh& mesh);

BodyModelSpec load_body_model(const std::filesystem::path& path);
void save_body_model(const BodyModelSpec& spec, const std::filesystem::path& path);

}  // namespace hpcgen
