#include "hpcgen/body_model.hpp"

#include <cmath>
#include <string>

#include <Eigen/Geometry>

#include "hpcgen/array_container.hpp"
#include "hpcgen/error.hpp"

namespace hpcgen {

namespace {

constexpr double kWeightSumTolerance = 1e-6;

std::string dims(Eigen::Index r, Eigen::Index c) {
  return "[" + std::to_string(r) + "," + std::to_string(c) + "]";
}

RowMatrixXd to_matrix(const NdArray& a, std::size_t rows, std::size_t cols) {
  RowMatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows * cols; ++i) m.data()[i] = a.f64[i];
  return m;
}

const NdArray& expect(const ArrayContainer& c, const std::string& name, DType dtype,
                      std::size_t rank) {
  const NdArray& a = c.get(name);
  if (a.dtype != dtype) throw LoadError("array '" + name + "' has the wrong dtype");
  if (a.shape.size() != rank) {
    throw LoadError("array '" + name + "' must have rank " + std::to_string(rank) + ", got " +
                    a.shape_string());
  }
  return a;
}

}  // namespace

void BodyModelSpec::validate() const {
  const Eigen::Index V = template_vertices.rows();
  const auto K = static_cast<Eigen::Index>(parent.size());
  if (V <= 0) throw ShapeError("body model has no vertices");
  if (K <= 0) throw ShapeError("body model has no joints");
  if (shape_dirs.rows() != 3 * V) throw ShapeError("shapedirs must have 3V rows, got " + dims(shape_dirs.rows(), shape_dirs.cols()));
  if (pose_dirs.rows() != 3 * V) throw ShapeError("posedirs must have 3V rows, got " + dims(pose_dirs.rows(), pose_dirs.cols()));
  if (pose_dirs.cols() != 0 && pose_dirs.cols() != 9 * (K - 1)) {
    throw ShapeError("posedirs must have 0 or 9(K-1) = " + std::to_string(9 * (K - 1)) +
                     " columns, got " + std::to_string(pose_dirs.cols()));
  }
  if (joint_regressor.rows() != K || joint_regressor.cols() != V) {
    throw ShapeError("J_regressor must be " + dims(K, V) + ", got " + dims(joint_regressor.rows(), joint_regressor.cols()));
  }
  if (skinning_weights.rows() != V || skinning_weights.cols() != K) {
    throw ShapeError("weights must be " + dims(V, K) + ", got " + dims(skinning_weights.rows(), skinning_weights.cols()));
  }
  if (!template_vertices.allFinite() || !shape_dirs.allFinite() || !pose_dirs.allFinite() ||
      !joint_regressor.allFinite() || !skinning_weights.allFinite()) {
    throw ValidationError("body model contains non-finite values");
  }
  if ((joint_regressor.array() < 0.0).any()) {
    throw ValidationError("J_regressor has negative entries");
  }
  if ((skinning_weights.array() < 0.0).any()) {
    throw ValidationError("skinning weights have negative entries");
  }
  for (Eigen::Index v = 0; v < V; ++v) {
    const double sum = skinning_weights.row(v).sum();
    if (std::abs(sum - 1.0) > kWeightSumTolerance) {
      throw ValidationError("skinning weights of vertex " + std::to_string(v) + " sum to " +
                            std::to_string(sum) + ", expected 1");
    }
  }
  // parent[j] < j for every non-root joint rules out cycles and forests.
  if (parent[0] != -1) throw ValidationError("kintree[0] must be -1 (root)");
  for (Eigen::Index j = 1; j < K; ++j) {
    const int p = parent[static_cast<std::size_t>(j)];
    if (p < 0 || p >= j) {
      throw ValidationError("kintree is not a tree rooted at joint 0: parent of joint " +
                            std::to_string(j) + " is " + std::to_string(p));
    }
  }
  for (Eigen::Index f = 0; f < faces.rows(); ++f) {
    for (int c = 0; c < 3; ++c) {
      if (faces(f, c) < 0 || faces(f, c) >= V) {
        throw ValidationError("face " + std::to_string(f) + " references vertex " +
                              std::to_string(faces(f, c)) + " out of range");
      }
    }
    if (faces(f, 0) == faces(f, 1) && faces(f, 1) == faces(f, 2)) {
      throw ValidationError("face " + std::to_string(f) + " is degenerate");
    }
  }
}

PoseParams PoseParams::zero(std::size_t joint_count) {
  PoseParams p;
  p.body_pose = Points3::Zero(static_cast<Eigen::Index>(joint_count > 0 ? joint_count - 1 : 0), 3);
  return p;
}

Eigen::VectorXd PoseParams::flat_body() const {
  return Eigen::Map<const Eigen::VectorXd>(body_pose.data(), body_pose.size());
}

PoseParams PoseParams::from_flat_body(const Eigen::VectorXd& flat,
                                      const Eigen::Vector3d& global_orient) {
  if (flat.size() % 3 != 0) throw ShapeError("flat body pose length must be a multiple of 3");
  PoseParams p;
  p.global_orient = global_orient;
  p.body_pose = Eigen::Map<const Points3>(flat.data(), flat.size() / 3, 3);
  return p;
}

bool PoseParams::is_finite() const { return global_orient.allFinite() && body_pose.allFinite(); }

void Mesh::validate() const {
  const Eigen::Index V = vertices.rows();
  for (Eigen::Index f = 0; f < faces.rows(); ++f) {
    for (int c = 0; c < 3; ++c) {
      if (faces(f, c) < 0 || faces(f, c) >= V) throw ValidationError("mesh face index out of range");
    }
    if (faces(f, 0) == faces(f, 1) && faces(f, 1) == faces(f, 2)) {
      throw ValidationError("mesh has a degenerate face");
    }
  }
}

Eigen::Matrix3d axis_angle_to_matrix(const Eigen::Vector3d& axis_angle) {
  const double angle = axis_angle.norm();
  if (angle == 0.0) return Eigen::Matrix3d::Identity();
  return Eigen::AngleAxisd(angle, axis_angle / angle).toRotationMatrix();
}

Eigen::Vector3d matrix_to_axis_angle(const Eigen::Matrix3d& rotation) {
  const Eigen::AngleAxisd aa(rotation);
  return aa.angle() * aa.axis();
}

Mesh forward(const BodyModelSpec& spec, const PoseParams& pose, const ShapeParams& shape) {
  const auto V = static_cast<Eigen::Index>(spec.vertex_count());
  const auto K = static_cast<Eigen::Index>(spec.joint_count());
  if (shape.betas.size() != static_cast<Eigen::Index>(spec.shape_count())) {
    throw ShapeError("expected " + std::to_string(spec.shape_count()) + " shape coefficients, got " +
                     std::to_string(shape.betas.size()));
  }
  if (pose.body_pose.rows() != K - 1) {
    throw ShapeError("expected " + std::to_string(K - 1) + " body joints, got " +
                     std::to_string(pose.body_pose.rows()));
  }

  // Shape blend shapes and rest-pose joints.
  Points3 shaped = spec.template_vertices;
  if (spec.shape_count() > 0) {
    const Eigen::VectorXd offsets = spec.shape_dirs * shape.betas;
    shaped += Eigen::Map<const Points3>(offsets.data(), V, 3);
  }
  const Points3 rest_joints = spec.joint_regressor * shaped;

  std::vector<Eigen::Matrix3d> rotations(static_cast<std::size_t>(K));
  rotations[0] = axis_angle_to_matrix(pose.global_orient);
  for (Eigen::Index j = 1; j < K; ++j) {
    rotations[static_cast<std::size_t>(j)] = axis_angle_to_matrix(pose.body_pose.row(j - 1).transpose());
  }

  // Pose blend shapes driven by vec(R_j - I) of the non-root joints.
  Points3 posed = shaped;
  if (spec.pose_blend_count() > 0) {
    Eigen::VectorXd feature(9 * (K - 1));
    for (Eigen::Index j = 1; j < K; ++j) {
      const Eigen::Matrix<double, 3, 3, Eigen::RowMajor> d =
          rotations[static_cast<std::size_t>(j)] - Eigen::Matrix3d::Identity();
      feature.segment<9>(9 * (j - 1)) = Eigen::Map<const Eigen::Matrix<double, 9, 1>>(d.data());
    }
    const Eigen::VectorXd offsets = spec.pose_dirs * feature;
    posed += Eigen::Map<const Points3>(offsets.data(), V, 3);
  }

  // Skinning transforms A_j(x) = G_j (x - J_j), with G_j the world
  // transform of joint j. Writing A_j = [R_j | a_j] the translations obey
  //   a_0 = (I - R_0) J_0,   a_j = a_parent + (R_parent - R_j) J_j,
  // which is exactly zero when every rotation is the identity.
  std::vector<Eigen::Matrix3d> world_rot(static_cast<std::size_t>(K));
  std::vector<Eigen::Vector3d> skin_t(static_cast<std::size_t>(K));
  for (Eigen::Index j = 0; j < K; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    const Eigen::Vector3d joint = rest_joints.row(j).transpose();
    if (j == 0) {
      world_rot[ju] = rotations[ju];
      skin_t[ju] = (Eigen::Matrix3d::Identity() - world_rot[ju]) * joint;
    } else {
      const auto p = static_cast<std::size_t>(spec.parent[ju]);
      world_rot[ju] = world_rot[p] * rotations[ju];
      skin_t[ju] = skin_t[p] + (world_rot[p] - world_rot[ju]) * joint;
    }
  }
  // Skinning in delta form: v' = v + sum_k w_k ((R_k - I) v + a_k), which
  // equals sum_k w_k A_k v for unit-sum weights but returns v bit-exactly
  // at the rest pose.
  std::vector<Eigen::Matrix3d> delta_rot(static_cast<std::size_t>(K));
  for (Eigen::Index j = 0; j < K; ++j) {
    delta_rot[static_cast<std::size_t>(j)] = world_rot[static_cast<std::size_t>(j)] - Eigen::Matrix3d::Identity();
  }
  const std::vector<Eigen::Vector3d>& delta_t = skin_t;

  Mesh mesh;
  mesh.faces = spec.faces;
  mesh.vertices.resize(V, 3);
  for (Eigen::Index v = 0; v < V; ++v) {
    Eigen::Matrix3d blend_rot = Eigen::Matrix3d::Zero();
    Eigen::Vector3d blend_t = Eigen::Vector3d::Zero();
    for (Eigen::Index j = 0; j < K; ++j) {
      const double w = spec.skinning_weights(v, j);
      if (w == 0.0) continue;
      blend_rot += w * delta_rot[static_cast<std::size_t>(j)];
      blend_t += w * delta_t[static_cast<std::size_t>(j)];
    }
    const Eigen::Vector3d p = posed.row(v).transpose();
    mesh.vertices.row(v) = (p + (blend_rot * p + blend_t)).transpose();
  }
  return mesh;
}

Joints3D regress_joints(const BodyModelSpec& spec, const Mesh& mesh) {
  if (mesh.vertices.rows() != spec.joint_regressor.cols()) {
    throw ShapeError("mesh has " + std::to_string(mesh.vertices.rows()) +
                     " vertices, regressor expects " + std::to_string(spec.joint_regressor.cols()));
  }
  return {spec.joint_regressor * mesh.vertices};
}

BodyModelSpec load_body_model(const std::filesystem::path& path) {
  const ArrayContainer c = ArrayContainer::read(path);
  const NdArray& tmpl = expect(c, "v_template", DType::kFloat64, 2);
  const NdArray& shapedirs = expect(c, "shapedirs", DType::kFloat64, 3);
  const NdArray& posedirs = expect(c, "posedirs", DType::kFloat64, 3);
  const NdArray& regressor = expect(c, "J_regressor", DType::kFloat64, 2);
  const NdArray& weights = expect(c, "weights", DType::kFloat64, 2);
  const NdArray& kintree = expect(c, "kintree", DType::kInt64, 1);
  const NdArray& faces = expect(c, "faces", DType::kInt64, 2);

  const std::size_t V = tmpl.shape[0];
  const std::size_t K = kintree.shape[0];
  auto require = [&](bool ok, const std::string& what) {
    if (!ok) throw LoadError(path.string() + ": " + what);
  };
  require(tmpl.shape[1] == 3, "v_template must be [V,3], got " + tmpl.shape_string());
  require(shapedirs.shape[0] == V && shapedirs.shape[1] == 3,
          "shapedirs must be [V,3,B], got " + shapedirs.shape_string());
  require(posedirs.shape[0] == V && posedirs.shape[1] == 3,
          "posedirs must be [V,3,P], got " + posedirs.shape_string());
  require(regressor.shape[0] == K && regressor.shape[1] == V,
          "J_regressor must be [K,V], got " + regressor.shape_string());
  require(weights.shape[0] == V && weights.shape[1] == K,
          "weights must be [V,K], got " + weights.shape_string());
  require(faces.shape[1] == 3, "faces must be [F,3], got " + faces.shape_string());

  BodyModelSpec spec;
  spec.template_vertices = to_matrix(tmpl, V, 3);
  spec.shape_dirs = to_matrix(shapedirs, 3 * V, shapedirs.shape[2]);
  spec.pose_dirs = to_matrix(posedirs, 3 * V, posedirs.shape[2]);
  spec.joint_regressor = to_matrix(regressor, K, V);
  spec.skinning_weights = to_matrix(weights, V, K);
  spec.parent.assign(kintree.i64.begin(), kintree.i64.end());
  spec.faces.resize(static_cast<Eigen::Index>(faces.shape[0]), 3);
  for (std::size_t i = 0; i < faces.i64.size(); ++i) {
    spec.faces.data()[i] = static_cast<int>(faces.i64[i]);
  }
  try {
    spec.validate();
  } catch (const Error& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
  return spec;
}

void save_body_model(const BodyModelSpec& spec, const std::filesystem::path& path) {
  spec.validate();
  const std::size_t V = spec.vertex_count();
  const std::size_t K = spec.joint_count();
  auto f64 = [](const auto& m) { return std::vector<double>(m.data(), m.data() + m.size()); };
  ArrayContainer c;
  c.put("v_template", NdArray::from_f64({V, 3}, f64(spec.template_vertices)));
  c.put("shapedirs", NdArray::from_f64({V, 3, spec.shape_count()}, f64(spec.shape_dirs)));
  c.put("posedirs", NdArray::from_f64({V, 3, spec.pose_blend_count()}, f64(spec.pose_dirs)));
  c.put("J_regressor", NdArray::from_f64({K, V}, f64(spec.joint_regressor)));
  c.put("weights", NdArray::from_f64({V, K}, f64(spec.skinning_weights)));
  c.put("kintree", NdArray::from_i64({K}, std::vector<std::int64_t>(spec.parent.begin(), spec.parent.end())));
  c.put("faces", NdArray::from_i64({static_cast<std::size_t>(spec.faces.rows()), 3},
                                   std::vector<std::int64_t>(spec.faces.data(), spec.faces.data() + spec.faces.size())));
  c.manifest()["kind"] = "body_model";
  c.manifest()["vertex_count"] = V;
  c.manifest()["joint_count"] = K;
  c.manifest()["shape_count"] = spec.shape_count();
  c.manifest()["pose_blend_count"] = spec.pose_blend_count();
  c.write(path);
}

}  // namespace hpcgen
