#include "hpcgen/hmr_eval.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include "hpcgen/error.hpp"

namespace hpcgen {

namespace {

constexpr double kMetersToMm = 1000.0;
// Relative singular-value floor below which a point set counts as rank-deficient.
constexpr double kRankTolerance = 1e-10;

void require_same_count(Eigen::Index a, Eigen::Index b) {
  if (a != b) {
    throw ShapeError("joint count mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
  }
  if (a == 0) throw ShapeError("no joints to compare");
}

}  // namespace

Keypoints2D Keypoints2D::all_visible(Points2 points) {
  Keypoints2D k;
  k.visible.assign(static_cast<std::size_t>(points.rows()), true);
  k.points = std::move(points);
  return k;
}

Points3 SimilarityTransform::apply(const Points3& points) const {
  Points3 out = (scale * (points * rotation.transpose())).rowwise() + translation.transpose();
  return out;
}

double mpjpe(const Joints3D& pred, const Joints3D& gt, bool root_align) {
  require_same_count(pred.joints.rows(), gt.joints.rows());
  Points3 p = pred.joints;
  Points3 g = gt.joints;
  if (root_align) {
    p.rowwise() -= pred.joints.row(0);
    g.rowwise() -= gt.joints.row(0);
  }
  return kMetersToMm * (p - g).rowwise().norm().mean();
}

SimilarityTransform procrustes_align(const Points3& pred, const Points3& gt) {
  require_same_count(pred.rows(), gt.rows());
  const Eigen::RowVector3d mu_p = pred.colwise().mean();
  const Eigen::RowVector3d mu_g = gt.colwise().mean();
  const Points3 pc = pred.rowwise() - mu_p;
  const Points3 gc = gt.rowwise() - mu_g;

  const double var_p = pc.squaredNorm();
  const Eigen::JacobiSVD<Eigen::MatrixXd> rank_check(pc);
  const auto& sv = rank_check.singularValues();
  if (var_p == 0.0 || sv.size() < 2 || sv(1) <= kRankTolerance * sv(0)) {
    throw AlignmentError("procrustes alignment needs at least 3 non-collinear joints");
  }

  // Cross-covariance sum_i g_i p_i^T = U S V^T gives R = U D V^T.
  const Eigen::Matrix3d cov = gc.transpose() * pc;
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Vector3d d = Eigen::Vector3d::Ones();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) d(2) = -1.0;

  SimilarityTransform t;
  t.rotation = svd.matrixU() * d.asDiagonal() * svd.matrixV().transpose();
  t.scale = svd.singularValues().dot(d) / var_p;
  t.translation = mu_g.transpose() - t.scale * t.rotation * mu_p.transpose();
  return t;
}

double pa_mpjpe(const Joints3D& pred, const Joints3D& gt) {
  const SimilarityTransform t = procrustes_align(pred.joints, gt.joints);
  return mpjpe(Joints3D{t.apply(pred.joints)}, gt, /*root_align=*/false);
}

double pck(const Keypoints2D& pred, const Keypoints2D& gt, double threshold_px) {
  require_same_count(pred.points.rows(), gt.points.rows());
  if (gt.visible.size() != static_cast<std::size_t>(gt.points.rows())) {
    throw ShapeError("visibility flags do not match keypoint count");
  }
  std::size_t visible = 0;
  std::size_t correct = 0;
  for (Eigen::Index j = 0; j < gt.points.rows(); ++j) {
    if (!gt.visible[static_cast<std::size_t>(j)]) continue;
    ++visible;
    if ((pred.points.row(j) - gt.points.row(j)).norm() <= threshold_px) ++correct;
  }
  if (visible == 0) throw ValidationError("pck: no visible ground-truth joints");
  return static_cast<double>(correct) / static_cast<double>(visible);
}

double torso_threshold(const Keypoints2D& gt, std::pair<int, int> torso_joints) {
  const auto [a, b] = torso_joints;
  if (a < 0 || b < 0 || a >= gt.points.rows() || b >= gt.points.rows()) {
    throw ValidationError("torso joint index out of range");
  }
  return 0.5 * (gt.points.row(a) - gt.points.row(b)).norm();
}

Joints3D select_joints(const Joints3D& joints, const std::vector<int>& indices) {
  Joints3D out;
  out.joints.resize(static_cast<Eigen::Index>(indices.size()), 3);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || indices[i] >= joints.joints.rows()) throw ValidationError("joint subset index out of range");
    out.joints.row(static_cast<Eigen::Index>(i)) = joints.joints.row(indices[i]);
  }
  return out;
}

Keypoints2D select_keypoints(const Keypoints2D& keypoints, const std::vector<int>& indices) {
  Keypoints2D out;
  out.points.resize(static_cast<Eigen::Index>(indices.size()), 2);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || indices[i] >= keypoints.points.rows()) throw ValidationError("keypoint subset index out of range");
    out.points.row(static_cast<Eigen::Index>(i)) = keypoints.points.row(indices[i]);
    out.visible.push_back(keypoints.visible.at(static_cast<std::size_t>(indices[i])));
  }
  return out;
}

}  // namespace hpcgen
