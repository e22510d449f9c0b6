#include "hpcgen/finetune_losses.hpp"

#include <cmath>
#include <numeric>

#include "hpcgen/error.hpp"

namespace hpcgen {

namespace {

Points3 mapped_joints(const HmrPrediction& pred, const BodyModelSpec& spec, const std::vector<int>& joint_map) {
  const Joints3D joints = regress_joints(spec, forward(spec, pred.theta, pred.beta));
  return joint_map.empty() ? joints.joints : select_joints(joints, joint_map).joints;
}

void check_counts(const Points2& projected, const Keypoints2D& gt) {
  if (projected.rows() != gt.points.rows()) {
    throw ShapeError("ground truth has " + std::to_string(gt.points.rows()) + " keypoints, prediction has " +
                     std::to_string(projected.rows()) + " (configure a joint map)");
  }
  if (gt.visible.size() != static_cast<std::size_t>(gt.points.rows())) {
    throw ShapeError("visibility flags do not match keypoint count");
  }
}

}  // namespace

Points2 reproject_joints(const HmrPrediction& pred, const BodyModelSpec& spec, const std::vector<int>& joint_map) {
  return project(pred.camera, mapped_joints(pred, spec, joint_map));
}

double loss_2d(const HmrPrediction& pred, const Keypoints2D& gt, const BodyModelSpec& spec,
               const Loss2DOptions& options) {
  const Points2 proj = reproject_joints(pred, spec, options.joint_map);
  check_counts(proj, gt);
  double sum_sq = 0.0;
  double sum_dist = 0.0;
  std::size_t visible = 0;
  for (Eigen::Index j = 0; j < proj.rows(); ++j) {
    if (!gt.visible[static_cast<std::size_t>(j)]) continue;
    const double d2 = (proj.row(j) - gt.points.row(j)).squaredNorm();
    sum_sq += d2;
    sum_dist += std::sqrt(d2);
    ++visible;
  }
  if (visible == 0) throw ValidationError("loss_2d: no visible keypoints");
  return options.norm == Reprojection2DNorm::kFrobenius ? std::sqrt(sum_sq)
                                                        : sum_dist / static_cast<double>(visible);
}

double loss_2d_scale_gradient(const HmrPrediction& pred, const Keypoints2D& gt, const BodyModelSpec& spec,
                              const Loss2DOptions& options) {
  if (options.norm != Reprojection2DNorm::kFrobenius) {
    throw ValidationError("scale gradient is implemented for the Frobenius loss only");
  }
  const Points3 joints = mapped_joints(pred, spec, options.joint_map);
  const Points2 proj = project(pred.camera, joints);
  check_counts(proj, gt);
  // px = (s x + tx + 1) W / 2, so d px / d s = x W / 2 (likewise for y).
  const double half_w = 0.5 * pred.camera.width;
  const double half_h = 0.5 * pred.camera.height;
  double sum_sq = 0.0;
  double dot = 0.0;
  for (Eigen::Index j = 0; j < proj.rows(); ++j) {
    if (!gt.visible[static_cast<std::size_t>(j)]) continue;
    const double rx = proj(j, 0) - gt.points(j, 0);
    const double ry = proj(j, 1) - gt.points(j, 1);
    sum_sq += rx * rx + ry * ry;
    dot += rx * joints(j, 0) * half_w + ry * joints(j, 1) * half_h;
  }
  if (sum_sq == 0.0) return 0.0;
  return dot / std::sqrt(sum_sq);
}

double loss_3d(const HmrPrediction& pred, const PoseParams& gt_theta, const ShapeParams& gt_beta) {
  if (pred.beta.betas.size() != gt_beta.betas.size()) throw ShapeError("loss_3d: shape length mismatch");
  if (pred.theta.body_pose.rows() != gt_theta.body_pose.rows()) throw ShapeError("loss_3d: pose length mismatch");
  return (pred.beta.betas - gt_beta.betas).norm() + (pred.theta.body_pose - gt_theta.body_pose).norm();
}

double mean_loss(std::span<const double> per_sample) {
  if (per_sample.empty()) return 0.0;
  return std::accumulate(per_sample.begin(), per_sample.end(), 0.0) / static_cast<double>(per_sample.size());
}

}  // namespace hpcgen
