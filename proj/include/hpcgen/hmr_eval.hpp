#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "hpcgen/body_model.hpp"

namespace hpcgen {

// k x 2 pixel keypoints with per-joint visibility.
struct Keypoints2D {
  Points2 points;
  std::vector<bool> visible;

  static Keypoints2D all_visible(Points2 points);
};

struct SimilarityTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  double scale = 1.0;
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Points3 apply(const Points3& points) const;
};

/// Mean per-joint Euclidean distance in millimeters (inputs in meters).
/// With root_align, both sets are first translated so joint 0 is at the
/// origin.
double mpjpe(const Joints3D& pred, const Joints3D& gt, bool root_align = true);

/// Closed-form similarity transform minimizing sum |s R p_i + t - g_i|^2
/// (SVD of the cross-covariance, det(R) = +1 enforced). Throws
/// AlignmentError when the centered prediction has rank < 2.
SimilarityTransform procrustes_align(const Points3& pred, const Points3& gt);

/// MPJPE after Procrustes alignment of pred onto gt, in millimeters.
double pa_mpjpe(const Joints3D& pred, const Joints3D& gt);

/// Fraction of visible gt joints with |pred - gt| <= threshold_px.
/// Throws ValidationError when no gt joint is visible.
double pck(const Keypoints2D& pred, const Keypoints2D& gt, double threshold_px);

// 0.5 x the distance between two torso joints of gt.
double torso_threshold(const Keypoints2D& gt, std::pair<int, int> torso_joints);

// Keep only the listed joint indices (in the given order).
Joints3D select_joints(const Joints3D& joints, const std::vector<int>& indices);
Keypoints2D select_keypoints(const Keypoints2D& keypoints, const std::vector<int>& indices);

}  // namespace hpcgen
