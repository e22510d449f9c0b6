#pragma once

#include <optional>
#include <span>
#include <vector>

#include "hpcgen/body_model.hpp"
#include "hpcgen/camera.hpp"
#include "hpcgen/hmr_eval.hpp"

namespace hpcgen {

// Output of an HMR network f: image -> (theta, beta, camera).
struct HmrPrediction {
  PoseParams theta;
  ShapeParams beta;
  WeakPerspectiveCamera camera;
};

enum class Reprojection2DNorm {
  kFrobenius,     // sqrt of the summed squared distances over visible joints
  kPerJointMean,  // mean of per-joint Euclidean distances
};

struct Loss2DOptions {
  Reprojection2DNorm norm = Reprojection2DNorm::kFrobenius;
  // gt keypoint i corresponds to regressed joint joint_map[i]; identity when empty.
  std::vector<int> joint_map;
};

// Regressed joints of the prediction, projected with its camera (pixels).
Points2 reproject_joints(const HmrPrediction& pred, const BodyModelSpec& spec,
                         const std::vector<int>& joint_map = {});

/// 2D reprojection loss on visible joints. Throws ValidationError when no
/// joint is visible.
double loss_2d(const HmrPrediction& pred, const Keypoints2D& gt, const BodyModelSpec& spec,
               const Loss2DOptions& options = {});

/// d loss_2d / d camera.scale, analytic (Frobenius norm only). Undefined
/// where the loss is zero; returns 0 there.
double loss_2d_scale_gradient(const HmrPrediction& pred, const Keypoints2D& gt, const BodyModelSpec& spec,
                              const Loss2DOptions& options = {});

/// |beta_hat - beta|_2 + |theta_hat - theta|_2, axis-angle body pose only.
double loss_3d(const HmrPrediction& pred, const PoseParams& gt_theta, const ShapeParams& gt_beta);

struct LossWeights {
  double w2d = 1.0;
  double w3d = 1.0;
};

inline double total_loss(double l2d, double l3d, const LossWeights& w = {}) { return w.w2d * l2d + w.w3d * l3d; }

// Per-batch reduction: mean over samples (0 for an empty batch).
double mean_loss(std::span<const double> per_sample);

}  // namespace hpcgen
