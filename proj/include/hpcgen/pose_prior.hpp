#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hpcgen/body_model.hpp"
#include "hpcgen/rng.hpp"

namespace hpcgen {

inline constexpr double kDefaultTau = 30.0;
inline constexpr double kLeakySlope = 0.2;

enum class Activation { kLeakyRelu, kIdentity };

// How body joint rotations are fed to / read from the networks.
enum class PoseFeatureEncoding {
  kAxisAngle,  // 3 values per joint
  kRot6d,      // first two rotation-matrix columns, 6 values per joint
};

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
  Activation activation = Activation::kIdentity;

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
};

/** VPoser-style pose VAE. The last encoder layer emits 2L values, the mean
 *  followed by the log standard deviation of the latent Gaussian. */
struct PosePriorVAE {
  std::vector<DenseLayer> encoder;
  std::vector<DenseLayer> decoder;
  int latent_dim = 0;
  PoseFeatureEncoding encoding = PoseFeatureEncoding::kAxisAngle;

  int input_dim() const;
  int body_joint_count() const;
  void validate() const;
};

struct LatentDistribution {
  Eigen::VectorXd mu;
  Eigen::VectorXd sigma;
};

struct AugmentationConfig {
  double scale = 0.1;          // s
  double epsilon_range = 1.0;  // eps ~ U(-range, range) per component
  std::uint64_t rng_seed = 0;
};

// Mean mode uses mu in place of a latent sample.
enum class LatentMode { kMean, kSampled };

Eigen::VectorXd pose_features(const PoseParams& pose, PoseFeatureEncoding encoding);
PoseParams pose_from_features(const Eigen::VectorXd& features, PoseFeatureEncoding encoding);

LatentDistribution encode(const PosePriorVAE& vae, const PoseParams& pose);
// Decoded body pose; global_orient is zero.
PoseParams decode(const PosePriorVAE& vae, const Eigen::VectorXd& z);

// ||mu||_2.
double difficulty_score(const PosePriorVAE& vae, const PoseParams& pose);
// ||e||_2 for e ~ N(mu, diag(sigma^2)) drawn from rng.
double difficulty_score(const PosePriorVAE& vae, const PoseParams& pose, Rng& rng);

inline bool is_hard_pose(double score, double tau = kDefaultTau) { return score > tau; }

// z * (1 + s * eps), elementwise.
Eigen::VectorXd perturb_latent(const Eigen::VectorXd& z, double scale, const Eigen::VectorXd& epsilon);

/// Latent-space pose augmentation. The latent is mu (kMean) or a sample of
/// N(mu, sigma^2); epsilon is drawn uniformly from rng. The input's
/// global_orient is carried over unchanged.
PoseParams augment_pose(const PosePriorVAE& vae, const PoseParams& pose, const AugmentationConfig& cfg,
                        Rng& rng, LatentMode latent = LatentMode::kSampled);

// Same formula with a caller-fixed epsilon and z = mu.
PoseParams augment_pose_fixed_epsilon(const PosePriorVAE& vae, const PoseParams& pose, double scale,
                                      const Eigen::VectorXd& epsilon);

PosePriorVAE load_pose_prior(const std::filesystem::path& path);
void save_pose_prior(const PosePriorVAE& vae, const std::filesystem::path& path);

std::string to_string(PoseFeatureEncoding encoding);
PoseFeatureEncoding parse_pose_feature_encoding(const std::string& name);

}  // namespace hpcgen
