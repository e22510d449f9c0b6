#include "hpcgen/toy_assets.hpp"

#include <cmath>

#include <Eigen/QR>

#include "hpcgen/rng.hpp"

namespace hpcgen {

namespace {

constexpr int kRings = 3;
constexpr double kRingY[kRings] = {-0.6, 0.0, 0.6};
constexpr double kHalfWidth = 0.15;
constexpr double kHalfDepth = 0.1;

Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double stddev) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = stddev * rng.normal();
  }
  return m;
}

DenseLayer layer(Eigen::MatrixXd w, Activation a) {
  DenseLayer l;
  l.bias = Eigen::VectorXd::Zero(w.rows());
  l.weight = std::move(w);
  l.activation = a;
  return l;
}

// [W; -W]
Eigen::MatrixXd split_rows(const Eigen::MatrixXd& w) {
  Eigen::MatrixXd out(2 * w.rows(), w.cols());
  out << w, -w;
  return out;
}

// [[W, -W], [-W, W]]
Eigen::MatrixXd split_block(const Eigen::MatrixXd& w) {
  Eigen::MatrixXd out(2 * w.rows(), 2 * w.cols());
  out << w, -w, -w, w;
  return out;
}

// [W, -W]
Eigen::MatrixXd diff_cols(const Eigen::MatrixXd& w) {
  Eigen::MatrixXd out(w.rows(), 2 * w.cols());
  out << w, -w;
  return out;
}

}  // namespace

BodyModelSpec make_toy_body_model() {
  constexpr int V = 4 * kRings;
  constexpr int K = 3;
  BodyModelSpec spec;

  // Ring r, corner c: corners go (+x,+z), (-x,+z), (-x,-z), (+x,-z).
  spec.template_vertices.resize(V, 3);
  const double sx[4] = {1, -1, -1, 1};
  const double sz[4] = {1, 1, -1, -1};
  for (int r = 0; r < kRings; ++r) {
    for (int c = 0; c < 4; ++c) {
      // Slight taper so the rings are not congruent.
      const double taper = 1.0 - 0.15 * r;
      spec.template_vertices.row(4 * r + c) << sx[c] * kHalfWidth * taper, kRingY[r], sz[c] * kHalfDepth * taper;
    }
  }

  // B=4: height, width, depth, lean of the top ring.
  spec.shape_dirs = RowMatrixXd::Zero(3 * V, 4);
  for (int v = 0; v < V; ++v) {
    const int r = v / 4;
    spec.shape_dirs(3 * v + 1, 0) = 0.05 * kRingY[r];
    spec.shape_dirs(3 * v + 0, 1) = 0.02 * spec.template_vertices(v, 0) / kHalfWidth;
    spec.shape_dirs(3 * v + 2, 2) = 0.02 * spec.template_vertices(v, 2) / kHalfDepth;
    if (r == 2) spec.shape_dirs(3 * v + 0, 3) = 0.03;
  }

  // P = 9*(K-1) small pose correctives.
  Rng rng(0x70f1);
  spec.pose_dirs.resize(3 * V, 9 * (K - 1));
  for (Eigen::Index i = 0; i < spec.pose_dirs.size(); ++i) spec.pose_dirs.data()[i] = 0.005 * rng.normal();

  // Root: bottom ring mean. Spine: middle ring mean. Neck: midway between
  // middle and top rings.
  spec.joint_regressor = RowMatrixXd::Zero(K, V);
  for (int c = 0; c < 4; ++c) {
    spec.joint_regressor(0, c) = 0.25;
    spec.joint_regressor(1, 4 + c) = 0.25;
    spec.joint_regressor(2, 4 + c) = 0.125;
    spec.joint_regressor(2, 8 + c) = 0.125;
  }

  spec.skinning_weights = RowMatrixXd::Zero(V, K);
  for (int c = 0; c < 4; ++c) {
    spec.skinning_weights(c, 0) = 1.0;
    spec.skinning_weights(4 + c, 0) = 0.5;
    spec.skinning_weights(4 + c, 1) = 0.5;
    spec.skinning_weights(8 + c, 1) = 0.25;
    spec.skinning_weights(8 + c, 2) = 0.75;
  }
  spec.parent = {-1, 0, 1};

  // Two ring-to-ring bands of 8 triangles plus bottom and top caps.
  spec.faces.resize(20, 3);
  int f = 0;
  for (int r = 0; r + 1 < kRings; ++r) {
    for (int c = 0; c < 4; ++c) {
      const int a = 4 * r + c, b = 4 * r + (c + 1) % 4;
      const int a2 = a + 4, b2 = b + 4;
      spec.faces.row(f++) << a, b, b2;
      spec.faces.row(f++) << a, b2, a2;
    }
  }
  spec.faces.row(f++) << 0, 2, 1;
  spec.faces.row(f++) << 0, 3, 2;
  spec.faces.row(f++) << 8, 9, 10;
  spec.faces.row(f++) << 8, 10, 11;

  spec.validate();
  return spec;
}

PosePriorVAE make_toy_pose_prior() {
  constexpr int kInput = 6;
  constexpr int kHalf = 16;
  constexpr int kLatent = 8;
  constexpr double kGain = 40.0;
  constexpr double k = 1.0 + kLeakySlope;  // leaky(x) - leaky(-x) = k x
  Rng rng(0x5eed);

  const Eigen::MatrixXd A = random_matrix(rng, kHalf, kInput, 1.0 / std::sqrt(kInput));
  const Eigen::MatrixXd C = random_matrix(rng, kHalf, kHalf, 1.0 / std::sqrt(kHalf));
  Eigen::MatrixXd D = random_matrix(rng, kLatent, kHalf, 1.0 / std::sqrt(kHalf));
  // Mean map M = k^2 D C A, rescaled to the target RMS gain.
  const double rms = (k * k * D * C * A).norm() / std::sqrt(static_cast<double>(kInput));
  D *= kGain / rms;
  const Eigen::MatrixXd M = k * k * D * C * A;
  // log sigma = E (leaky(y) + leaky(-y)) + b with E >= 0.
  const Eigen::MatrixXd E = random_matrix(rng, kLatent, kHalf, 0.05).cwiseAbs();

  PosePriorVAE vae;
  vae.latent_dim = kLatent;
  vae.encoding = PoseFeatureEncoding::kAxisAngle;
  vae.encoder.push_back(layer(split_rows(A), Activation::kLeakyRelu));
  vae.encoder.push_back(layer(split_block(C), Activation::kLeakyRelu));
  Eigen::MatrixXd head(2 * kLatent, 2 * kHalf);
  head << diff_cols(D), E, E;
  DenseLayer out = layer(head, Activation::kIdentity);
  out.bias.tail(kLatent).setConstant(-1.0);
  vae.encoder.push_back(out);

  // Decoder mirrors the construction: dec(z) = k^2 Q H G z = pinv(M) z.
  const Eigen::MatrixXd G = random_matrix(rng, kHalf, kLatent, 1.0 / std::sqrt(kLatent));
  const Eigen::MatrixXd H = random_matrix(rng, kHalf, kHalf, 1.0 / std::sqrt(kHalf));
  const Eigen::MatrixXd M_pinv = M.completeOrthogonalDecomposition().pseudoInverse();
  const Eigen::MatrixXd HG_pinv = (k * k * H * G).completeOrthogonalDecomposition().pseudoInverse();
  const Eigen::MatrixXd Q = M_pinv * HG_pinv;
  vae.decoder.push_back(layer(split_rows(G), Activation::kLeakyRelu));
  vae.decoder.push_back(layer(split_block(H), Activation::kLeakyRelu));
  vae.decoder.push_back(layer(diff_cols(Q), Activation::kIdentity));

  vae.validate();
  return vae;
}

}  // namespace hpcgen
