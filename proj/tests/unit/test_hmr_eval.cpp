#include <numbers>

#include <Eigen/Geometry>
#include <gtest/gtest.h>

#include "hpcgen/error.hpp"
#include "hpcgen/hmr_eval.hpp"
#include "hpcgen/rng.hpp"
#include "oracles/procrustes_oracle.hpp"

using namespace hpcgen;

namespace {

Points3 random_points(Rng& rng, int n, double range = 1.0) {
  Points3 p(n, 3);
  for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = rng.uniform(-range, range);
  return p;
}

Eigen::Matrix3d random_rotation(Rng& rng) {
  Eigen::Vector3d axis(rng.normal(), rng.normal(), rng.normal());
  return Eigen::AngleAxisd(rng.uniform(-std::numbers::pi, std::numbers::pi), axis.normalized()).toRotationMatrix();
}

Points3 transform(const Points3& p, double s, const Eigen::Matrix3d& R, const Eigen::Vector3d& t) {
  Points3 out(p.rows(), 3);
  for (Eigen::Index i = 0; i < p.rows(); ++i) out.row(i) = (s * R * p.row(i).transpose() + t).transpose();
  return out;
}

// Scalar-loop MPJPE without root alignment, mm.
double loop_mpjpe(const Points3& a, const Points3& b) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    double d2 = 0.0;
    for (int c = 0; c < 3; ++c) d2 += (a(i, c) - b(i, c)) * (a(i, c) - b(i, c));
    sum += std::sqrt(d2);
  }
  return 1000.0 * sum / static_cast<double>(a.rows());
}

Keypoints2D kp(std::initializer_list<Eigen::RowVector2d> rows, std::vector<bool> visible = {}) {
  Points2 p(static_cast<Eigen::Index>(rows.size()), 2);
  Eigen::Index i = 0;
  for (const auto& r : rows) p.row(i++) = r;
  Keypoints2D k = Keypoints2D::all_visible(p);
  if (!visible.empty()) k.visible = std::move(visible);
  return k;
}

}  // namespace

TEST(Mpjpe, Examples) {
  Rng rng(1);
  const Points3 gt = random_points(rng, 24);
  EXPECT_EQ(mpjpe({gt}, {gt}), 0.0);
  Points3 off = gt;
  off.rowwise() += Eigen::RowVector3d(0.003, 0.004, 0.0);
  EXPECT_NEAR(mpjpe({off}, {gt}, false), 5.0, 1e-9);
  // A constant offset disappears under root alignment.
  EXPECT_NEAR(mpjpe({off}, {gt}, true), 0.0, 1e-9);
}

TEST(Mpjpe, MatchesScalarLoop) {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Points3 a = random_points(rng, 24), b = random_points(rng, 24);
    EXPECT_NEAR(mpjpe({a}, {b}, false), loop_mpjpe(a, b), 1e-9);
    Points3 ar = a, br = b;
    ar.rowwise() -= a.row(0);
    br.rowwise() -= b.row(0);
    EXPECT_NEAR(mpjpe({a}, {b}, true), loop_mpjpe(ar, br), 1e-9);
  }
}

TEST(Mpjpe, CountMismatchThrows) {
  EXPECT_THROW(mpjpe({Points3::Zero(3, 3)}, {Points3::Zero(4, 3)}), ShapeError);
}

TEST(Procrustes, IdentityCase) {
  Rng rng(3);
  const Points3 p = random_points(rng, 10);
  const SimilarityTransform t = procrustes_align(p, p);
  EXPECT_LT((t.rotation - Eigen::Matrix3d::Identity()).norm(), 1e-12);
  EXPECT_NEAR(t.scale, 1.0, 1e-12);
  EXPECT_LT(t.translation.norm(), 1e-12);
}

TEST(Procrustes, RecoversKnownTransform) {
  Rng rng(4);
  const Points3 p = random_points(rng, 8);
  const Eigen::Matrix3d Rz = Eigen::AngleAxisd(std::numbers::pi / 2, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  const Points3 g = transform(p, 2.0, Rz, Eigen::Vector3d(1, 0, 0));
  const SimilarityTransform t = procrustes_align(p, g);
  EXPECT_LT((t.rotation - Rz).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_NEAR(t.scale, 2.0, 1e-9);
  EXPECT_LT((t.translation - Eigen::Vector3d(1, 0, 0)).norm(), 1e-9);
  EXPECT_LT((t.apply(p) - g).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Procrustes, ReflectionGivesProperRotation) {
  Rng rng(5);
  const Points3 p = random_points(rng, 10);
  Points3 g = p;
  g.col(0) = -g.col(0);
  const SimilarityTransform t = procrustes_align(p, g);
  EXPECT_NEAR(t.rotation.determinant(), 1.0, 1e-12);
  EXPECT_LT((t.rotation * t.rotation.transpose() - Eigen::Matrix3d::Identity()).norm(), 1e-12);
  EXPECT_GT((t.apply(p) - g).norm(), 1e-3);
}

TEST(Procrustes, DegenerateConfigurationsThrow) {
  Points3 line(4, 3);
  line << 0, 0, 0, 1, 1, 1, 2, 2, 2, 3, 3, 3;
  EXPECT_THROW(procrustes_align(line, line), AlignmentError);
  EXPECT_THROW(procrustes_align(Points3::Zero(2, 3), Points3::Zero(2, 3)), AlignmentError);
}

TEST(PaMpjpe, ZeroForSimilarityTransforms) {
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const Points3 gt = random_points(rng, 17);
    const Points3 pred = transform(gt, rng.uniform(0.2, 5.0), random_rotation(rng),
                                   Eigen::Vector3d(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)));
    EXPECT_LT(pa_mpjpe({pred}, {gt}), 1e-6);
  }
}

TEST(PaMpjpe, NeverExceedsRootAlignedMpjpe) {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const Points3 gt = random_points(rng, 14);
    Points3 pred = gt;
    for (Eigen::Index i = 0; i < pred.size(); ++i) pred.data()[i] += 0.001 * rng.normal();
    EXPECT_LE(pa_mpjpe({pred}, {gt}), mpjpe({pred}, {gt}) + 1e-9);
    const Points3 other = random_points(rng, 14);
    EXPECT_LE(pa_mpjpe({other}, {gt}), mpjpe({other}, {gt}) + 1e-9);
  }
}

TEST(PaMpjpe, InvariantUnderSimilarityOfPrediction) {
  Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const Points3 gt = random_points(rng, 12), pred = random_points(rng, 12);
    const Points3 moved = transform(pred, rng.uniform(0.3, 3.0), random_rotation(rng), Eigen::Vector3d(0.5, -1, 2));
    EXPECT_NEAR(pa_mpjpe({moved}, {gt}), pa_mpjpe({pred}, {gt}), 1e-6);
  }
}

TEST(PaMpjpe, MatchesNumericOptimizationOracle) {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const Points3 gt = random_points(rng, 5);
    Points3 pred = transform(gt, rng.uniform(0.5, 2.0), random_rotation(rng), Eigen::Vector3d(0.1, 0.2, 0.3));
    for (Eigen::Index i = 0; i < pred.size(); ++i) pred.data()[i] += 0.05 * rng.normal();
    const oracle::NumericAlignment ref = oracle::numeric_align(pred, gt);
    const SimilarityTransform t = procrustes_align(pred, gt);
    const Points3 aligned = t.apply(pred);
    double sse = 0.0;
    for (Eigen::Index i = 0; i < aligned.rows(); ++i) sse += (aligned.row(i) - gt.row(i)).squaredNorm();
    EXPECT_LE(sse, ref.sse + 1e-12) << "closed form worse than the search";
    EXPECT_NEAR(pa_mpjpe({pred}, {gt}), ref.mean_error_mm, 1e-3) << "trial " << trial;
  }
}

TEST(Pck, Examples) {
  const Keypoints2D gt = kp({{0, 0}, {10, 10}, {20, 20}, {30, 30}});
  EXPECT_EQ(pck(gt, gt, 5.0), 1.0);
  const Keypoints2D at = kp({{3, 4}, {13, 14}, {20, 25}, {30, 35}});
  EXPECT_EQ(pck(at, gt, 5.0), 1.0);
  const Keypoints2D half = kp({{0, 0}, {10, 10}, {40, 40}, {0, 30}});
  EXPECT_EQ(pck(half, gt, 5.0), 0.5);
}

TEST(Pck, OnlyVisibleCounted) {
  const Keypoints2D gt = kp({{0, 0}, {10, 10}, {20, 20}}, {true, false, true});
  const Keypoints2D pred = kp({{0, 0}, {99, 99}, {99, 99}});
  EXPECT_EQ(pck(pred, gt, 1.0), 0.5);
  const Keypoints2D none = kp({{0, 0}}, {false});
  EXPECT_THROW(pck(none, none, 1.0), ValidationError);
}

TEST(Pck, MonotoneInThreshold) {
  Rng rng(10);
  Points2 a(30, 2), b(30, 2);
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    a.data()[i] = rng.uniform(0, 64);
    b.data()[i] = a.data()[i] + rng.uniform(-10, 10);
  }
  double prev = 0.0;
  for (double t = 0.0; t <= 20.0; t += 0.25) {
    const double v = pck(Keypoints2D::all_visible(b), Keypoints2D::all_visible(a), t);
    EXPECT_GE(v, prev);
    prev = v;
  }
  EXPECT_EQ(prev, 1.0);
}

TEST(Pck, TorsoThresholdAndSubsets) {
  const Keypoints2D gt = kp({{0, 0}, {6, 8}, {1, 1}});
  EXPECT_DOUBLE_EQ(torso_threshold(gt, {0, 1}), 5.0);
  EXPECT_THROW(torso_threshold(gt, {0, 7}), ValidationError);
  const Keypoints2D sub = select_keypoints(gt, {2, 0});
  EXPECT_EQ(sub.points.row(0), Eigen::RowVector2d(1, 1));
  EXPECT_EQ(sub.points.row(1), Eigen::RowVector2d(0, 0));
  Joints3D j{Points3::Identity(3, 3)};
  EXPECT_EQ(select_joints(j, {1}).joints.row(0), Eigen::RowVector3d(0, 1, 0));
  EXPECT_THROW(select_joints(j, {3}), ValidationError);
}
