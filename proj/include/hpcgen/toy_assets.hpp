#pragma once

#include "hpcgen/body_model.hpp"
#include "hpcgen/pose_prior.hpp"

namespace hpcgen {

/** Synthetic 3-joint body (V=12, K=3, B=4, P=18) used for tests, the CLI
 *  defaults and the mock backend. Three square rings stacked along +y form a
 *  closed tube of 20 triangles; joints are a root at the bottom ring, a
 *  "spine" at the middle ring and a "neck" between middle and top rings. */
BodyModelSpec make_toy_body_model();

/** Pose prior sized for the toy body (2 body joints, axis-angle input,
 *  latent dim 8, two hidden layers of 32 with leaky-relu(0.2)).
 *
 *  Weights are built in mirrored +/- pairs so the mean path is exactly
 *  linear in the pose, mu = M * theta, with RMS gain 40 per radian, while
 *  log sigma grows with |theta|. The decoder is the pseudo-inverse of M, so
 *  decode(encode(theta).mu) == theta up to rounding. */
PosePriorVAE make_toy_pose_prior();

}  // namespace hpcgen
