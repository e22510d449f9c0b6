#pragma once

#include <memory>
#include <string>

#include "hpcgen/backend/types.hpp"
#include "hpcgen/depth_renderer.hpp"

namespace hpcgen {

/** The four black-box models behind one interface: text-to-image,
 *  latent encode + depth-conditioned regeneration, HMR and instance
 *  segmentation. Implementations must be safe to call concurrently. */
class Backend {
 public:
  virtual ~Backend() = default;

  virtual ImageBuffer txt2img(const GenerationRequest& req) = 0;
  virtual Latents encode_latents(const ImageBuffer& image) = 0;
  // `depth` is conditioning-normalized and matches the latent spatial size.
  // req.strength sets how much noise is added to z before denoising.
  virtual ImageBuffer depth2img(const Latents& z, const DepthMap& depth, const GenerationRequest& req) = 0;
  virtual HmrResult hmr(const ImageBuffer& image) = 0;
  virtual SegmentationResult segment(const ImageBuffer& image) = 0;

  virtual std::string model_id() const = 0;
};

}  // namespace hpcgen
