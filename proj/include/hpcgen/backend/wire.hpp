#pragma once

// JSON wire format shared by the HTTP client and the mock server. Field
// names are frozen; see docs/backend_api.md.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hpcgen/backend/types.hpp"
#include "hpcgen/depth_renderer.hpp"

namespace hpcgen::wire {

inline constexpr const char* kApiVersion = "1";

std::string base64_encode(std::span<const std::uint8_t> bytes);
// Throws ProtocolError on malformed input.
std::vector<std::uint8_t> base64_decode(std::string_view text);

// Throws ProtocolError unless payload["api_version"] == kApiVersion.
void check_api_version(const nlohmann::json& payload);

nlohmann::json image_to_json(const ImageBuffer& image);
ImageBuffer image_from_json(const nlohmann::json& j);

nlohmann::json latents_to_json(const Latents& latents);
Latents latents_from_json(const nlohmann::json& j);

nlohmann::json depth_to_json(const DepthMap& depth);
DepthMap depth_from_json(const nlohmann::json& j);

nlohmann::json rle_to_json(const RleMask& rle);
RleMask rle_from_json(const nlohmann::json& j);

nlohmann::json camera_to_json(const WeakPerspectiveCamera& cam);
WeakPerspectiveCamera camera_from_json(const nlohmann::json& j);

// Generation knobs (prompt, seed, num_steps, strength, width, height,
// guidance) merged into an existing object.
void put_generation_request(nlohmann::json& j, const GenerationRequest& req);
GenerationRequest generation_request_from_json(const nlohmann::json& j);

/// Split a flat HMR pose vector into global orientation + body joints.
/// convention "full": 3 global values followed by the body (SMPL's 72);
/// "body": body joints only (SMPL's 69), global orientation zero. Without a
/// declared convention the length is matched against expected_body_joints
/// (0 = unknown, which makes an undeclared convention a ProtocolError).
PoseParams normalize_theta(std::span<const double> theta, const std::optional<std::string>& convention,
                           int expected_body_joints);

nlohmann::json hmr_result_to_json(const HmrResult& result);
HmrResult hmr_result_from_json(const nlohmann::json& j, int expected_body_joints);

nlohmann::json segmentation_to_json(const SegmentationResult& result);
SegmentationResult segmentation_from_json(const nlohmann::json& j);

// {api_version, model_id, seed, request_id}
nlohmann::json response_envelope(const std::string& model_id, std::uint64_t seed, const std::string& request_id);

}  // namespace hpcgen::wire
