#include "hpcgen/backend/wire.hpp"

#include <array>
#include <cmath>
#include <cstring>

#include "hpcgen/error.hpp"
#include "hpcgen/rng.hpp"

namespace hpcgen {

void Latents::validate() const {
  if (channels <= 0 || height <= 0 || width <= 0) throw ValidationError("latent shape must be positive");
  if (data.size() != static_cast<std::size_t>(channels) * static_cast<std::size_t>(height) * static_cast<std::size_t>(width)) {
    throw ValidationError("latent data length does not match its shape");
  }
  for (float v : data) {
    if (!std::isfinite(v)) throw ValidationError("latents contain non-finite values");
  }
}

std::string Latents::checksum() const {
  const std::uint64_t h = fnv1a64(data.data(), data.size() * sizeof(float));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void GenerationRequest::validate() const {
  if (prompt.empty()) throw ValidationError("generation request: prompt must not be empty");
  if (num_steps < 1) throw ValidationError("generation request: num_steps must be >= 1");
  if (!(strength > 0.0 && strength <= 1.0)) throw ValidationError("generation request: strength must be in (0, 1]");
  if (width <= 0 || height <= 0) throw ValidationError("generation request: image size must be positive");
}

namespace wire {

namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

template <typename T>
T field(const nlohmann::json& j, const char* name) {
  try {
    return j.at(name).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("field '") + name + "': " + e.what());
  }
}

}  // namespace

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  const std::size_t rest = bytes.size() - i;
  if (rest == 1) {
    const std::uint32_t v = bytes[i] << 16;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += "==";
  } else if (rest == 2) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  static const std::array<int, 256> table = [] {
    std::array<int, 256> t{};
    t.fill(-1);
    for (int i = 0; i < 64; ++i) t[static_cast<unsigned char>(kAlphabet[i])] = i;
    return t;
  }();
  if (text.size() % 4 != 0) throw ProtocolError("base64: length is not a multiple of 4");
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    int v[4];
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + static_cast<std::size_t>(k)];
      if (c == '=' && i + 4 == text.size() && k >= 2) {
        v[k] = 0;
        ++pad;
      } else {
        if (pad) throw ProtocolError("base64: data after padding");
        v[k] = table[static_cast<unsigned char>(c)];
        if (v[k] < 0) throw ProtocolError("base64: invalid character");
      }
    }
    const std::uint32_t n = (static_cast<std::uint32_t>(v[0]) << 18) | (static_cast<std::uint32_t>(v[1]) << 12) |
                            (static_cast<std::uint32_t>(v[2]) << 6) | static_cast<std::uint32_t>(v[3]);
    out.push_back(static_cast<std::uint8_t>(n >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>((n >> 8) & 0xff));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(n & 0xff));
  }
  return out;
}

void check_api_version(const nlohmann::json& payload) {
  if (!payload.is_object() || !payload.contains("api_version")) {
    throw ProtocolError("payload has no api_version");
  }
  const auto& v = payload["api_version"];
  if (!v.is_string() || v.get<std::string>() != kApiVersion) {
    throw ProtocolError("api_version mismatch: expected \"" + std::string(kApiVersion) + "\", got " + v.dump());
  }
}

nlohmann::json image_to_json(const ImageBuffer& image) {
  return {{"width", image.width}, {"height", image.height}, {"png_base64", base64_encode(encode_png_rgb8(image))}};
}

ImageBuffer image_from_json(const nlohmann::json& j) {
  const auto png = base64_decode(field<std::string>(j, "png_base64"));
  ImageBuffer image;
  try {
    image = decode_png_rgb8(png);
  } catch (const LoadError& e) {
    throw ProtocolError(std::string("image payload: ") + e.what());
  }
  if (image.width != field<int>(j, "width") || image.height != field<int>(j, "height")) {
    throw ProtocolError("image payload size does not match its PNG");
  }
  return image;
}

nlohmann::json latents_to_json(const Latents& latents) {
  const auto* raw = reinterpret_cast<const std::uint8_t*>(latents.data.data());
  return {{"shape", {latents.channels, latents.height, latents.width}},
          {"dtype", "float32"},
          {"data_base64", base64_encode({raw, latents.data.size() * sizeof(float)})}};
}

Latents latents_from_json(const nlohmann::json& j) {
  const auto shape = field<std::vector<int>>(j, "shape");
  if (shape.size() != 3) throw ProtocolError("latents shape must have 3 entries");
  if (field<std::string>(j, "dtype") != "float32") throw ProtocolError("latents dtype must be float32");
  if (shape[0] <= 0 || shape[1] <= 0 || shape[2] <= 0) throw ProtocolError("latents shape must be positive");
  Latents l(shape[0], shape[1], shape[2]);
  const auto bytes = base64_decode(field<std::string>(j, "data_base64"));
  if (bytes.size() != l.data.size() * sizeof(float)) throw ProtocolError("latents data length does not match shape");
  std::memcpy(l.data.data(), bytes.data(), bytes.size());
  try {
    l.validate();
  } catch (const ValidationError& e) {
    throw ProtocolError(e.what());
  }
  return l;
}

nlohmann::json depth_to_json(const DepthMap& depth) {
  const auto* raw = reinterpret_cast<const std::uint8_t*>(depth.data.data());
  return {{"width", depth.width},
          {"height", depth.height},
          {"dtype", "float32"},
          {"data_base64", base64_encode({raw, depth.data.size() * sizeof(float)})}};
}

DepthMap depth_from_json(const nlohmann::json& j) {
  const int w = field<int>(j, "width");
  const int h = field<int>(j, "height");
  if (w <= 0 || h <= 0) throw ProtocolError("depth size must be positive");
  DepthMap d(w, h);
  const auto bytes = base64_decode(field<std::string>(j, "data_base64"));
  if (bytes.size() != d.data.size() * sizeof(float)) throw ProtocolError("depth data length does not match size");
  std::memcpy(d.data.data(), bytes.data(), bytes.size());
  for (float v : d.data) {
    if (!std::isfinite(v) || v < 0.0f) throw ProtocolError("depth values must be finite and nonnegative");
  }
  return d;
}

nlohmann::json rle_to_json(const RleMask& rle) {
  return {{"size", {rle.height, rle.width}}, {"counts", rle.counts}};
}

RleMask rle_from_json(const nlohmann::json& j) {
  const auto size = field<std::vector<int>>(j, "size");
  if (size.size() != 2 || size[0] < 0 || size[1] < 0) throw ProtocolError("rle size must be [height, width]");
  RleMask rle{size[0], size[1], field<std::vector<std::uint32_t>>(j, "counts")};
  std::uint64_t total = 0;
  for (auto c : rle.counts) total += c;
  if (total != static_cast<std::uint64_t>(rle.height) * static_cast<std::uint64_t>(rle.width)) {
    throw ProtocolError("rle counts do not sum to height*width");
  }
  return rle;
}

nlohmann::json camera_to_json(const WeakPerspectiveCamera& cam) {
  return {{"scale", cam.scale}, {"tx", cam.tx}, {"ty", cam.ty}, {"width", cam.width}, {"height", cam.height}};
}

WeakPerspectiveCamera camera_from_json(const nlohmann::json& j) {
  WeakPerspectiveCamera cam;
  cam.scale = field<double>(j, "scale");
  cam.tx = field<double>(j, "tx");
  cam.ty = field<double>(j, "ty");
  cam.width = field<int>(j, "width");
  cam.height = field<int>(j, "height");
  return cam;
}

void put_generation_request(nlohmann::json& j, const GenerationRequest& req) {
  j["prompt"] = req.prompt;
  j["seed"] = req.seed;
  j["num_steps"] = req.num_steps;
  j["strength"] = req.strength;
  j["width"] = req.width;
  j["height"] = req.height;
  j["guidance"] = req.guidance;
}

GenerationRequest generation_request_from_json(const nlohmann::json& j) {
  GenerationRequest req;
  req.prompt = field<std::string>(j, "prompt");
  req.seed = field<std::uint64_t>(j, "seed");
  req.num_steps = field<int>(j, "num_steps");
  req.strength = field<double>(j, "strength");
  req.width = j.value("width", kDefaultImageSize);
  req.height = j.value("height", kDefaultImageSize);
  req.guidance = j.value("guidance", nlohmann::json::object());
  return req;
}

PoseParams normalize_theta(std::span<const double> theta, const std::optional<std::string>& convention,
                           int expected_body_joints) {
  std::string conv;
  if (convention) {
    conv = *convention;
  } else if (expected_body_joints > 0 && theta.size() == static_cast<std::size_t>(3 * expected_body_joints)) {
    conv = "body";
  } else if (expected_body_joints > 0 && theta.size() == static_cast<std::size_t>(3 * expected_body_joints + 3)) {
    conv = "full";
  } else {
    throw ProtocolError("cannot infer pose convention for a " + std::to_string(theta.size()) + "-value theta");
  }
  if (theta.size() % 3 != 0) throw ProtocolError("theta length must be a multiple of 3");

  PoseParams pose;
  std::size_t offset = 0;
  if (conv == "full") {
    if (theta.size() < 3) throw ProtocolError("full theta needs a global orientation");
    pose.global_orient = Eigen::Vector3d(theta[0], theta[1], theta[2]);
    offset = 3;
  } else if (conv != "body") {
    throw ProtocolError("unknown theta_convention '" + conv + "'");
  }
  const std::size_t joints = (theta.size() - offset) / 3;
  if (expected_body_joints > 0 && joints != static_cast<std::size_t>(expected_body_joints)) {
    throw ProtocolError("theta has " + std::to_string(joints) + " body joints, expected " +
                        std::to_string(expected_body_joints));
  }
  pose.body_pose.resize(static_cast<Eigen::Index>(joints), 3);
  for (std::size_t i = 0; i < joints * 3; ++i) pose.body_pose.data()[i] = theta[offset + i];
  if (!pose.is_finite()) throw ProtocolError("theta contains non-finite values");
  return pose;
}

nlohmann::json hmr_result_to_json(const HmrResult& result) {
  nlohmann::json people = nlohmann::json::array();
  for (const HmrPerson& p : result.people) {
    std::vector<double> theta = {p.theta.global_orient.x(), p.theta.global_orient.y(), p.theta.global_orient.z()};
    const Eigen::VectorXd body = p.theta.flat_body();
    theta.insert(theta.end(), body.data(), body.data() + body.size());
    people.push_back({{"theta", theta},
                      {"theta_convention", "full"},
                      {"beta", std::vector<double>(p.beta.betas.data(), p.beta.betas.data() + p.beta.betas.size())},
                      {"camera", camera_to_json(p.camera)},
                      {"confidence", p.confidence}});
  }
  return {{"people", people}};
}

HmrResult hmr_result_from_json(const nlohmann::json& j, int expected_body_joints) {
  HmrResult result;
  for (const auto& p : field<nlohmann::json>(j, "people")) {
    HmrPerson person;
    const auto theta = field<std::vector<double>>(p, "theta");
    std::optional<std::string> conv;
    if (p.contains("theta_convention")) conv = field<std::string>(p, "theta_convention");
    person.theta = normalize_theta(theta, conv, expected_body_joints);
    const auto beta = field<std::vector<double>>(p, "beta");
    person.beta.betas = Eigen::Map<const Eigen::VectorXd>(beta.data(), static_cast<Eigen::Index>(beta.size()));
    person.camera = camera_from_json(field<nlohmann::json>(p, "camera"));
    person.confidence = field<double>(p, "confidence");
    if (!(person.confidence >= 0.0 && person.confidence <= 1.0)) {
      throw ProtocolError("hmr confidence outside [0, 1]");
    }
    try {
      person.camera.validate();
    } catch (const ValidationError& e) {
      throw ProtocolError(std::string("hmr camera: ") + e.what());
    }
    result.people.push_back(std::move(person));
  }
  return result;
}

nlohmann::json segmentation_to_json(const SegmentationResult& result) {
  nlohmann::json instances = nlohmann::json::array();
  for (const auto& inst : result.instances) {
    instances.push_back({{"class_label", inst.class_label}, {"score", inst.score}, {"mask", rle_to_json(inst.mask)}});
  }
  return {{"instances", instances}};
}

SegmentationResult segmentation_from_json(const nlohmann::json& j) {
  SegmentationResult result;
  for (const auto& inst : field<nlohmann::json>(j, "instances")) {
    SegmentationInstance s;
    s.class_label = field<std::string>(inst, "class_label");
    s.score = field<double>(inst, "score");
    if (!(s.score >= 0.0 && s.score <= 1.0)) throw ProtocolError("segmentation score outside [0, 1]");
    s.mask = rle_from_json(field<nlohmann::json>(inst, "mask"));
    result.instances.push_back(std::move(s));
  }
  return result;
}

nlohmann::json response_envelope(const std::string& model_id, std::uint64_t seed, const std::string& request_id) {
  return {{"api_version", kApiVersion}, {"model_id", model_id}, {"seed", seed}, {"request_id", request_id}};
}

}  // namespace wire
}  // namespace hpcgen
