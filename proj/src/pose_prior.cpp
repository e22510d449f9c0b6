#include "hpcgen/pose_prior.hpp"

#include <cmath>

#include <Eigen/Geometry>

#include "hpcgen/array_container.hpp"
#include "hpcgen/error.hpp"

namespace hpcgen {

namespace {

int features_per_joint(PoseFeatureEncoding e) { return e == PoseFeatureEncoding::kAxisAngle ? 3 : 6; }

Eigen::VectorXd run(const std::vector<DenseLayer>& layers, Eigen::VectorXd x, const char* which) {
  for (const DenseLayer& layer : layers) {
    x = layer.apply(x);
  }
  if (!x.allFinite()) throw NumericError(std::string(which) + " produced a non-finite activation");
  return x;
}

std::string activation_name(Activation a) { return a == Activation::kLeakyRelu ? "leaky_relu" : "identity"; }

Activation parse_activation(const std::string& s) {
  if (s == "leaky_relu") return Activation::kLeakyRelu;
  if (s == "identity") return Activation::kIdentity;
  throw LoadError("unknown activation '" + s + "'");
}

std::vector<DenseLayer> load_layers(const ArrayContainer& c, const std::string& prefix,
                                    const nlohmann::json& activations) {
  std::vector<DenseLayer> layers;
  for (std::size_t i = 0;; ++i) {
    const std::string w_name = prefix + "_W" + std::to_string(i);
    if (!c.contains(w_name)) break;
    const NdArray& w = c.get(w_name);
    const NdArray& b = c.get(prefix + "_b" + std::to_string(i));
    if (w.dtype != DType::kFloat64 || b.dtype != DType::kFloat64 || w.shape.size() != 2 ||
        b.shape.size() != 1 || b.shape[0] != w.shape[0]) {
      throw LoadError("layer " + w_name + " has inconsistent weight/bias shapes " + w.shape_string() +
                      " / " + b.shape_string());
    }
    if (i >= activations.size()) throw LoadError("manifest lists no activation for " + w_name);
    DenseLayer layer;
    layer.weight = Eigen::Map<const RowMatrixXd>(w.f64.data(), static_cast<Eigen::Index>(w.shape[0]),
                                                 static_cast<Eigen::Index>(w.shape[1]));
    layer.bias = Eigen::Map<const Eigen::VectorXd>(b.f64.data(), static_cast<Eigen::Index>(b.shape[0]));
    layer.activation = parse_activation(activations[i].get<std::string>());
    layers.push_back(std::move(layer));
  }
  if (layers.size() != activations.size()) {
    throw LoadError(prefix + ": manifest lists " + std::to_string(activations.size()) + " activations for " +
                    std::to_string(layers.size()) + " layers");
  }
  return layers;
}

void put_layers(ArrayContainer& c, const std::string& prefix, const std::vector<DenseLayer>& layers,
                nlohmann::json& activations) {
  activations = nlohmann::json::array();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const RowMatrixXd w = layers[i].weight;
    c.put(prefix + "_W" + std::to_string(i),
          NdArray::from_f64({static_cast<std::size_t>(w.rows()), static_cast<std::size_t>(w.cols())},
                            std::vector<double>(w.data(), w.data() + w.size())));
    c.put(prefix + "_b" + std::to_string(i),
          NdArray::from_f64({static_cast<std::size_t>(layers[i].bias.size())},
                            std::vector<double>(layers[i].bias.data(), layers[i].bias.data() + layers[i].bias.size())));
    activations.push_back(activation_name(layers[i].activation));
  }
}

}  // namespace

Eigen::VectorXd DenseLayer::apply(const Eigen::VectorXd& x) const {
  Eigen::VectorXd y = weight * x + bias;
  if (activation == Activation::kLeakyRelu) {
    y = y.unaryExpr([](double v) { return v >= 0.0 ? v : kLeakySlope * v; });
  }
  return y;
}

int PosePriorVAE::input_dim() const {
  return encoder.empty() ? 0 : static_cast<int>(encoder.front().weight.cols());
}

int PosePriorVAE::body_joint_count() const { return input_dim() / features_per_joint(encoding); }

void PosePriorVAE::validate() const {
  if (latent_dim <= 0) throw ValidationError("latent_dim must be positive");
  if (encoder.empty() || decoder.empty()) throw ValidationError("encoder and decoder need at least one layer");
  auto check_chain = [](const std::vector<DenseLayer>& layers, const char* name) {
    for (std::size_t i = 0; i < layers.size(); ++i) {
      if (layers[i].bias.size() != layers[i].weight.rows()) {
        throw ShapeError(std::string(name) + " layer " + std::to_string(i) + ": bias length mismatch");
      }
      if (i > 0 && layers[i].weight.cols() != layers[i - 1].weight.rows()) {
        throw ShapeError(std::string(name) + " layer " + std::to_string(i) + " expects " +
                         std::to_string(layers[i].weight.cols()) + " inputs but the previous layer emits " +
                         std::to_string(layers[i - 1].weight.rows()));
      }
    }
  };
  check_chain(encoder, "encoder");
  check_chain(decoder, "decoder");
  if (encoder.back().weight.rows() != 2 * latent_dim) {
    throw ShapeError("final encoder layer must emit 2*latent_dim = " + std::to_string(2 * latent_dim) + " values");
  }
  if (decoder.front().weight.cols() != latent_dim) throw ShapeError("decoder input must be latent_dim");
  if (decoder.back().weight.rows() != input_dim()) throw ShapeError("decoder output must match encoder input");
  if (input_dim() % features_per_joint(encoding) != 0) {
    throw ShapeError("input_dim is not a whole number of joints for " + to_string(encoding));
  }
}

Eigen::VectorXd pose_features(const PoseParams& pose, PoseFeatureEncoding encoding) {
  if (encoding == PoseFeatureEncoding::kAxisAngle) return pose.flat_body();
  const Eigen::Index J = pose.body_pose.rows();
  Eigen::VectorXd f(6 * J);
  for (Eigen::Index j = 0; j < J; ++j) {
    const Eigen::Matrix3d r = axis_angle_to_matrix(pose.body_pose.row(j).transpose());
    // 3x2 block of the first two columns, row-major.
    for (int row = 0; row < 3; ++row) {
      f(6 * j + 2 * row) = r(row, 0);
      f(6 * j + 2 * row + 1) = r(row, 1);
    }
  }
  return f;
}

PoseParams pose_from_features(const Eigen::VectorXd& features, PoseFeatureEncoding encoding) {
  if (encoding == PoseFeatureEncoding::kAxisAngle) return PoseParams::from_flat_body(features);
  if (features.size() % 6 != 0) throw ShapeError("rot6d features must be a multiple of 6");
  const Eigen::Index J = features.size() / 6;
  PoseParams pose;
  pose.body_pose.resize(J, 3);
  for (Eigen::Index j = 0; j < J; ++j) {
    Eigen::Vector3d c0(features(6 * j), features(6 * j + 2), features(6 * j + 4));
    Eigen::Vector3d c1(features(6 * j + 1), features(6 * j + 3), features(6 * j + 5));
    // Gram-Schmidt completes a rotation from the two columns.
    const Eigen::Vector3d a0 = c0.normalized();
    const Eigen::Vector3d a1 = (c1 - a0.dot(c1) * a0).normalized();
    Eigen::Matrix3d r;
    r.col(0) = a0;
    r.col(1) = a1;
    r.col(2) = a0.cross(a1);
    if (!r.allFinite()) throw NumericError("rot6d features do not span a rotation");
    pose.body_pose.row(j) = matrix_to_axis_angle(r).transpose();
  }
  return pose;
}

LatentDistribution encode(const PosePriorVAE& vae, const PoseParams& pose) {
  const Eigen::VectorXd x = pose_features(pose, vae.encoding);
  if (x.size() != vae.input_dim()) {
    throw ShapeError("pose has " + std::to_string(x.size()) + " features, pose prior expects " +
                     std::to_string(vae.input_dim()));
  }
  const Eigen::VectorXd out = run(vae.encoder, x, "pose prior encoder");
  const Eigen::Index L = vae.latent_dim;
  LatentDistribution d{out.head(L), out.tail(L).array().exp().matrix()};
  if (!d.sigma.allFinite()) throw NumericError("pose prior sigma overflowed");
  return d;
}

PoseParams decode(const PosePriorVAE& vae, const Eigen::VectorXd& z) {
  if (z.size() != vae.latent_dim) {
    throw ShapeError("latent has " + std::to_string(z.size()) + " values, expected " + std::to_string(vae.latent_dim));
  }
  return pose_from_features(run(vae.decoder, z, "pose prior decoder"), vae.encoding);
}

double difficulty_score(const PosePriorVAE& vae, const PoseParams& pose) { return encode(vae, pose).mu.norm(); }

double difficulty_score(const PosePriorVAE& vae, const PoseParams& pose, Rng& rng) {
  const LatentDistribution d = encode(vae, pose);
  Eigen::VectorXd e(d.mu.size());
  for (Eigen::Index i = 0; i < e.size(); ++i) e(i) = d.mu(i) + d.sigma(i) * rng.normal();
  return e.norm();
}

Eigen::VectorXd perturb_latent(const Eigen::VectorXd& z, double scale, const Eigen::VectorXd& epsilon) {
  if (z.size() != epsilon.size()) throw ShapeError("epsilon must match the latent dimension");
  return (z.array() * (1.0 + scale * epsilon.array())).matrix();
}

PoseParams augment_pose(const PosePriorVAE& vae, const PoseParams& pose, const AugmentationConfig& cfg,
                        Rng& rng, LatentMode latent) {
  if (cfg.scale < 0.0) throw ValidationError("augmentation scale must be nonnegative");
  const LatentDistribution d = encode(vae, pose);
  Eigen::VectorXd z = d.mu;
  if (latent == LatentMode::kSampled) {
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) += d.sigma(i) * rng.normal();
  }
  Eigen::VectorXd eps(z.size());
  for (Eigen::Index i = 0; i < eps.size(); ++i) eps(i) = rng.uniform(-cfg.epsilon_range, cfg.epsilon_range);
  PoseParams out = decode(vae, perturb_latent(z, cfg.scale, eps));
  out.global_orient = pose.global_orient;
  return out;
}

PoseParams augment_pose_fixed_epsilon(const PosePriorVAE& vae, const PoseParams& pose, double scale,
                                      const Eigen::VectorXd& epsilon) {
  PoseParams out = decode(vae, perturb_latent(encode(vae, pose).mu, scale, epsilon));
  out.global_orient = pose.global_orient;
  return out;
}

std::string to_string(PoseFeatureEncoding encoding) {
  return encoding == PoseFeatureEncoding::kAxisAngle ? "axis_angle" : "rot6d";
}

PoseFeatureEncoding parse_pose_feature_encoding(const std::string& name) {
  if (name == "axis_angle") return PoseFeatureEncoding::kAxisAngle;
  if (name == "rot6d") return PoseFeatureEncoding::kRot6d;
  throw LoadError("unknown pose_feature_encoding '" + name + "'");
}

PosePriorVAE load_pose_prior(const std::filesystem::path& path) {
  const ArrayContainer c = ArrayContainer::read(path);
  const nlohmann::json& m = c.manifest();
  PosePriorVAE vae;
  try {
    vae.latent_dim = m.at("latent_dim").get<int>();
    vae.encoding = parse_pose_feature_encoding(m.value("pose_feature_encoding", std::string("axis_angle")));
    vae.encoder = load_layers(c, "enc", m.at("activations").at("encoder"));
    vae.decoder = load_layers(c, "dec", m.at("activations").at("decoder"));
    vae.validate();
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(path.string() + ": bad pose prior manifest: " + e.what());
  } catch (const Error& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
  return vae;
}

void save_pose_prior(const PosePriorVAE& vae, const std::filesystem::path& path) {
  vae.validate();
  ArrayContainer c;
  nlohmann::json& m = c.manifest();
  m["kind"] = "pose_prior";
  m["latent_dim"] = vae.latent_dim;
  m["pose_feature_encoding"] = to_string(vae.encoding);
  m["leaky_slope"] = kLeakySlope;
  put_layers(c, "enc", vae.encoder, m["activations"]["encoder"]);
  put_layers(c, "dec", vae.decoder, m["activations"]["decoder"]);
  c.write(path);
}

}  // namespace hpcgen
