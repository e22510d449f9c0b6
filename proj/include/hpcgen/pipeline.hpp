#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hpcgen/backend/backend.hpp"
#include "hpcgen/body_model.hpp"
#include "hpcgen/camera.hpp"
#include "hpcgen/hmr_eval.hpp"
#include "hpcgen/pose_prior.hpp"

namespace hpcgen {

inline constexpr int kAnnotationSchemaVersion = 1;
inline constexpr int kDefaultAugmentations = 3;

enum class PersonPolicy {
  kHighestConfidence,  // one mesh per image, others ignored
  kAllPeople,          // every detected person rendered into one depth map
};

enum class SampleSource { kText, kRealImage };

struct PipelineConfig {
  double tau = kDefaultTau;
  int augmentations_per_input = kDefaultAugmentations;
  double aug_scale = 0.1;
  double aug_epsilon_range = 1.0;
  LatentMode aug_latent = LatentMode::kSampled;
  LatentMode score_mode = LatentMode::kMean;
  int depth_size = kDefaultDepthSize;
  double strength = kDefaultStrength;
  int num_steps = kDefaultSteps;
  int image_size = kDefaultImageSize;
  std::uint64_t seed = 0;
  // Real-image prompts: templates are used round-robin by input index.
  std::vector<std::string> prompt_templates = {"a photo of an athlete doing {action}"};
  std::string category = "sports";
  std::string person_phrase = "a person";
  std::string description = "a photo";
  std::string backend = "mock";
  PersonPolicy person_policy = PersonPolicy::kHighestConfidence;
  std::vector<std::string> person_classes = {"person"};
  bool emit_ungated = true;
  int jobs = 4;

  // Throws ValidationError.
  void validate() const;
  nlohmann::json to_json() const;
  // Missing keys keep their defaults; unknown keys are an error.
  static PipelineConfig from_json(const nlohmann::json& j);
};

struct SampleSeeds {
  std::uint64_t generation = 0;    // Step-1 txt2img (0 for real images)
  std::uint64_t scoring = 0;       // latent draw in sampled score mode
  std::uint64_t augmentation = 0;  // augment_pose stream (0 when unused)
  std::uint64_t regeneration = 0;  // depth2img (0 for ungated samples)
};

// Ground truth for one person in the emitted image.
struct PersonAnnotation {
  PoseParams theta;
  ShapeParams beta;
  WeakPerspectiveCamera camera;  // in the coordinates of the source image
};

struct GeneratedSample {
  std::string sample_id;
  std::string image_file;  // relative to the dataset root
  std::string depth_file;  // occluded body depth d*, relative
  PersonAnnotation person;
  std::vector<PersonAnnotation> extra_people;  // all-people mode only
  SampleSource source = SampleSource::kText;
  std::string source_ref;  // real image path, empty for text
  std::string prompt;
  double difficulty_score = 0.0;
  bool gated = false;
  int augmentation_index = 0;
  SampleSeeds seeds;
  int input_index = 0;
  int depth_size = kDefaultDepthSize;
  RleMask occlusion_mask;  // occluder union at depth resolution
  std::string latent_checksum;
  std::optional<Keypoints2D> gt_keypoints;

  // Payloads; not part of the annotation record.
  ImageBuffer image;
  DepthMap depth;
};

struct RejectRecord {
  int input_index = 0;
  SampleSource source = SampleSource::kText;
  std::string input;  // prompt or image path
  std::string stage;
  std::string reason;
  bool backend_failure = false;
};

struct GenerationReport {
  std::vector<GeneratedSample> samples;
  std::vector<RejectRecord> rejects;
  int input_count = 0;
  std::string model_id;

  int gated_count() const;
  int backend_failure_count() const;
};

struct RealInput {
  std::filesystem::path image_path;
  std::optional<Keypoints2D> gt_keypoints;
  std::string category;  // empty: config category
};

/** The three-step generation procedure. Inputs are processed concurrently
 *  (cfg.jobs workers); results come back in input order and depend only on
 *  the inputs, the config and the backend. */
class Pipeline {
 public:
  Pipeline(PipelineConfig config, BodyModelSpec body, PosePriorVAE prior, std::shared_ptr<Backend> backend);

  GenerationReport generate_from_text(std::span<const std::string> prompts) const;
  GenerationReport generate_from_text(const std::string& prompt) const;
  GenerationReport generate_from_real(std::span<const RealInput> inputs) const;
  GenerationReport generate_from_real(const RealInput& input) const;

  const PipelineConfig& config() const { return config_; }
  const BodyModelSpec& body() const { return body_; }

 private:
  struct Input;
  void process(const Input& in, std::vector<GeneratedSample>& out) const;
  GenerationReport run(std::vector<Input> inputs) const;

  PipelineConfig config_;
  BodyModelSpec body_;
  PosePriorVAE prior_;
  std::shared_ptr<Backend> backend_;
};

/// Literal placeholder substitution: {action} or {a} -> category,
/// {person} or {p} -> person_phrase, {description} or {d} -> description.
/// Unknown or unterminated placeholders and placeholders without a value
/// throw ValidationError.
std::string build_prompt(const std::string& tmpl, const std::string& category, const std::string& person_phrase,
                         const std::string& description = "a photo");

// Render the sample's people at its depth size (nearest surface wins when
// several people overlap), without occlusion.
DepthMap render_sample_depth(const BodyModelSpec& body, const GeneratedSample& sample);

nlohmann::json sample_to_json(const GeneratedSample& sample);
GeneratedSample sample_from_json(const nlohmann::json& j);
nlohmann::json reject_to_json(const RejectRecord& reject);

struct EmitOptions {
  nlohmann::json config = nlohmann::json::object();
  std::vector<RejectRecord> rejects;
  std::string model_id;
};

/// Writes images/<id>.png, depths/<id>.bin, annotations.jsonl,
/// rejects.jsonl and manifest.json under out_dir; returns the manifest
/// path. Duplicate sample ids throw ValidationError before anything is
/// written.
std::filesystem::path emit_dataset(std::span<const GeneratedSample> samples, const std::filesystem::path& out_dir,
                                   const EmitOptions& options = {});

// Records from <root>/annotations.jsonl, without payloads.
std::vector<GeneratedSample> read_annotations(const std::filesystem::path& root);

/// Central round-trip check: re-render from the stored parameters, apply
/// the stored occlusion mask and compare with the stored depth file
/// bit-exactly.
bool verify_depth_round_trip(const BodyModelSpec& body, const GeneratedSample& sample,
                             const std::filesystem::path& root);

std::string to_string(SampleSource source);
std::string to_string(PersonPolicy policy);
std::string to_string(LatentMode mode);
PersonPolicy parse_person_policy(const std::string& name);
LatentMode parse_latent_mode(const std::string& name);

}  // namespace hpcgen
