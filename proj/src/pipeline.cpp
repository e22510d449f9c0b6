#include "hpcgen/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <thread>

#include "hpcgen/array_container.hpp"
#include "hpcgen/backend/rle.hpp"
#include "hpcgen/backend/wire.hpp"
#include "hpcgen/depth_compose.hpp"
#include "hpcgen/depth_renderer.hpp"
#include "hpcgen/error.hpp"
#include "hpcgen/json_io.hpp"
#include "hpcgen/rng.hpp"

namespace hpcgen {

namespace {

// Seed streams derived per input: derive_seed(cfg.seed, input, stream + k).
constexpr std::uint64_t kGenerationStream = 0;
constexpr std::uint64_t kScoringStream = 1;
constexpr std::uint64_t kAugmentationStream = 1000;
constexpr std::uint64_t kRegenerationStream = 2000;

// Backend samplers commonly take 32-bit seeds.
std::uint64_t sampler_seed(std::uint64_t base, int input, std::uint64_t stream) {
  return derive_seed(base, static_cast<std::uint64_t>(input), stream) & 0xffffffffULL;
}

std::string sample_id(SampleSource source, int input, int aug) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%c%05d_a%02d", source == SampleSource::kText ? 't' : 'r', input, aug);
  return buf;
}

// Per-pixel nearest foreground depth; background (0) never wins.
void merge_depth(DepthMap& into, const DepthMap& other) {
  for (std::size_t i = 0; i < into.data.size(); ++i) {
    const float d = other.data[i];
    if (d > 0.0f && (into.data[i] == 0.0f || d < into.data[i])) into.data[i] = d;
  }
}

DepthMap render_person(const BodyModelSpec& body, const PersonAnnotation& p, int size) {
  WeakPerspectiveCamera cam = p.camera;
  cam.width = size;
  cam.height = size;
  return render_depth(forward(body, p.theta, p.beta), cam, size, size);
}

double parse_tau(const nlohmann::json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    throw ValidationError("tau must be a number or \"inf\"");
  }
  return v.get<double>();
}

std::uint64_t seed_from_json(const nlohmann::json& v) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  throw ValidationError("seed must be a non-negative integer");
}

SampleSource parse_source(const std::string& s) {
  if (s == "text") return SampleSource::kText;
  if (s == "real_image") return SampleSource::kRealImage;
  throw ValidationError("unknown sample source '" + s + "'");
}

nlohmann::json person_to_json(const PersonAnnotation& p) {
  return {{"theta", pose_to_json(p.theta)}, {"beta", shape_to_json(p.beta)}, {"camera", camera_to_json(p.camera)}};
}

PersonAnnotation person_from_json(const nlohmann::json& j) {
  return {pose_from_json(j.at("theta")), shape_from_json(j.at("beta")), camera_from_json(j.at("camera"))};
}

}  // namespace

// ---------------------------------------------------------------- config

std::string to_string(SampleSource source) { return source == SampleSource::kText ? "text" : "real_image"; }

std::string to_string(PersonPolicy policy) {
  return policy == PersonPolicy::kHighestConfidence ? "highest_confidence" : "all_people";
}

std::string to_string(LatentMode mode) { return mode == LatentMode::kMean ? "mean" : "sampled"; }

PersonPolicy parse_person_policy(const std::string& name) {
  if (name == "highest_confidence") return PersonPolicy::kHighestConfidence;
  if (name == "all_people") return PersonPolicy::kAllPeople;
  throw ValidationError("unknown person policy '" + name + "' (expected highest_confidence or all_people)");
}

LatentMode parse_latent_mode(const std::string& name) {
  if (name == "mean") return LatentMode::kMean;
  if (name == "sampled") return LatentMode::kSampled;
  throw ValidationError("unknown latent mode '" + name + "' (expected mean or sampled)");
}

void PipelineConfig::validate() const {
  if (std::isnan(tau) || tau < 0.0) throw ValidationError("tau must be >= 0");
  if (augmentations_per_input < 0) throw ValidationError("augmentations_per_input must be >= 0");
  if (!std::isfinite(aug_scale) || aug_scale < 0.0) throw ValidationError("aug_scale must be finite and >= 0");
  if (!std::isfinite(aug_epsilon_range) || aug_epsilon_range < 0.0) {
    throw ValidationError("aug_epsilon_range must be finite and >= 0");
  }
  if (depth_size < 1) throw ValidationError("depth_size must be >= 1");
  if (!(strength > 0.0 && strength <= 1.0)) throw ValidationError("strength must be in (0, 1]");
  if (num_steps < 1) throw ValidationError("num_steps must be >= 1");
  if (image_size < 1) throw ValidationError("image_size must be >= 1");
  if (prompt_templates.empty()) throw ValidationError("prompt_templates must not be empty");
  if (jobs < 1) throw ValidationError("jobs must be >= 1");
}

nlohmann::json PipelineConfig::to_json() const {
  nlohmann::json j = {
      {"augmentations_per_input", augmentations_per_input},
      {"aug_scale", aug_scale},
      {"aug_epsilon_range", aug_epsilon_range},
      {"aug_latent", to_string(aug_latent)},
      {"score_mode", to_string(score_mode)},
      {"depth_size", depth_size},
      {"strength", strength},
      {"num_steps", num_steps},
      {"image_size", image_size},
      {"seed", seed},
      {"prompt_templates", prompt_templates},
      {"category", category},
      {"person_phrase", person_phrase},
      {"description", description},
      {"backend", backend},
      {"person_policy", to_string(person_policy)},
      {"person_classes", person_classes},
      {"emit_ungated", emit_ungated},
      {"jobs", jobs},
  };
  if (std::isinf(tau)) {
    j["tau"] = "inf";
  } else {
    j["tau"] = tau;
  }
  return j;
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("pipeline config must be a JSON object");
  PipelineConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "tau") c.tau = parse_tau(v);
      else if (key == "augmentations_per_input") c.augmentations_per_input = v.get<int>();
      else if (key == "aug_scale") c.aug_scale = v.get<double>();
      else if (key == "aug_epsilon_range") c.aug_epsilon_range = v.get<double>();
      else if (key == "aug_latent") c.aug_latent = parse_latent_mode(v.get<std::string>());
      else if (key == "score_mode") c.score_mode = parse_latent_mode(v.get<std::string>());
      else if (key == "depth_size") c.depth_size = v.get<int>();
      else if (key == "strength") c.strength = v.get<double>();
      else if (key == "num_steps") c.num_steps = v.get<int>();
      else if (key == "image_size") c.image_size = v.get<int>();
      else if (key == "seed") c.seed = seed_from_json(v);
      else if (key == "prompt_templates") c.prompt_templates = v.get<std::vector<std::string>>();
      else if (key == "category") c.category = v.get<std::string>();
      else if (key == "person_phrase") c.person_phrase = v.get<std::string>();
      else if (key == "description") c.description = v.get<std::string>();
      else if (key == "backend") c.backend = v.get<std::string>();
      else if (key == "person_policy") c.person_policy = parse_person_policy(v.get<std::string>());
      else if (key == "person_classes") c.person_classes = v.get<std::vector<std::string>>();
      else if (key == "emit_ungated") c.emit_ungated = v.get<bool>();
      else if (key == "jobs") c.jobs = v.get<int>();
      else throw ValidationError("unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("pipeline config: ") + e.what());
  }
  c.validate();
  return c;
}

// ---------------------------------------------------------------- prompts

std::string build_prompt(const std::string& tmpl, const std::string& category, const std::string& person_phrase,
                         const std::string& description) {
  std::string out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    const std::size_t open = tmpl.find('{', i);
    if (open == std::string::npos) {
      out.append(tmpl, i, std::string::npos);
      break;
    }
    out.append(tmpl, i, open - i);
    const std::size_t close = tmpl.find('}', open);
    if (close == std::string::npos) throw ValidationError("unterminated placeholder in template: " + tmpl);
    const std::string name = tmpl.substr(open + 1, close - open - 1);
    const std::string* value = nullptr;
    if (name == "action" || name == "a") value = &category;
    else if (name == "person" || name == "p") value = &person_phrase;
    else if (name == "description" || name == "d") value = &description;
    else throw ValidationError("unknown placeholder {" + name + "} in template: " + tmpl);
    if (value->empty()) throw ValidationError("no value for placeholder {" + name + "}");
    out += *value;
    i = close + 1;
  }
  return out;
}

// ---------------------------------------------------------------- report

int GenerationReport::gated_count() const {
  return static_cast<int>(std::count_if(samples.begin(), samples.end(), [](const auto& s) { return s.gated; }));
}

int GenerationReport::backend_failure_count() const {
  return static_cast<int>(
      std::count_if(rejects.begin(), rejects.end(), [](const auto& r) { return r.backend_failure; }));
}

// ---------------------------------------------------------------- pipeline

struct Pipeline::Input {
  int index = 0;
  SampleSource source = SampleSource::kText;
  std::string prompt;
  std::filesystem::path image_path;
  std::optional<Keypoints2D> gt_keypoints;
};

namespace {

// Thrown inside process() for inputs that are dropped by design.
struct Rejection {
  std::string stage;
  std::string reason;
};

}  // namespace

Pipeline::Pipeline(PipelineConfig config, BodyModelSpec body, PosePriorVAE prior, std::shared_ptr<Backend> backend)
    : config_(std::move(config)), body_(std::move(body)), prior_(std::move(prior)), backend_(std::move(backend)) {
  config_.validate();
  body_.validate();
  prior_.validate();
  if (!backend_) throw ValidationError("pipeline needs a backend");
  if (prior_.body_joint_count() != static_cast<int>(body_.parent.size()) - 1) {
    throw ShapeError("pose prior body joints (" + std::to_string(prior_.body_joint_count()) +
                     ") do not match the body model (" + std::to_string(body_.parent.size() - 1) + ")");
  }
}

void Pipeline::process(const Input& in, std::vector<GeneratedSample>& out) const {
  const PipelineConfig& cfg = config_;
  SampleSeeds seeds;

  // Step 1: image and latents.
  ImageBuffer image;
  if (in.source == SampleSource::kText) {
    seeds.generation = sampler_seed(cfg.seed, in.index, kGenerationStream);
    GenerationRequest req;
    req.prompt = in.prompt;
    req.seed = seeds.generation;
    req.num_steps = cfg.num_steps;
    req.strength = cfg.strength;
    req.width = cfg.image_size;
    req.height = cfg.image_size;
    image = backend_->txt2img(req);
  } else {
    try {
      image = read_png(in.image_path);
    } catch (const Error& e) {
      throw Rejection{"load", std::string("unreadable image: ") + e.what()};
    }
  }
  const Latents z = backend_->encode_latents(image);

  // Step 2: mesh estimate and difficulty gate.
  const HmrResult hmr = backend_->hmr(image);
  if (hmr.people.empty()) throw Rejection{"hmr", "no person detected"};
  std::vector<std::size_t> order(hmr.people.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return hmr.people[a].confidence > hmr.people[b].confidence;
  });
  if (cfg.person_policy == PersonPolicy::kHighestConfidence) order.resize(1);
  std::vector<PersonAnnotation> people;
  for (std::size_t i : order) {
    const HmrPerson& p = hmr.people[i];
    if (p.theta.body_pose.rows() != prior_.body_joint_count()) {
      throw Rejection{"hmr", "estimated pose has " + std::to_string(p.theta.body_pose.rows()) +
                                 " body joints, expected " + std::to_string(prior_.body_joint_count())};
    }
    people.push_back({p.theta, p.beta, p.camera});
  }

  double score = 0.0;
  if (cfg.score_mode == LatentMode::kMean) {
    score = difficulty_score(prior_, people[0].theta);
  } else {
    seeds.scoring = derive_seed(cfg.seed, static_cast<std::uint64_t>(in.index), kScoringStream);
    Rng rng(seeds.scoring);
    score = difficulty_score(prior_, people[0].theta, rng);
  }
  const bool gated = is_hard_pose(score, cfg.tau);

  GeneratedSample base;
  base.source = in.source;
  base.source_ref = in.source == SampleSource::kRealImage ? in.image_path.string() : std::string();
  base.prompt = in.prompt;
  base.difficulty_score = score;
  base.gated = gated;
  base.input_index = in.index;
  base.depth_size = cfg.depth_size;
  base.latent_checksum = z.checksum();
  base.gt_keypoints = in.gt_keypoints;
  base.seeds = seeds;

  if (!gated) {
    if (!cfg.emit_ungated) throw Rejection{"gate", "easy pose not emitted (emit_ungated=false)"};
    GeneratedSample s = base;
    s.sample_id = sample_id(in.source, in.index, 0);
    s.person = people[0];
    s.extra_people.assign(people.begin() + 1, people.end());
    s.depth = render_sample_depth(body_, s);
    s.occlusion_mask = encode_rle(MaskImage(cfg.depth_size, cfg.depth_size));
    s.image = std::move(image);
    out.push_back(std::move(s));
    return;
  }

  // Occluders are segmented once per input and reused for every augmentation.
  const SegmentationResult seg = backend_->segment(image);
  std::vector<MaskImage> masks;
  masks.reserve(seg.instances.size());
  for (const auto& inst : seg.instances) {
    masks.push_back(resample_mask(decode_rle(inst.mask, inst.class_label), cfg.depth_size, cfg.depth_size));
  }
  const MaskImage occluders = union_occluders(masks, cfg.depth_size, cfg.depth_size, cfg.person_classes);
  const RleMask occluder_rle = encode_rle(occluders);

  const int count = std::max(1, cfg.augmentations_per_input);
  for (int k = 0; k < count; ++k) {
    const int aug_index = cfg.augmentations_per_input == 0 ? 0 : k + 1;
    GeneratedSample s = base;
    s.sample_id = sample_id(in.source, in.index, aug_index);
    s.augmentation_index = aug_index;
    std::vector<PersonAnnotation> posed = people;
    if (aug_index > 0) {
      s.seeds.augmentation =
          derive_seed(cfg.seed, static_cast<std::uint64_t>(in.index), kAugmentationStream + static_cast<std::uint64_t>(aug_index));
      Rng rng(s.seeds.augmentation);
      AugmentationConfig aug{cfg.aug_scale, cfg.aug_epsilon_range, s.seeds.augmentation};
      for (auto& p : posed) p.theta = augment_pose(prior_, p.theta, aug, rng, cfg.aug_latent);
    }
    s.person = posed[0];
    s.extra_people.assign(posed.begin() + 1, posed.end());
    s.depth = apply_occlusion(render_sample_depth(body_, s), occluders);
    s.occlusion_mask = occluder_rle;

    // Step 3: depth-conditioned regeneration from the Step-1 latents.
    const NormalizedDepth cond = normalize_for_conditioning(s.depth);
    s.seeds.regeneration = sampler_seed(cfg.seed, in.index, kRegenerationStream + static_cast<std::uint64_t>(aug_index));
    GenerationRequest req;
    req.prompt = in.prompt;
    req.seed = s.seeds.regeneration;
    req.num_steps = cfg.num_steps;
    req.strength = cfg.strength;
    req.width = image.width;
    req.height = image.height;
    s.image = backend_->depth2img(z, resample_depth(cond.map, z.width, z.height), req);
    out.push_back(std::move(s));
  }
}

GenerationReport Pipeline::run(std::vector<Input> inputs) const {
  const std::size_t n = inputs.size();
  std::vector<std::vector<GeneratedSample>> results(n);
  std::vector<std::optional<RejectRecord>> rejects(n);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      const Input& in = inputs[i];
      RejectRecord r{in.index, in.source, in.source == SampleSource::kText ? in.prompt : in.image_path.string(), "", "",
                     false};
      try {
        process(in, results[i]);
        continue;
      } catch (const Rejection& e) {
        r.stage = e.stage;
        r.reason = e.reason;
      } catch (const BackendError& e) {
        r.stage = "backend";
        r.reason = e.what();
        r.backend_failure = true;
      } catch (const ProtocolError& e) {
        r.stage = "backend";
        r.reason = e.what();
        r.backend_failure = true;
      } catch (const std::exception& e) {
        r.stage = "pipeline";
        r.reason = e.what();
      }
      results[i].clear();
      rejects[i] = std::move(r);
    }
  };

  const int threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(config_.jobs), n));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  GenerationReport report;
  report.input_count = static_cast<int>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& s : results[i]) report.samples.push_back(std::move(s));
    if (rejects[i]) report.rejects.push_back(std::move(*rejects[i]));
  }
  report.model_id = backend_->model_id();
  return report;
}

GenerationReport Pipeline::generate_from_text(std::span<const std::string> prompts) const {
  std::vector<Input> inputs;
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    Input in;
    in.index = static_cast<int>(i);
    in.source = SampleSource::kText;
    in.prompt = prompts[i];
    inputs.push_back(std::move(in));
  }
  return run(std::move(inputs));
}

GenerationReport Pipeline::generate_from_text(const std::string& prompt) const {
  return generate_from_text(std::span<const std::string>(&prompt, 1));
}

GenerationReport Pipeline::generate_from_real(std::span<const RealInput> real) const {
  std::vector<Input> inputs;
  for (std::size_t i = 0; i < real.size(); ++i) {
    Input in;
    in.index = static_cast<int>(i);
    in.source = SampleSource::kRealImage;
    in.image_path = real[i].image_path;
    in.gt_keypoints = real[i].gt_keypoints;
    const std::string& tmpl = config_.prompt_templates[i % config_.prompt_templates.size()];
    const std::string& category = real[i].category.empty() ? config_.category : real[i].category;
    in.prompt = build_prompt(tmpl, category, config_.person_phrase, config_.description);
    inputs.push_back(std::move(in));
  }
  return run(std::move(inputs));
}

GenerationReport Pipeline::generate_from_real(const RealInput& input) const {
  return generate_from_real(std::span<const RealInput>(&input, 1));
}

DepthMap render_sample_depth(const BodyModelSpec& body, const GeneratedSample& sample) {
  DepthMap depth = render_person(body, sample.person, sample.depth_size);
  for (const auto& p : sample.extra_people) merge_depth(depth, render_person(body, p, sample.depth_size));
  return depth;
}

// ---------------------------------------------------------------- records

nlohmann::json sample_to_json(const GeneratedSample& s) {
  nlohmann::json extra = nlohmann::json::array();
  for (const auto& p : s.extra_people) extra.push_back(person_to_json(p));
  nlohmann::json j = {
      {"schema_version", kAnnotationSchemaVersion},
      {"sample_id", s.sample_id},
      {"image", s.image_file},
      {"depth", s.depth_file},
      {"depth_size", s.depth_size},
      {"source", to_string(s.source)},
      {"source_ref", s.source_ref},
      {"input_index", s.input_index},
      {"prompt", s.prompt},
      {"theta", pose_to_json(s.person.theta)},
      {"beta", shape_to_json(s.person.beta)},
      {"camera", camera_to_json(s.person.camera)},
      {"extra_people", extra},
      {"difficulty_score", s.difficulty_score},
      {"gated", s.gated},
      {"augmentation_index", s.augmentation_index},
      {"seeds",
       {{"generation", s.seeds.generation},
        {"scoring", s.seeds.scoring},
        {"augmentation", s.seeds.augmentation},
        {"regeneration", s.seeds.regeneration}}},
      {"occlusion_mask", wire::rle_to_json(s.occlusion_mask)},
      {"latent_checksum", s.latent_checksum},
  };
  if (s.gt_keypoints) j["gt_keypoints"] = keypoints_to_json(*s.gt_keypoints);
  return j;
}

GeneratedSample sample_from_json(const nlohmann::json& j) {
  try {
    const int version = j.at("schema_version").get<int>();
    if (version != kAnnotationSchemaVersion) {
      throw ValidationError("unsupported annotation schema_version " + std::to_string(version));
    }
    GeneratedSample s;
    s.sample_id = j.at("sample_id").get<std::string>();
    s.image_file = j.at("image").get<std::string>();
    s.depth_file = j.at("depth").get<std::string>();
    s.depth_size = j.at("depth_size").get<int>();
    s.source = parse_source(j.at("source").get<std::string>());
    s.source_ref = j.at("source_ref").get<std::string>();
    s.input_index = j.at("input_index").get<int>();
    s.prompt = j.at("prompt").get<std::string>();
    s.person = {pose_from_json(j.at("theta")), shape_from_json(j.at("beta")), camera_from_json(j.at("camera"))};
    for (const auto& p : j.at("extra_people")) s.extra_people.push_back(person_from_json(p));
    s.difficulty_score = j.at("difficulty_score").get<double>();
    s.gated = j.at("gated").get<bool>();
    s.augmentation_index = j.at("augmentation_index").get<int>();
    const auto& seeds = j.at("seeds");
    s.seeds = {seeds.at("generation").get<std::uint64_t>(), seeds.at("scoring").get<std::uint64_t>(),
               seeds.at("augmentation").get<std::uint64_t>(), seeds.at("regeneration").get<std::uint64_t>()};
    s.occlusion_mask = wire::rle_from_json(j.at("occlusion_mask"));
    s.latent_checksum = j.at("latent_checksum").get<std::string>();
    if (j.contains("gt_keypoints")) s.gt_keypoints = keypoints_from_json(j.at("gt_keypoints"));
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("annotation record: ") + e.what());
  } catch (const ProtocolError& e) {
    throw ValidationError(std::string("annotation record: ") + e.what());
  }
}

nlohmann::json reject_to_json(const RejectRecord& r) {
  return {{"input_index", r.input_index}, {"source", to_string(r.source)}, {"input", r.input},
          {"stage", r.stage},             {"reason", r.reason},            {"backend_failure", r.backend_failure}};
}

std::filesystem::path emit_dataset(std::span<const GeneratedSample> samples, const std::filesystem::path& out_dir,
                                   const EmitOptions& options) {
  std::set<std::string> ids;
  for (const auto& s : samples) {
    if (s.sample_id.empty()) throw ValidationError("sample without an id");
    if (!ids.insert(s.sample_id).second) throw ValidationError("duplicate sample id '" + s.sample_id + "'");
  }

  namespace fs = std::filesystem;
  fs::create_directories(out_dir / "images");
  fs::create_directories(out_dir / "depths");

  std::ofstream ann(out_dir / "annotations.jsonl", std::ios::binary | std::ios::trunc);
  if (!ann) throw Error("cannot write " + (out_dir / "annotations.jsonl").string());
  for (const auto& sample : samples) {
    GeneratedSample s = sample;
    s.image_file = "images/" + s.sample_id + ".png";
    s.depth_file = "depths/" + s.sample_id + ".bin";
    write_png(s.image, out_dir / s.image_file);
    write_depth_bin(s.depth, out_dir / s.depth_file);
    ann << sample_to_json(s).dump() << '\n';
  }
  ann.close();
  if (!ann) throw Error("failed writing annotations.jsonl");

  std::ofstream rej(out_dir / "rejects.jsonl", std::ios::binary | std::ios::trunc);
  for (const auto& r : options.rejects) rej << reject_to_json(r).dump() << '\n';
  rej.close();
  if (!rej) throw Error("failed writing rejects.jsonl");

  const nlohmann::json manifest = {
      {"schema_version", kAnnotationSchemaVersion},
      {"record_count", samples.size()},
      {"reject_count", options.rejects.size()},
      {"model_id", options.model_id},
      {"config", options.config},
      {"annotations", "annotations.jsonl"},
      {"rejects", "rejects.jsonl"},
      {"layout", {{"images", "images/"}, {"depths", "depths/"}}},
      {"depth_format", "u32 width, u32 height, float32 row-major camera depth, 0 = background"},
  };
  const fs::path manifest_path = out_dir / "manifest.json";
  std::ofstream man(manifest_path, std::ios::binary | std::ios::trunc);
  man << manifest.dump(2) << '\n';
  man.close();
  if (!man) throw Error("failed writing manifest.json");
  return manifest_path;
}

std::vector<GeneratedSample> read_annotations(const std::filesystem::path& root) {
  const auto path = root / "annotations.jsonl";
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  std::vector<GeneratedSample> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(sample_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw LoadError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw LoadError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

bool verify_depth_round_trip(const BodyModelSpec& body, const GeneratedSample& sample,
                             const std::filesystem::path& root) {
  const DepthMap stored = read_depth_bin(root / sample.depth_file);
  const MaskImage mask = decode_rle(sample.occlusion_mask);
  const DepthMap rerendered = apply_occlusion(render_sample_depth(body, sample), mask);
  return rerendered == stored;
}

}  // namespace hpcgen
