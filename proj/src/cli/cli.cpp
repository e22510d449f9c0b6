#include "hpcgen/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "hpcgen/backend/http_backend.hpp"
#include "hpcgen/backend/mock_backend.hpp"
#include "hpcgen/backend/mock_server.hpp"
#include "hpcgen/depth_renderer.hpp"
#include "hpcgen/error.hpp"
#include "hpcgen/hmr_eval.hpp"
#include "hpcgen/json_io.hpp"
#include "hpcgen/pipeline.hpp"
#include "hpcgen/pose_prior.hpp"
#include "hpcgen/toy_assets.hpp"

namespace hpcgen::cli {

namespace {

namespace fs = std::filesystem;

// Bad flags or malformed user input; maps to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::atomic<bool> g_stop_requested{false};

extern "C" void on_stop_signal(int) { g_stop_requested = true; }

template <typename F>
auto as_usage(const std::string& what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const LoadError& e) {
    throw UsageError(what + ": " + e.what());
  } catch (const ValidationError& e) {
    throw UsageError(what + ": " + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(what + ": " + e.what());
  }
}

BodyModelSpec load_model_or_toy(const std::string& path) {
  if (path.empty()) return make_toy_body_model();
  return as_usage("--model " + path, [&] { return load_body_model(path); });
}

PosePriorVAE load_vae_or_toy(const std::string& path) {
  if (path.empty()) return make_toy_pose_prior();
  return as_usage("--vae " + path, [&] { return load_pose_prior(path); });
}

std::string resolve_backend(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kBackendUrlEnv); env != nullptr && *env != '\0') return env;
  throw UsageError(std::string("no backend: pass --backend URL|mock or set ") + kBackendUrlEnv);
}

std::shared_ptr<Backend> make_backend(const std::string& backend, const BodyModelSpec& body, int in_flight) {
  if (backend == "mock") {
    MockBackendConfig mc;
    mc.body_joint_count = static_cast<int>(body.joint_count()) - 1;
    mc.shape_count = static_cast<int>(body.shape_count());
    return std::make_shared<MockBackend>(mc);
  }
  if (backend.rfind("http://", 0) != 0 && backend.rfind("https://", 0) != 0) {
    throw UsageError("--backend must be 'mock' or an http(s):// URL, got '" + backend + "'");
  }
  HttpBackendOptions opts;
  opts.max_in_flight = in_flight;
  opts.expected_body_joints = static_cast<int>(body.joint_count()) - 1;
  return std::make_shared<HttpBackend>(backend, opts);
}

std::vector<std::string> read_prompt_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open --prompt-file " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.pop_back();
    const auto start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;
    out.push_back(line.substr(start));
  }
  return out;
}

// Every *.png in the directory (sorted); keypoints come from an optional
// sidecar <stem>.keypoints.json.
std::vector<RealInput> scan_real_dir(const std::string& dir) {
  if (!fs::is_directory(dir)) throw UsageError("--real-dir " + dir + " is not a directory");
  std::vector<fs::path> images;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") images.push_back(entry.path());
  }
  std::sort(images.begin(), images.end());
  std::vector<RealInput> out;
  for (const auto& p : images) {
    RealInput in;
    in.image_path = p;
    const fs::path kp = p.parent_path() / (p.stem().string() + ".keypoints.json");
    if (fs::exists(kp)) {
      in.gt_keypoints = as_usage(kp.string(), [&] { return keypoints_from_json(read_json_file(kp)); });
    }
    out.push_back(std::move(in));
  }
  return out;
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  std::vector<std::string> prompts;
  std::string prompt_file;
  std::string real_dir;
  std::string out_dir;
  std::string backend;
  std::string config_file;
  std::string model;
  std::string vae;
  std::string category;
  std::vector<std::string> templates;
  std::string person_policy;
  std::string score_mode;
  double tau = kDefaultTau;
  int augs = kDefaultAugmentations;
  double aug_scale = 0.1;
  double strength = kDefaultStrength;
  int steps = kDefaultSteps;
  std::uint64_t seed = 0;
  int depth_size = kDefaultDepthSize;
  int image_size = kDefaultImageSize;
  int jobs = 4;
  bool allow_empty = false;
  bool no_ungated = false;
};

struct GenerateOptions {
  CLI::Option* tau = nullptr;
  CLI::Option* augs = nullptr;
  CLI::Option* aug_scale = nullptr;
  CLI::Option* strength = nullptr;
  CLI::Option* steps = nullptr;
  CLI::Option* seed = nullptr;
  CLI::Option* depth_size = nullptr;
  CLI::Option* image_size = nullptr;
  CLI::Option* jobs = nullptr;
};

int cmd_generate(const GenerateArgs& a, const GenerateOptions& o, std::ostream& out, std::ostream& err) {
  PipelineConfig cfg;
  bool config_has_backend = false;
  if (!a.config_file.empty()) {
    cfg = as_usage("--config " + a.config_file, [&] {
      const auto j = read_json_file(a.config_file);
      config_has_backend = j.is_object() && j.contains("backend");
      return PipelineConfig::from_json(j);
    });
  }
  if (o.tau->count() > 0) cfg.tau = a.tau;
  if (o.augs->count() > 0) cfg.augmentations_per_input = a.augs;
  if (o.aug_scale->count() > 0) cfg.aug_scale = a.aug_scale;
  if (o.strength->count() > 0) cfg.strength = a.strength;
  if (o.steps->count() > 0) cfg.num_steps = a.steps;
  if (o.seed->count() > 0) cfg.seed = a.seed;
  if (o.depth_size->count() > 0) cfg.depth_size = a.depth_size;
  if (o.image_size->count() > 0) cfg.image_size = a.image_size;
  if (o.jobs->count() > 0) cfg.jobs = a.jobs;
  if (!a.category.empty()) cfg.category = a.category;
  if (!a.templates.empty()) cfg.prompt_templates = a.templates;
  if (a.no_ungated) cfg.emit_ungated = false;
  as_usage("flags", [&] {
    if (!a.person_policy.empty()) cfg.person_policy = parse_person_policy(a.person_policy);
    if (!a.score_mode.empty()) cfg.score_mode = parse_latent_mode(a.score_mode);
    cfg.validate();
    return 0;
  });
  // --backend, then the config file, then the environment.
  if (!a.backend.empty() || !config_has_backend) cfg.backend = resolve_backend(a.backend);

  const bool text = !a.prompts.empty() || !a.prompt_file.empty();
  const bool real = !a.real_dir.empty();
  if (text == real) throw UsageError("give --prompt/--prompt-file or --real-dir (exactly one kind of input)");

  std::vector<std::string> prompts = a.prompts;
  if (!a.prompt_file.empty()) {
    const auto more = read_prompt_file(a.prompt_file);
    prompts.insert(prompts.end(), more.begin(), more.end());
  }
  std::vector<RealInput> real_inputs;
  if (real) real_inputs = scan_real_dir(a.real_dir);

  BodyModelSpec body = load_model_or_toy(a.model);
  PosePriorVAE vae = load_vae_or_toy(a.vae);
  auto backend = make_backend(cfg.backend, body, cfg.jobs);
  const Pipeline pipeline(cfg, std::move(body), std::move(vae), backend);

  const GenerationReport report = text ? pipeline.generate_from_text(prompts) : pipeline.generate_from_real(real_inputs);
  const fs::path manifest =
      emit_dataset(report.samples, a.out_dir, EmitOptions{cfg.to_json(), report.rejects, report.model_id});

  std::set<int> reached_gate;
  std::set<int> hard_inputs;
  for (const auto& s : report.samples) {
    reached_gate.insert(s.input_index);
    if (s.gated) hard_inputs.insert(s.input_index);
  }
  for (const auto& r : report.rejects) {
    if (r.stage == "gate") reached_gate.insert(r.input_index);
  }
  const int gated = report.gated_count();
  out << "inputs: " << report.input_count << "\n"
      << "samples: " << report.samples.size() << " (gated " << gated << ", ungated "
      << report.samples.size() - static_cast<std::size_t>(gated) << ")\n"
      << "hard inputs: " << hard_inputs.size() << " of " << reached_gate.size() << " scored";
  if (!reached_gate.empty()) {
    out << " (gate rate " << std::fixed << std::setprecision(3)
        << static_cast<double>(hard_inputs.size()) / static_cast<double>(reached_gate.size()) << ")";
    out << std::defaultfloat;
  }
  out << "\nrejects: " << report.rejects.size() << "\n"
      << "manifest: " << manifest.string() << "\n";
  for (const auto& r : report.rejects) {
    err << "rejected input " << r.input_index << " [" << r.stage << "]: " << r.reason << "\n";
  }

  if (report.input_count > 0 && report.backend_failure_count() == report.input_count) {
    err << "error: backend failed on every input\n";
    return kExitFailure;
  }
  if (report.samples.empty() && !a.allow_empty) {
    err << "error: no samples emitted (pass --allow-empty to accept an empty dataset)\n";
    return kExitFailure;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- score-pose

int cmd_score_pose(const std::string& vae_path, const std::string& pose_path, double tau, bool mean,
                   std::uint64_t seed, std::ostream& out) {
  if (std::isnan(tau) || tau < 0.0) throw UsageError("--tau must be >= 0");
  const PosePriorVAE vae = load_vae_or_toy(vae_path);
  const PoseParams pose = as_usage("--pose " + pose_path, [&] { return pose_from_json(read_json_file(pose_path)); });
  if (pose.body_pose.rows() != vae.body_joint_count()) {
    throw UsageError("--pose has " + std::to_string(pose.body_pose.rows()) + " body joints, the prior expects " +
                     std::to_string(vae.body_joint_count()));
  }
  double score = 0.0;
  if (mean) {
    score = difficulty_score(vae, pose);
  } else {
    Rng rng(seed);
    score = difficulty_score(vae, pose, rng);
  }
  out << "score: " << std::setprecision(12) << score << "\n"
      << "mode: " << (mean ? "mean" : "sampled") << "\n"
      << "verdict: " << (is_hard_pose(score, tau) ? "hard" : "easy") << " (tau " << std::setprecision(6) << tau
      << ")\n";
  return kExitOk;
}

// ---------------------------------------------------------------- render-depth

int cmd_render_depth(const std::string& model_path, const std::string& pose_path, const std::string& shape_path,
                     const std::string& cam_path, int size, const std::string& out_path, std::ostream& out) {
  if (size < 1) throw UsageError("--size must be >= 1");
  const BodyModelSpec body = load_model_or_toy(model_path);
  const PoseParams pose = as_usage("--pose " + pose_path, [&] { return pose_from_json(read_json_file(pose_path)); });
  const ShapeParams shape =
      shape_path.empty() ? ShapeParams::zero(body.shape_count())
                         : as_usage("--shape " + shape_path, [&] { return shape_from_json(read_json_file(shape_path)); });
  WeakPerspectiveCamera cam =
      as_usage("--cam " + cam_path, [&] { return camera_from_json(read_json_file(cam_path)); });
  if (pose.body_pose.rows() + 1 != static_cast<Eigen::Index>(body.joint_count())) {
    throw UsageError("--pose has " + std::to_string(pose.body_pose.rows()) + " body joints, the model expects " +
                     std::to_string(body.joint_count() - 1));
  }
  if (shape.betas.size() != static_cast<Eigen::Index>(body.shape_count())) {
    throw UsageError("--shape has " + std::to_string(shape.betas.size()) + " betas, the model expects " +
                     std::to_string(body.shape_count()));
  }
  cam.width = size;
  cam.height = size;
  const DepthMap depth = render_depth(forward(body, pose, shape), cam, size, size);
  if (fs::path(out_path).extension() == ".png") {
    write_depth_png16(depth, out_path);
  } else {
    write_depth_bin(depth, out_path);
  }
  const auto fg = std::count_if(depth.data.begin(), depth.data.end(), [](float d) { return d > 0.0f; });
  out << "wrote " << size << "x" << size << " depth (" << fg << " foreground pixels) to " << out_path << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- evaluate

struct EvalRecord {
  Joints3D joints;
  std::optional<Keypoints2D> keypoints;
};

std::map<std::string, EvalRecord> read_eval_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  std::map<std::string, EvalRecord> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    as_usage(where, [&] {
      const auto j = nlohmann::json::parse(line);
      const std::string id = j.at("sample_id").get<std::string>();
      EvalRecord r;
      r.joints.joints = points3_from_json(j.at("joints"));
      if (j.contains("keypoints")) {
        nlohmann::json kp = {{"points", j.at("keypoints")}};
        if (j.contains("visible")) kp["visible"] = j.at("visible");
        r.keypoints = keypoints_from_json(kp);
      }
      if (!out.emplace(id, std::move(r)).second) throw ValidationError("duplicate sample_id '" + id + "'");
      return 0;
    });
  }
  return out;
}

int cmd_evaluate(const std::string& pred_path, const std::string& gt_path, const CLI::Option* thresh_opt,
                 double thresh_px, const std::string& joints_path, const std::string& report_flag, std::ostream& out,
                 std::ostream& err) {
  if (thresh_opt->count() > 0 && !(thresh_px > 0.0)) throw UsageError("--pck-thresh must be > 0");
  std::vector<int> subset;
  std::optional<std::pair<int, int>> torso;
  if (!joints_path.empty()) {
    as_usage("--joints " + joints_path, [&] {
      const auto j = read_json_file(joints_path);
      if (j.contains("indices")) subset = j.at("indices").get<std::vector<int>>();
      if (j.contains("torso")) {
        const auto t = j.at("torso").get<std::vector<int>>();
        if (t.size() != 2) throw ValidationError("torso must list two joint indices");
        torso = std::make_pair(t[0], t[1]);
      }
      return 0;
    });
  }

  const auto pred = read_eval_records(pred_path);
  const auto gt = read_eval_records(gt_path);
  std::vector<std::string> only_pred, only_gt;
  for (const auto& [id, r] : pred) {
    if (!gt.contains(id)) only_pred.push_back(id);
  }
  for (const auto& [id, r] : gt) {
    if (!pred.contains(id)) only_gt.push_back(id);
  }
  if (!only_pred.empty() || !only_gt.empty()) {
    err << "error: sample ids do not match\n";
    for (const auto& id : only_pred) err << "  only in --pred: " << id << "\n";
    for (const auto& id : only_gt) err << "  only in --gt: " << id << "\n";
    return kExitFailure;
  }

  const fs::path report_path = report_flag.empty() ? fs::path(pred_path).replace_extension(".report.jsonl") : fs::path(report_flag);
  std::ofstream report(report_path, std::ios::binary | std::ios::trunc);
  if (!report) throw Error("cannot write " + report_path.string());

  double sum_mpjpe = 0.0, sum_pa = 0.0, sum_pck = 0.0;
  int n_pa = 0, n_pck = 0;
  for (const auto& [id, g] : gt) {
    const EvalRecord& p = pred.at(id);
    if (p.joints.joints.rows() != g.joints.joints.rows()) {
      throw Error(id + ": pred has " + std::to_string(p.joints.joints.rows()) + " joints, gt has " +
                  std::to_string(g.joints.joints.rows()));
    }
    const Joints3D pj = subset.empty() ? p.joints : select_joints(p.joints, subset);
    const Joints3D gj = subset.empty() ? g.joints : select_joints(g.joints, subset);
    nlohmann::json row = {{"sample_id", id}};
    const double e = mpjpe(pj, gj);
    sum_mpjpe += e;
    row["mpjpe_mm"] = e;
    try {
      const double pa = pa_mpjpe(pj, gj);
      sum_pa += pa;
      ++n_pa;
      row["pa_mpjpe_mm"] = pa;
    } catch (const AlignmentError&) {
      row["pa_mpjpe_mm"] = nullptr;
    }
    if (p.keypoints && g.keypoints) {
      double thr = 0.0;
      if (thresh_opt->count() > 0) {
        thr = thresh_px;
      } else if (torso) {
        thr = torso_threshold(*g.keypoints, *torso);
      } else {
        thr = thresh_px;
      }
      const Keypoints2D pk = subset.empty() ? *p.keypoints : select_keypoints(*p.keypoints, subset);
      const Keypoints2D gk = subset.empty() ? *g.keypoints : select_keypoints(*g.keypoints, subset);
      const double v = pck(pk, gk, thr);
      sum_pck += v;
      ++n_pck;
      row["pck"] = v;
      row["threshold_px"] = thr;
    }
    report << row.dump() << "\n";
  }
  const auto n = static_cast<double>(gt.size());
  nlohmann::json summary = {{"summary", true},
                            {"samples", gt.size()},
                            {"mpjpe_mm", gt.empty() ? 0.0 : sum_mpjpe / n},
                            {"pa_mpjpe_mm", n_pa > 0 ? nlohmann::json(sum_pa / n_pa) : nlohmann::json(nullptr)},
                            {"pck", n_pck > 0 ? nlohmann::json(sum_pck / n_pck) : nlohmann::json(nullptr)}};
  report << summary.dump() << "\n";
  report.close();

  out << "samples: " << gt.size() << "\n" << std::fixed << std::setprecision(4);
  out << "MPJPE (mm): " << (gt.empty() ? 0.0 : sum_mpjpe / n) << "\n";
  if (n_pa > 0) out << "PA-MPJPE (mm): " << sum_pa / n_pa << "\n";
  if (n_pck > 0) out << "PCK: " << sum_pck / n_pck << "\n";
  out << std::defaultfloat << "report: " << report_path.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- serve-mock

int cmd_serve_mock(const std::string& host, int port, const std::string& model_path, const std::string& model_id,
                   std::ostream& out) {
  if (port < 0 || port > 65535) throw UsageError("--port must be in [0, 65535]");
  const BodyModelSpec body = load_model_or_toy(model_path);
  MockBackendConfig mc;
  mc.body_joint_count = static_cast<int>(body.joint_count()) - 1;
  mc.shape_count = static_cast<int>(body.shape_count());
  if (!model_id.empty()) mc.model_id = model_id;
  BackendServer server(std::make_shared<MockBackend>(mc));

  g_stop_requested = false;
  auto old_int = std::signal(SIGINT, on_stop_signal);
  auto old_term = std::signal(SIGTERM, on_stop_signal);
  const int bound = server.start(host, port);
  out << "serving mock backend on http://" << host << ":" << bound << std::endl;
  while (!g_stop_requested) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  server.stop();
  std::signal(SIGINT, old_int);
  std::signal(SIGTERM, old_term);
  return kExitOk;
}

// ---------------------------------------------------------------- misc

int cmd_make_toy_assets(const std::string& dir, std::ostream& out) {
  fs::create_directories(dir);
  save_body_model(make_toy_body_model(), fs::path(dir) / "toy_body_model.npz");
  save_pose_prior(make_toy_pose_prior(), fs::path(dir) / "toy_pose_prior.npz");
  out << "wrote " << (fs::path(dir) / "toy_body_model.npz").string() << " and "
      << (fs::path(dir) / "toy_pose_prior.npz").string() << "\n";
  return kExitOk;
}

int cmd_verify_dataset(const std::string& dir, const std::string& model_path, std::ostream& out, std::ostream& err) {
  const BodyModelSpec body = load_model_or_toy(model_path);
  const auto samples = read_annotations(dir);
  int bad = 0;
  for (const auto& s : samples) {
    if (!verify_depth_round_trip(body, s, dir)) {
      err << "depth mismatch: " << s.sample_id << "\n";
      ++bad;
    }
  }
  out << "verified " << samples.size() - static_cast<std::size_t>(bad) << " of " << samples.size() << " samples\n";
  return bad == 0 ? kExitOk : kExitFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Synthetic human-pose dataset generation with paired body-mesh ground truth", "hpcgen"};
  app.require_subcommand(1);

  // generate
  GenerateArgs g;
  GenerateOptions go;
  auto* gen = app.add_subcommand("generate", "Run the generation pipeline and write a dataset");
  gen->add_option("--prompt", g.prompts, "Text prompt (repeatable)");
  gen->add_option("--prompt-file", g.prompt_file, "File with one prompt per line ('#' starts a comment)");
  gen->add_option("--real-dir", g.real_dir, "Directory of real PNG images (optional <stem>.keypoints.json sidecars)");
  gen->add_option("--out", g.out_dir, "Output dataset directory")->required();
  gen->add_option("--backend", g.backend, std::string("Backend URL or 'mock' (default: $") + kBackendUrlEnv + ")");
  gen->add_option("--config", g.config_file, "Pipeline config JSON; explicit flags override it");
  gen->add_option("--model", g.model, "Body model .npz (default: built-in toy model)");
  gen->add_option("--vae", g.vae, "Pose prior .npz (default: built-in toy prior)");
  go.tau = gen->add_option("--tau", g.tau, "Difficulty threshold; hard iff score > tau")->capture_default_str();
  go.augs = gen->add_option("--augs", g.augs, "Augmented samples per hard input (0 = rectify unaugmented)")
                ->capture_default_str();
  go.aug_scale = gen->add_option("--aug-scale", g.aug_scale, "Latent perturbation scale s")->capture_default_str();
  go.strength = gen->add_option("--strength", g.strength, "Noise strength for regeneration, (0, 1]")->capture_default_str();
  go.steps = gen->add_option("--steps", g.steps, "Sampler steps")->capture_default_str();
  go.seed = gen->add_option("--seed", g.seed, "Base seed")->capture_default_str();
  go.depth_size = gen->add_option("--depth-size", g.depth_size, "Rendered depth map side length")->capture_default_str();
  go.image_size = gen->add_option("--image-size", g.image_size, "Text-to-image output side length")->capture_default_str();
  go.jobs = gen->add_option("--jobs", g.jobs, "Concurrent inputs (default: backend in-flight limit)")->capture_default_str();
  gen->add_option("--category", g.category, "Category substituted into real-image prompt templates");
  gen->add_option("--template", g.templates, "Real-image prompt template (repeatable)");
  gen->add_option("--person-policy", g.person_policy, "highest_confidence (default) or all_people");
  gen->add_option("--score-mode", g.score_mode, "Gate score latent: mean (default) or sampled");
  gen->add_flag("--no-ungated", g.no_ungated, "Do not emit easy (ungated) samples");
  gen->add_flag("--allow-empty", g.allow_empty, "Exit 0 when nothing was emitted");

  // score-pose
  std::string sp_vae, sp_pose;
  double sp_tau = kDefaultTau;
  bool sp_mean = false;
  std::uint64_t sp_seed = 0;
  auto* sp = app.add_subcommand("score-pose", "Print a pose's difficulty score and gate verdict");
  sp->add_option("--vae", sp_vae, "Pose prior .npz (default: built-in toy prior)");
  sp->add_option("--pose", sp_pose, "Pose JSON")->required();
  sp->add_option("--tau", sp_tau, "Difficulty threshold")->capture_default_str();
  sp->add_flag("--mean", sp_mean, "Score the latent mean instead of a seeded sample");
  sp->add_option("--seed", sp_seed, "Seed for the sampled latent")->capture_default_str();

  // render-depth
  std::string rd_model, rd_pose, rd_shape, rd_cam, rd_out;
  int rd_size = kDefaultDepthSize;
  auto* rd = app.add_subcommand("render-depth", "Render a body depth map");
  rd->add_option("--model", rd_model, "Body model .npz (default: built-in toy model)");
  rd->add_option("--pose", rd_pose, "Pose JSON")->required();
  rd->add_option("--shape", rd_shape, "Shape JSON (default: zero betas)");
  rd->add_option("--cam", rd_cam, "Camera JSON")->required();
  rd->add_option("--size", rd_size, "Depth map side length")->capture_default_str();
  rd->add_option("--out", rd_out, "Output .bin (float32) or .png (16-bit)")->required();

  // evaluate
  std::string ev_pred, ev_gt, ev_joints, ev_report;
  double ev_thresh = 10.0;
  auto* ev = app.add_subcommand("evaluate", "MPJPE, PA-MPJPE and PCK over matched JSONL records");
  ev->add_option("--pred", ev_pred, "Predictions JSONL")->required();
  ev->add_option("--gt", ev_gt, "Ground truth JSONL")->required();
  auto* ev_thresh_opt =
      ev->add_option("--pck-thresh", ev_thresh, "PCK threshold in pixels (default 10, or 0.5 x torso with --joints)")
          ->capture_default_str();
  ev->add_option("--joints", ev_joints, "Joint subset JSON {\"indices\": [...], \"torso\": [a, b]}");
  ev->add_option("--report", ev_report, "Report JSONL path (default: <pred>.report.jsonl)");

  // serve-mock
  std::string sm_host = "127.0.0.1", sm_model, sm_model_id;
  int sm_port = 8080;
  auto* sm = app.add_subcommand("serve-mock", "Serve the deterministic mock backend over HTTP");
  sm->add_option("--port", sm_port, "Port (0 picks a free port)")->capture_default_str();
  sm->add_option("--host", sm_host, "Bind address")->capture_default_str();
  sm->add_option("--model", sm_model, "Body model .npz that sizes HMR answers (default: toy)");
  sm->add_option("--model-id", sm_model_id, "model_id echoed in responses");

  // make-toy-assets
  std::string ta_dir = "data";
  auto* ta = app.add_subcommand("make-toy-assets", "Write the toy body model and pose prior .npz files");
  ta->add_option("--out-dir", ta_dir, "Output directory")->capture_default_str();

  // verify-dataset
  std::string vd_dir, vd_model;
  auto* vd = app.add_subcommand("verify-dataset", "Check the depth round trip of every sample in a dataset");
  vd->add_option("--dir", vd_dir, "Dataset directory")->required();
  vd->add_option("--model", vd_model, "Body model .npz (default: built-in toy model)");

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.emplace_back("hpcgen");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : argv_store) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_generate(g, go, out, err);
    if (sp->parsed()) return cmd_score_pose(sp_vae, sp_pose, sp_tau, sp_mean, sp_seed, out);
    if (rd->parsed()) return cmd_render_depth(rd_model, rd_pose, rd_shape, rd_cam, rd_size, rd_out, out);
    if (ev->parsed()) return cmd_evaluate(ev_pred, ev_gt, ev_thresh_opt, ev_thresh, ev_joints, ev_report, out, err);
    if (sm->parsed()) return cmd_serve_mock(sm_host, sm_port, sm_model, sm_model_id, out);
    if (ta->parsed()) return cmd_make_toy_assets(ta_dir, out);
    if (vd->parsed()) return cmd_verify_dataset(vd_dir, vd_model, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\nRun with --help for more information.\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace hpcgen::cli
