// Copyright 2026 The clanerf Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "clanerf/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include "clanerf/articulation.hpp"
#include "clanerf/error.hpp"
#include "clanerf/joint_estimation.hpp"
#include "clanerf/metrics.hpp"
#include "clanerf/pose_estimation.hpp"
#include "clanerf/voxel.hpp"
#include "json_util.hpp"

namespace clanerf::pipeline {

namespace fs = std::filesystem;
using namespace json_util;

namespace {

const json kEmpty = json::object();

const json& section(const json& request, const char* key) {
  if (!request.contains(key)) return kEmpty;
  const json& s = request.at(key);
  if (!s.is_object()) fail(ErrorCode::kSchema, std::string("request: \"") + key + "\" must be an object");
  return s;
}

int int_or(const json& j, const char* key, int fallback, const std::string& where) {
  return j.contains(key) ? integer(j, key, where) : fallback;
}

bool bool_or(const json& j, const char* key, bool fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean()) fail(ErrorCode::kSchema, where + ": \"" + key + "\" must be true or false");
  return j.at(key).get<bool>();
}

std::string string_or(const json& j, const char* key, const std::string& fallback, const std::string& where) {
  return j.contains(key) ? string(j, key, where) : fallback;
}

std::uint64_t seed_or(const json& j, std::uint64_t fallback, const std::string& where) {
  if (!j.contains("seed")) return fallback;
  if (!j.at("seed").is_number_unsigned() && !(j.at("seed").is_number_integer() && j.at("seed").get<long long>() >= 0)) {
    fail(ErrorCode::kSchema, where + ": \"seed\" must be a nonnegative integer");
  }
  return j.at("seed").get<std::uint64_t>();
}

std::vector<double> degrees(const json& j, const char* key, const std::string& where) {
  const json& v = need(j, key, where);
  if (v.is_number()) return {deg_to_rad(v.get<double>())};
  auto out = numbers(v, 0, where + ": \"" + key + "\"");
  for (double& a : out) a = deg_to_rad(a);
  return out;
}

std::vector<std::size_t> indices(const json& j, const char* key, const std::string& where) {
  std::vector<std::size_t> out;
  if (!j.contains(key)) return out;
  for (double v : numbers(j.at(key), 0, where + ": \"" + key + "\"")) {
    if (v < 0 || v != std::floor(v)) fail(ErrorCode::kSchema, where + ": \"" + key + "\" must hold indices");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

std::vector<double> to_degrees(const std::vector<double>& r) {
  std::vector<double> out;
  for (double a : r) out.push_back(rad_to_deg(a));
  return out;
}

}  // namespace

LoadedField procedural_field(ProceduralScene scene) {
  LoadedField out;
  auto s = std::make_shared<const ProceduralScene>(std::move(scene));
  out.scene = s;
  out.field = s;
  out.joints = s->joints();
  out.bound_radius = std::max(1e-6, s->bounding_radius());
  out.background = s->background();
  return out;
}

LoadedField learned_field(std::shared_ptr<const FieldModel> model) {
  LoadedField out;
  out.model = model;
  out.field = std::make_shared<const MlpField>(model);
  out.bound_radius = model->bound_radius > 0.0 ? model->bound_radius : 1.0;
  out.background = model->background;
  return out;
}

LoadedField load_field(const std::string& path) {
  if (!fs::exists(path)) fail(ErrorCode::kIo, "missing file " + path);
  if (is_checkpoint_file(path)) {
    return learned_field(std::make_shared<const FieldModel>(load_checkpoint(path)));
  }
  return procedural_field(ProceduralScene::load(path));
}

LoadedField voxel_field(const LoadedField& source, int resolution) {
  if (!source.scene) fail(ErrorCode::kInvalidArgument, "voxel baking needs an analytic scene");
  LoadedField out = source;
  out.field = std::make_shared<const VoxelGrid>(bake_procedural_to_voxel(*source.scene, resolution));
  out.scene.reset();
  return out;
}

void attach_conditioning(LoadedField& field, const std::string& manifest_path,
                         const std::vector<std::size_t>& frames) {
  if (!field.model) fail(ErrorCode::kInvalidArgument, "only learned fields take source views");
  const SceneManifest m = load_manifest(manifest_path);
  const std::vector<std::size_t> use = frames.empty() ? std::vector<std::size_t>{0} : frames;
  for (std::size_t f : use) {
    if (f >= m.frames.size()) fail(ErrorCode::kInvalidArgument, manifest_path + ": no frame " + std::to_string(f));
  }
  auto cond = make_conditioner(m, use, field.model->encoder);
  if (cond->feature_dim() != field.model->config.feature_dim) {
    fail(ErrorCode::kContract, "source-view features do not match the checkpoint");
  }
  field.cond = std::move(cond);
}

Camera camera_spec(const json& spec, const std::string& where) {
  if (spec.is_string()) {
    const std::string path = spec.get<std::string>();
    return camera_from_json(read_file(path), path);
  }
  if (!spec.is_object()) fail(ErrorCode::kSchema, where + " must be a path or an object");
  if (spec.contains("manifest")) {
    const SceneManifest m = load_manifest(string(spec, "manifest", where));
    const int f = int_or(spec, "frame", 0, where);
    if (f < 0 || static_cast<std::size_t>(f) >= m.frames.size()) {
      fail(ErrorCode::kInvalidArgument, where + ": frame " + std::to_string(f) + " out of range");
    }
    return m.frames[f].camera;
  }
  return camera_from_json(spec, where);
}

std::vector<Camera> camera_list(const json& spec, const LoadedField& field) {
  const std::string where = "request: \"cameras\"";
  std::vector<Camera> out;
  if (spec.is_array()) {
    for (const auto& c : spec) out.push_back(camera_spec(c, where));
  } else if (spec.is_object() && spec.contains("manifest")) {
    const SceneManifest m = load_manifest(string(spec, "manifest", where));
    std::vector<std::size_t> frames = indices(spec, "frames", where);
    if (frames.empty()) {
      for (std::size_t i = 0; i < m.frames.size(); ++i) frames.push_back(i);
    }
    for (std::size_t f : frames) {
      if (f >= m.frames.size()) fail(ErrorCode::kInvalidArgument, where + ": frame out of range");
      out.push_back(m.frames[f].camera);
    }
  } else if (spec.is_object() && spec.contains("ring")) {
    const json& r = spec.at("ring");
    const int res = int_or(r, "resolution", 128, where);
    const Intrinsics k = Camera::intrinsics_from_fov(res, res, number_or(r, "fov_deg", 50.0, where));
    out = ring_cameras(int_or(r, "count", 4, where), number_or(r, "elevation_deg", 45.0, where),
                       number_or(r, "radius", 2.5 * field.bound_radius, where), k,
                       number_or(r, "offset_deg", 45.0, where));
  } else {
    fail(ErrorCode::kSchema, where + " must be a list, a manifest reference or a ring");
  }
  if (out.empty()) fail(ErrorCode::kInvalidArgument, where + " is empty");
  return out;
}

RenderConfig render_config(const json& request, const LoadedField& field, const Camera& camera) {
  const json& r = section(request, "render");
  const std::string where = "request: render";
  RenderConfig c;
  const bool analytic = field.model == nullptr;
  c.k_coarse = int_or(r, "k_coarse", analytic ? 192 : 64, where);
  c.k_fine = int_or(r, "k_fine", analytic ? 0 : 64, where);
  const double dist = camera.center().norm();
  const double b = 1.05 * field.bound_radius;
  c.t_near = number_or(r, "t_near", std::max(1e-3, dist - b), where);
  c.t_far = number_or(r, "t_far", dist + b, where);
  c.jitter = bool_or(r, "jitter", false, where);
  c.background = r.contains("background") ? rgb(r, "background", where) : field.background;
  c.seed = seed_or(r, seed_or(request, 0, "request"), where);
  c.validate();
  return c;
}

std::vector<JointAttributes> joints_spec(const json& request, const LoadedField& field) {
  if (request.contains("joints")) {
    const json& j = request.at("joints");
    if (j.is_string()) return load_joints(j.get<std::string>());
    return joints_from_json(j, "request: \"joints\"");
  }
  if (field.joints.empty()) fail(ErrorCode::kInvalidArgument, "joint attributes are required for this field");
  return field.joints;
}

RenderOutput render(const LoadedField& field, const json& request) {
  const Camera cam = camera_spec(need(request, "camera", "request"), "request: \"camera\"");
  const RenderConfig rc = render_config(request, field, cam);
  if (!request.contains("pose_deg")) return render_image(*field.field, cam, rc, field.cond.get());
  const ArticulatedPose pose = degrees(request, "pose_deg", "request");
  return render_articulated(*field.field, cam, pose, joints_spec(request, field), rc, field.cond.get());
}

json render_and_save(const LoadedField& field, const json& request) {
  const RenderOutput out = render(field, request);
  json report = {{"width", out.rgb.width()}, {"height", out.rgb.height()}};
  if (request.contains("out_rgb")) {
    save_image(string(request, "out_rgb", "request"), out.rgb);
    report["rgb"] = request.at("out_rgb");
  }
  if (request.contains("out_seg")) {
    save_label_image(string(request, "out_seg", "request"), out.labels);
    report["seg"] = request.at("out_seg");
  }
  if (request.contains("out_alpha")) {
    save_image(string(request, "out_alpha", "request"), out.alpha);
    report["alpha"] = request.at("out_alpha");
  }
  double mean_alpha = 0.0;
  for (float a : out.alpha.data()) mean_alpha += a;
  report["mean_alpha"] = mean_alpha / std::max<std::size_t>(1, out.alpha.data().size());
  return report;
}

json estimate_joint(const LoadedField& field, const json& request) {
  const std::vector<Camera> cams =
      camera_list(request.contains("cameras") ? request.at("cameras") : json{{"ring", json::object()}}, field);
  const RenderConfig rc = render_config(request, field, cams.front());
  LineFitOptions opt;
  opt.trim_fraction = number_or(request, "trim_fraction", opt.trim_fraction, "request");
  opt.trim = opt.trim_fraction > 0.0;
  opt.min_eigen_ratio = number_or(request, "min_eigen_ratio", opt.min_eigen_ratio, "request");
  std::optional<double> threshold;
  if (request.contains("threshold")) threshold = number(request, "threshold", "request");
  const IntersectionSet points = collect_intersections(*field.field, cams, rc, threshold, field.cond.get());
  const JointEstimate est = fit_line(points.points, opt);
  std::map<int, std::size_t> votes;
  for (int c : points.classes) {
    if (c + 1 != 1) ++votes[c + 1];
  }
  int child = est.joint.child_part;
  std::size_t best = 0;
  for (const auto& [part, n] : votes) {
    if (n > best) {
      best = n;
      child = part;
    }
  }
  json report = {{"axis", vec_json(est.joint.axis)},
                 {"pivot", vec_json(est.joint.pivot)},
                 {"child_part", child},
                 {"residual", est.residual},
                 {"inliers", est.inliers},
                 {"points", points.points.size()},
                 {"threshold", points.threshold}};
  if (!field.joints.empty()) {
    const JointAttributes& truth = field.joints.front();
    report["axis_error_deg"] = rad_to_deg(axis_angle_error(est.joint.axis, truth.axis));
    report["line_distance"] = line_distance(est.joint.pivot, est.joint.axis, truth.pivot, truth.axis);
  }
  if (request.contains("out")) {
    JointAttributes j = est.joint;
    j.child_part = child;
    write_file(string(request, "out", "request"), joints_to_json({j}));
  }
  return report;
}

json estimate_pose(const LoadedField& field, const Image& target, const json& request) {
  PoseProblem p;
  p.field = field.field.get();
  p.cond = field.cond.get();
  p.target = target;
  p.camera = camera_spec(need(request, "camera", "request"), "request: \"camera\"");
  p.joints = joints_spec(request, field);
  if (request.contains("base_pose_deg")) p.base_pose = degrees(request, "base_pose_deg", "request");
  p.render = render_config(request, field, p.camera);
  const std::string w = "request";
  if (request.contains("bounds_deg")) {
    const auto b = numbers(request.at("bounds_deg"), 2, "request: \"bounds_deg\"");
    p.opt.a_min = deg_to_rad(b[0]);
    p.opt.a_max = deg_to_rad(b[1]);
  }
  p.opt.restarts = int_or(request, "restarts", p.opt.restarts, w);
  if (request.contains("initial_deg")) p.opt.initial = degrees(request, "initial_deg", w);
  p.opt.max_iters = int_or(request, "max_iters", p.opt.max_iters, w);
  p.opt.batch = int_or(request, "batch", p.opt.batch, w);
  p.opt.tol = deg_to_rad(number_or(request, "tol_deg", rad_to_deg(p.opt.tol), w));
  p.opt.seed = seed_or(request, 0, w);
  p.opt.joint = static_cast<std::size_t>(int_or(request, "joint", 0, w));
  const PoseEstimate est = estimate_pose(p);
  json restarts = json::array();
  for (const auto& t : est.traces) {
    restarts.push_back({{"initial_deg", rad_to_deg(t.initial)},
                        {"final_deg", rad_to_deg(t.final_angle)},
                        {"full_loss", t.full_loss},
                        {"iterations", t.angles.size()},
                        {"converged", t.converged}});
  }
  json report = {{"angle_deg", rad_to_deg(est.angle)},
                 {"loss", est.loss},
                 {"converged", est.converged},
                 {"best_restart", est.best_restart},
                 {"restarts", restarts}};
  if (request.contains("trace_file")) {
    save_pose_trace(string(request, "trace_file", w), est);
    report["trace_file"] = request.at("trace_file");
  } else {
    report["trace_file"] = nullptr;
  }
  if (request.contains("truth_deg")) {
    report["a_error_deg"] = std::abs(report["angle_deg"].get<double>() - number(request, "truth_deg", w));
  }
  return report;
}

json generate_dataset(const LoadedField& scene, const json& request) {
  if (!scene.scene) fail(ErrorCode::kInvalidArgument, "datasets are generated from analytic scenes");
  const std::string w = "request";
  DatasetConfig c;
  c.views = int_or(request, "views", c.views, w);
  if (request.contains("articulations_deg")) {
    c.articulations_deg = numbers(request.at("articulations_deg"), 0, "request: \"articulations_deg\"");
  }
  c.resolution = int_or(request, "resolution", c.resolution, w);
  c.seed = seed_or(request, c.seed, w);
  c.fov_deg = number_or(request, "fov_deg", c.fov_deg, w);
  c.radius_scale = number_or(request, "radius_scale", c.radius_scale, w);
  c.k_coarse = int_or(request, "k_coarse", c.k_coarse, w);
  const std::string out = string(request, "out", w);
  const SceneManifest m = clanerf::generate_dataset(*scene.scene, c, out);
  return {{"manifest", (fs::path(out) / "manifest.json").string()},
          {"frames", m.frames.size()},
          {"near", m.t_near},
          {"far", m.t_far}};
}

TrainConfig train_config(const json& request) {
  const std::string w = "request";
  TrainConfig c;
  c.net.depth = int_or(request, "depth", 4, w);
  c.net.width = int_or(request, "width", 64, w);
  c.net.color_width = int_or(request, "color_width", c.net.width / 2, w);
  c.net.pos_bands = int_or(request, "pos_bands", c.net.pos_bands, w);
  c.net.dir_bands = int_or(request, "dir_bands", c.net.dir_bands, w);
  c.conditioned = bool_or(request, "conditioned", false, w);
  if (request.contains("encoder")) {
    const json& e = request.at("encoder");
    const std::string kind = string_or(e, "kind", "pyramid", "request: encoder");
    if (kind != "pyramid" && kind != "identity") fail(ErrorCode::kSchema, "request: encoder: unknown kind " + kind);
    c.encoder.kind = kind == "identity" ? EncoderKind::kIdentity : EncoderKind::kPyramid;
    c.encoder.levels = int_or(e, "levels", c.encoder.levels, "request: encoder");
  }
  c.lambda = number_or(request, "lambda", c.lambda, w);
  c.lr = number_or(request, "lr", 5e-4, w);
  c.lr_decay = number_or(request, "lr_decay", c.lr_decay, w);
  c.iterations = int_or(request, "iterations", c.iterations, w);
  c.batch = int_or(request, "batch", 512, w);
  c.chunk = int_or(request, "chunk", c.chunk, w);
  c.k_coarse = int_or(request, "k_coarse", 32, w);
  c.k_fine = int_or(request, "k_fine", 32, w);
  c.jitter = bool_or(request, "jitter", c.jitter, w);
  c.detach_seg = bool_or(request, "detach_seg", c.detach_seg, w);
  c.seed = seed_or(request, c.seed, w);
  c.log_every = int_or(request, "log_every", c.log_every, w);
  c.log_path = string_or(request, "log", "", w);
  c.checkpoint_path = string_or(request, "out", "", w);
  c.checkpoint_every = int_or(request, "checkpoint_every", c.checkpoint_every, w);
  return c;
}

namespace {

// Frames of one manifest selected by a training request.
std::vector<std::size_t> pick_frames(const SceneManifest& m, const json& request, ArticulatedPose& rest) {
  const std::string w = "request";
  const auto holdout = indices(request, "holdout", w);
  std::optional<double> art;
  if (request.contains("articulation_deg")) art = deg_to_rad(number(request, "articulation_deg", w));
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < m.frames.size(); ++i) {
    if (std::find(holdout.begin(), holdout.end(), i) != holdout.end()) continue;
    if (art && (m.frames[i].articulation.empty() || std::abs(m.frames[i].articulation[0] - *art) > 1e-9)) continue;
    out.push_back(i);
  }
  if (out.empty()) fail(ErrorCode::kInvalidArgument, m.directory + ": no training frames left after selection");
  rest = m.frames[out.front()].articulation.empty() ? m.rest : m.frames[out.front()].articulation;
  return out;
}

}  // namespace

json train(const json& request) {
  const std::string w = "request";
  std::vector<std::string> paths;
  if (request.contains("manifests")) {
    for (const auto& p : request.at("manifests")) {
      if (!p.is_string()) fail(ErrorCode::kSchema, "request: \"manifests\" must list paths");
      paths.push_back(p.get<std::string>());
    }
  } else {
    paths.push_back(string(request, "manifest", w));
  }
  TrainConfig config = train_config(request);
  const auto source_frames = indices(request, "source_frames", w);
  std::vector<TrainInstance> data;
  std::vector<SceneManifest> manifests;
  for (const auto& path : paths) {
    manifests.push_back(load_manifest(path));
    ArticulatedPose rest;
    const auto frames = pick_frames(manifests.back(), request, rest);
    data.push_back(make_instance(manifests.back(), frames, config.conditioned ? &config.encoder : nullptr,
                                 source_frames));
    data.back().rest = rest;
  }
  const TrainResult result = clanerf::train(data, config);
  const LogRow& last = result.log.back();
  json report = {{"iterations", config.iterations},
                 {"final", {{"L_color", last.color}, {"L_seg", last.seg}, {"L_total", last.total},
                            {"psnr_probe", last.psnr_probe}}}};
  if (!config.checkpoint_path.empty()) report["checkpoint"] = config.checkpoint_path;
  if (!config.log_path.empty()) report["log"] = config.log_path;

  // Held-out views of the first manifest are rendered with the trained field.
  const auto holdout = indices(request, "holdout", w);
  if (!holdout.empty()) {
    LoadedField lf = learned_field(result.model);
    lf.cond = data.front().cond;
    const SceneManifest& m = manifests.front();
    json views = json::array();
    double psnr = 0.0, miou = 0.0;
    for (std::size_t f : holdout) {
      if (f >= m.frames.size()) fail(ErrorCode::kInvalidArgument, "holdout frame out of range");
      Image rgb;
      LabelImage labels;
      load_frame(m, f, rgb, labels);
      RenderConfig rc = render_config(request, lf, m.frames[f].camera);
      rc.t_near = m.t_near;
      rc.t_far = m.t_far;
      rc.background = m.background;
      const RenderOutput out = render_image(*lf.field, m.frames[f].camera, rc, lf.cond.get());
      const ImageMetrics im = image_metrics(out.rgb, rgb);
      const SegMetrics sm = seg_metrics(out.labels, labels, m.parts);
      psnr += im.psnr;
      miou += sm.miou;
      views.push_back({{"frame", f}, {"psnr", im.psnr}, {"ssim", im.ssim}, {"miou", sm.miou},
                       {"pixel_accuracy", sm.pixel_accuracy}});
    }
    report["holdout"] = {{"views", views}, {"mean_psnr", psnr / holdout.size()}, {"mean_miou", miou / holdout.size()}};
  }
  return report;
}

json heatmap(const json& request) {
  const std::string w = "request";
  const ProceduralScene scene = ProceduralScene::load(string(request, "scene", w));
  if (scene.joints().size() != 1) fail(ErrorCode::kInvalidArgument, "heatmaps need a single-joint scene");
  std::vector<double> sources = degrees(request, "sources_deg", w);
  std::vector<double> targets = degrees(request, "targets_deg", w);
  const std::string mode = string_or(request, "mode", "trained", w);
  if (mode != "trained" && mode != "oracle") fail(ErrorCode::kSchema, "request: mode must be trained or oracle");
  const LoadedField oracle = procedural_field(scene);
  Camera cam;
  if (request.contains("camera")) {
    cam = camera_spec(request.at("camera"), "request: \"camera\"");
  } else {
    const int res = int_or(request, "resolution", 64, w);
    cam = ring_cameras(1, 30.0, 2.5 * oracle.bound_radius, Camera::intrinsics_from_fov(res, res, 50.0), 60.0)[0];
  }
  const std::uint64_t seed = seed_or(request, 0, w);
  const json& tr = section(request, "train");
  const std::string work = string_or(request, "work_dir", "", w);
  if (mode == "trained" && work.empty()) fail(ErrorCode::kInvalidArgument, "trained heatmaps need \"work_dir\"");

  std::vector<LoadedField> fields;
  SourceFieldFn field_for = [&](double source) -> std::shared_ptr<const RadianceField> {
    if (mode == "oracle") {
      fields.push_back(procedural_field(scene.posed({source})));
      return fields.back().field;
    }
    char name[32];
    std::snprintf(name, sizeof(name), "source_%03d", static_cast<int>(std::lround(rad_to_deg(source))));
    const fs::path dir = fs::path(work) / name;
    const std::string ckpt = (dir / "model.ckpt").string();
    if (!(bool_or(request, "reuse", false, w) && fs::exists(ckpt))) {
      json gen = {{"views", int_or(tr, "views", 30, "request: train")},
                  {"articulations_deg", json::array({rad_to_deg(source)})},
                  {"resolution", int_or(tr, "resolution", 64, "request: train")},
                  {"seed", seed},
                  {"out", (dir / "data").string()}};
      generate_dataset(oracle, gen);
      json t = tr;
      t["manifest"] = (dir / "data" / "manifest.json").string();
      t["out"] = ckpt;
      t["log"] = (dir / "train_log.csv").string();
      if (!t.contains("seed")) t["seed"] = seed;
      train(t);
    }
    fields.push_back(load_field(ckpt));
    return fields.back().field;
  };
  RenderConfig target_rc = render_config(json::object(), oracle, cam);
  TargetImageFn target_for = [&](double target) {
    return render_image(scene.posed({target}), cam, target_rc).rgb;
  };

  PoseProblem base;
  base.camera = cam;
  base.joints = scene.joints();
  LoadedField estimator = oracle;
  if (mode == "trained") estimator.model = std::make_shared<const FieldModel>();
  base.render = render_config(request, estimator, cam);
  base.render.background = scene.background();
  const json& pose = section(request, "pose");
  base.opt.restarts = int_or(pose, "restarts", base.opt.restarts, "request: pose");
  base.opt.batch = int_or(pose, "batch", base.opt.batch, "request: pose");
  base.opt.max_iters = int_or(pose, "max_iters", base.opt.max_iters, "request: pose");
  if (pose.contains("bounds_deg")) {
    const auto b = numbers(pose.at("bounds_deg"), 2, "request: pose: \"bounds_deg\"");
    base.opt.a_min = deg_to_rad(b[0]);
    base.opt.a_max = deg_to_rad(b[1]);
  }
  base.opt.seed = seed;
  const Heatmap hm = error_heatmap(sources, targets, field_for, target_for, base);

  json est = json::array(), err = json::array();
  double diag = 0.0, far = 0.0;
  int nd = 0, nf = 0;
  bool row_min = true;
  for (std::size_t s = 0; s < sources.size(); ++s) {
    json er = json::array(), es = json::array();
    double diag_err = -1.0, off_min = 1e300;
    for (std::size_t t = 0; t < targets.size(); ++t) {
      const double e = rad_to_deg(hm.error(s, t));
      er.push_back(e);
      es.push_back(rad_to_deg(hm.estimates[s * targets.size() + t]));
      const double delta = std::abs(rad_to_deg(sources[s] - targets[t]));
      if (delta < 1e-9) {
        diag += e;
        ++nd;
        diag_err = e;
      } else {
        off_min = std::min(off_min, e);
      }
      if (delta >= 60.0 - 1e-9) {
        far += e;
        ++nf;
      }
    }
    if (diag_err >= 0.0 && !(diag_err < off_min)) row_min = false;
    err.push_back(er);
    est.push_back(es);
  }
  json report = {{"sources_deg", to_degrees(sources)},
                 {"targets_deg", to_degrees(targets)},
                 {"estimates_deg", est},
                 {"errors_deg", err},
                 {"diagonal_mean_deg", nd ? diag / nd : 0.0},
                 {"far_mean_deg", nf ? far / nf : 0.0},
                 {"row_min_on_diagonal", row_min}};
  if (request.contains("out_csv")) {
    save_heatmap_csv(string(request, "out_csv", w), hm);
    report["csv"] = request.at("out_csv");
  }
  if (request.contains("out_png")) {
    save_image(string(request, "out_png", w), heatmap_image(hm));
    report["png"] = request.at("out_png");
  }
  return report;
}

json evaluate(const json& request) {
  const std::string w = "request";
  json report = json::object();
  if (request.contains("pred") || request.contains("truth")) {
    const Image pred = load_image(string(request, "pred", w));
    const Image truth = load_image(string(request, "truth", w));
    const ImageMetrics m = image_metrics(pred, truth);
    report["image"] = {{"mse", m.mse}, {"psnr_db", m.psnr}, {"ssim", m.ssim}, {"lpips", nullptr}};
  }
  if (request.contains("pred_seg") || request.contains("truth_seg")) {
    const LabelImage pred = load_label_image(string(request, "pred_seg", w));
    const LabelImage truth = load_label_image(string(request, "truth_seg", w));
    const int parts = integer(request, "parts", w);
    validate_labels(pred, parts, string(request, "pred_seg", w));
    validate_labels(truth, parts, string(request, "truth_seg", w));
    const SegMetrics s = seg_metrics(pred, truth, parts);
    report["segmentation"] = {{"pixel_accuracy", s.pixel_accuracy}, {"miou", s.miou}};
  }
  if (request.contains("pose")) {
    const json& p = request.at("pose");
    const std::string wp = "request: pose";
    const double a_hat = deg_to_rad(number(p, "estimate_deg", wp));
    const double a_true = deg_to_rad(number(p, "truth_deg", wp));
    auto joint_of = [&](const char* key) {
      const json& j = need(p, key, wp);
      const auto joints = j.is_string() ? load_joints(j.get<std::string>()) : joints_from_json(j, wp + ": " + key);
      if (joints.empty()) fail(ErrorCode::kSchema, wp + ": \"" + key + "\" holds no joint");
      return joints.front();
    };
    const PoseMetrics m = pose_metrics(a_hat, a_true, joint_of("estimate_joint"), joint_of("truth_joint"));
    report["pose"] = {{"a_error_rad", m.a_error}, {"a_error_deg", rad_to_deg(m.a_error)},
                      {"u_error_rad", m.u_error}, {"v_error", m.v_error}};
  }
  if (report.empty()) fail(ErrorCode::kInvalidArgument, "nothing to evaluate");
  return report;
}

std::string table(const json& report) {
  std::ostringstream out;
  std::function<void(const json&, const std::string&)> walk = [&](const json& j, const std::string& prefix) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
      if (it->is_object()) {
        walk(*it, key);
      } else if (!it->is_array()) {
        out << key;
        for (std::size_t pad = key.size(); pad < 28; ++pad) out << ' ';
        out << ' ' << (it->is_string() ? it->get<std::string>() : it->dump()) << '\n';
      }
    }
  };
  walk(report, "");
  return out.str();
}

}  // namespace clanerf::pipeline
