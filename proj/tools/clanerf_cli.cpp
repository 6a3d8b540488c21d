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

// clanerf command-line tool. Every subcommand builds a JSON request and hands
// it to the C API; reports go to stdout as JSON and to stderr as a table.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "clanerf/clanerf.h"

namespace {

using nlohmann::json;

constexpr int kRuntimeError = 1;
constexpr int kUsageError = 2;

struct Failure {
  clanerf_status status;
};

void check(clanerf_status s) {
  if (s != CLANERF_OK) throw Failure{s};
}

struct Common {
  int threads = 0;
  std::string report_path;
  bool quiet = false;
};

struct FieldHandle {
  clanerf_field* ptr = nullptr;
  FieldHandle() = default;
  FieldHandle(const FieldHandle&) = delete;
  FieldHandle& operator=(const FieldHandle&) = delete;
  ~FieldHandle() { clanerf_field_free(ptr); }
};

struct ImageHandle {
  clanerf_image* ptr = nullptr;
  ImageHandle() = default;
  ImageHandle(const ImageHandle&) = delete;
  ImageHandle& operator=(const ImageHandle&) = delete;
  ~ImageHandle() { clanerf_image_free(ptr); }
};

std::string take(char* text) {
  std::string out = text ? text : "";
  clanerf_string_free(text);
  return out;
}

void publish(const Common& common, const std::string& report_text) {
  std::cout << report_text << std::endl;
  if (!common.report_path.empty()) {
    std::ofstream out(common.report_path);
    out << report_text << "\n";
    if (!out) {
      std::cerr << "error: Io: cannot write " << common.report_path << "\n";
      throw Failure{CLANERF_IO};
    }
  }
  if (!common.quiet) {
    char* table = nullptr;
    if (clanerf_report_table(report_text.c_str(), &table) == CLANERF_OK) std::cerr << take(table);
  }
}

// Field selection flags shared by the rendering and estimation commands.
struct FieldOptions {
  std::string scene;
  std::optional<double> hinge;
  int voxels = 0;
  std::string source_manifest;
  std::vector<std::size_t> source_frames;

  void add(CLI::App* app, bool allow_voxels = true) {
    app->add_option("--scene", scene, "Scene JSON or trained checkpoint");
    app->add_option("--hinge", hinge, "Use the built-in hinge opened to this angle (degrees)");
    if (allow_voxels) app->add_option("--voxels", voxels, "Bake the analytic scene to a voxel grid of this size");
    app->add_option("--sources", source_manifest, "Manifest with source views for conditioned checkpoints");
    app->add_option("--source-frames", source_frames, "Source frame indices")->delimiter(',');
  }

  void load(FieldHandle& out) const {
    if (scene.empty() == !hinge.has_value()) throw CLI::ValidationError("exactly one of --scene and --hinge is required");
    if (hinge) {
      check(clanerf_field_hinge(*hinge, &out.ptr));
    } else {
      check(clanerf_field_load(scene.c_str(), &out.ptr));
    }
    if (voxels > 0) {
      FieldHandle baked;
      check(clanerf_field_bake_voxels(out.ptr, voxels, &baked.ptr));
      std::swap(out.ptr, baked.ptr);
    }
    if (!source_manifest.empty()) {
      check(clanerf_field_set_sources(out.ptr, source_manifest.c_str(), source_frames.data(), source_frames.size()));
    }
  }
};

struct CameraOptions {
  std::string camera;
  std::string manifest;
  int frame = 0;

  void add(CLI::App* app) {
    app->add_option("--camera", camera, "Camera JSON file");
    app->add_option("--manifest", manifest, "Take the camera from this dataset manifest");
    app->add_option("--frame", frame, "Frame index within --manifest");
  }

  json spec() const {
    if (camera.empty() == manifest.empty()) throw CLI::ValidationError("exactly one of --camera and --manifest is required");
    if (!camera.empty()) return camera;
    return {{"manifest", manifest}, {"frame", frame}};
  }
};

struct RenderOptions {
  std::optional<int> k_coarse, k_fine;
  std::optional<double> t_near, t_far;

  void add(CLI::App* app) {
    app->add_option("--samples", k_coarse, "Stratified samples per ray");
    app->add_option("--fine-samples", k_fine, "Importance samples per ray");
    app->add_option("--near", t_near, "Near ray bound");
    app->add_option("--far", t_far, "Far ray bound");
  }

  json spec() const {
    json r = json::object();
    if (k_coarse) r["k_coarse"] = *k_coarse;
    if (k_fine) r["k_fine"] = *k_fine;
    if (t_near) r["t_near"] = *t_near;
    if (t_far) r["t_far"] = *t_far;
    return r;
  }
};

std::vector<double> parse_bounds(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw CLI::ValidationError("--bounds expects LO:HI in degrees");
  try {
    return {std::stod(text.substr(0, colon)), std::stod(text.substr(colon + 1))};
  } catch (const std::exception&) {
    throw CLI::ValidationError("--bounds expects LO:HI in degrees");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"clanerf: articulated radiance fields at desk scale"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--threads", common.threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  app.add_option("--report", common.report_path, "Also write the JSON report to this file");
  app.add_flag("--quiet", common.quiet, "Skip the table on stderr");
  std::uint64_t seed = 0;

  // gen-dataset
  auto* gen = app.add_subcommand("gen-dataset", "Render a synthetic dataset from an analytic scene");
  FieldOptions gen_field;
  gen_field.add(gen, false);
  int views = 30, res = 128, gen_samples = 192;
  std::vector<double> articulations;
  std::string out_dir;
  double fov = 50.0, radius_scale = 2.5;
  gen->add_option("--views", views, "Cameras on the sphere")->check(CLI::PositiveNumber);
  gen->add_option("--articulations", articulations, "Joint angles in degrees (default: as the scene is posed)")->delimiter(',');
  gen->add_option("--res", res, "Square image resolution")->check(CLI::PositiveNumber);
  gen->add_option("--fov", fov, "Vertical field of view in degrees");
  gen->add_option("--radius-scale", radius_scale, "Camera distance over the scene bounding radius");
  gen->add_option("--samples", gen_samples, "Samples per ray for the oracle render");
  gen->add_option("--out", out_dir, "Output directory")->required();
  gen->add_option("--seed", seed, "Random seed");

  // train
  auto* tr = app.add_subcommand("train", "Fit a coarse/fine radiance-segmentation network");
  std::vector<std::string> manifests;
  std::string ckpt, log_path, encoder = "pyramid";
  int iterations = 5000, batch = 512, width = 64, depth = 4, k_c = 32, k_f = 32, ckpt_every = 0, levels = 3;
  double lambda = 4e-2, lr = 5e-4, lr_decay = 0.1;
  std::vector<std::size_t> holdout, train_sources;
  std::optional<double> art;
  bool detach = false, conditioned = false;
  tr->add_option("--manifest", manifests, "Dataset manifest (repeat for several instances)")->required();
  tr->add_option("--out", ckpt, "Checkpoint path")->required();
  tr->add_option("--log", log_path, "Training log CSV");
  tr->add_option("--iterations", iterations)->check(CLI::NonNegativeNumber);
  tr->add_option("--batch", batch, "Rays per iteration")->check(CLI::PositiveNumber);
  tr->add_option("--lambda", lambda, "Segmentation loss weight")->check(CLI::NonNegativeNumber);
  tr->add_option("--lr", lr, "Initial learning rate");
  tr->add_option("--lr-decay", lr_decay, "Learning-rate factor reached at the last iteration");
  tr->add_option("--width", width)->check(CLI::PositiveNumber);
  tr->add_option("--depth", depth)->check(CLI::PositiveNumber);
  tr->add_option("--k-coarse", k_c)->check(CLI::PositiveNumber);
  tr->add_option("--k-fine", k_f)->check(CLI::NonNegativeNumber);
  tr->add_option("--holdout", holdout, "Frame indices kept out of training and evaluated")->delimiter(',');
  tr->add_option("--articulation", art, "Train only on frames at this angle (degrees)");
  tr->add_flag("--detach-seg", detach, "Block segmentation gradients");
  tr->add_flag("--conditioned", conditioned, "Condition the network on source-view features");
  tr->add_option("--encoder", encoder, "Feature encoder")->check(CLI::IsMember({"pyramid", "identity"}));
  tr->add_option("--levels", levels, "Pyramid levels")->check(CLI::PositiveNumber);
  tr->add_option("--source-frames", train_sources, "Source frames for conditioning")->delimiter(',');
  tr->add_option("--checkpoint-every", ckpt_every)->check(CLI::NonNegativeNumber);
  tr->add_option("--seed", seed, "Random seed");

  // render / render-articulated
  auto* rd = app.add_subcommand("render", "Render a field from one camera");
  auto* ra = app.add_subcommand("render-articulated", "Render a field at a new articulation");
  FieldOptions rd_field;
  CameraOptions rd_cam;
  RenderOptions rd_opts;
  std::string out_rgb, out_seg, out_alpha, joints_path;
  std::vector<double> pose;
  for (auto* sub : {rd, ra}) {
    rd_field.add(sub);
    rd_cam.add(sub);
    rd_opts.add(sub);
    sub->add_option("--out", out_rgb, "RGB output (.png or .ppm)")->required();
    sub->add_option("--seg", out_seg, "Segmentation output PNG");
    sub->add_option("--alpha", out_alpha, "Opacity output");
    sub->add_option("--seed", seed, "Random seed");
  }
  ra->add_option("--pose", pose, "Joint angles in degrees")->delimiter(',')->required();
  ra->add_option("--joints", joints_path, "Joint attributes JSON (defaults to the scene's joints)");

  // estimate-joint
  auto* ej = app.add_subcommand("estimate-joint", "Recover the joint axis from part boundaries");
  FieldOptions ej_field;
  ej_field.add(ej);
  RenderOptions ej_opts;
  ej_opts.add(ej);
  std::vector<std::string> ej_cameras;
  std::string ej_manifest, ej_out;
  int ring = 4, ring_res = 128;
  double elevation = 45.0;
  std::optional<double> threshold;
  ej->add_option("--camera", ej_cameras, "Camera JSON files (repeatable)");
  ej->add_option("--manifest", ej_manifest, "Use every camera of this manifest");
  ej->add_option("--ring", ring, "Ring camera count when no cameras are given")->check(CLI::PositiveNumber);
  ej->add_option("--elevation", elevation, "Ring elevation in degrees");
  ej->add_option("--res", ring_res, "Ring camera resolution")->check(CLI::PositiveNumber);
  ej->add_option("--threshold", threshold, "Density threshold (default half the max sampled density)");
  ej->add_option("--out", ej_out, "Write the joint as JSON");

  // estimate-pose
  auto* ep = app.add_subcommand("estimate-pose", "Recover the articulation angle of a target image");
  FieldOptions ep_field;
  ep_field.add(ep);
  CameraOptions ep_cam;
  ep_cam.add(ep);
  RenderOptions ep_opts;
  ep_opts.add(ep);
  std::string target, bounds = "0:90", trace, ep_joints;
  int restarts = 4, pose_batch = 1024, max_iters = 100;
  std::vector<double> initial;
  std::optional<double> truth;
  ep->add_option("--target", target, "Target RGB image")->required();
  ep->add_option("--joints", ep_joints, "Joint attributes JSON (defaults to the scene's joints)");
  ep->add_option("--bounds", bounds, "Angle bounds LO:HI in degrees");
  ep->add_option("--restarts", restarts)->check(CLI::PositiveNumber);
  ep->add_option("--init", initial, "Explicit starting angles in degrees")->delimiter(',');
  ep->add_option("--batch", pose_batch, "Rays per iteration")->check(CLI::PositiveNumber);
  ep->add_option("--max-iters", max_iters)->check(CLI::PositiveNumber);
  ep->add_option("--trace", trace, "Optimization trace CSV");
  ep->add_option("--truth", truth, "Ground-truth angle in degrees, reported as a_error");
  ep->add_option("--seed", seed, "Random seed");

  // heatmap
  auto* hm = app.add_subcommand("heatmap", "Pose error over source and target articulations");
  std::string hm_scene, hm_mode = "trained", hm_work, hm_csv, hm_png, hm_camera;
  std::vector<double> sources{0, 30, 60, 90}, targets{0, 30, 60, 90};
  int hm_iters = 1500, hm_views = 30, hm_res = 64, hm_restarts = 4;
  bool reuse = false;
  hm->add_option("--scene", hm_scene, "Scene JSON")->required();
  hm->add_option("--sources", sources, "Source angles in degrees")->delimiter(',');
  hm->add_option("--targets", targets, "Target angles in degrees")->delimiter(',');
  hm->add_option("--mode", hm_mode, "Source fields")->check(CLI::IsMember({"trained", "oracle"}));
  hm->add_option("--work", hm_work, "Directory for per-source datasets and checkpoints");
  hm->add_option("--camera", hm_camera, "Target camera JSON");
  hm->add_option("--iterations", hm_iters, "Training iterations per source")->check(CLI::PositiveNumber);
  hm->add_option("--views", hm_views, "Training views per source")->check(CLI::PositiveNumber);
  hm->add_option("--res", hm_res, "Image resolution")->check(CLI::PositiveNumber);
  hm->add_option("--restarts", hm_restarts)->check(CLI::PositiveNumber);
  hm->add_flag("--reuse", reuse, "Reuse checkpoints already in --work");
  hm->add_option("--csv", hm_csv, "Error matrix CSV");
  hm->add_option("--png", hm_png, "Heatmap image");
  hm->add_option("--seed", seed, "Random seed");

  // eval
  auto* ev = app.add_subcommand("eval", "Image, segmentation and pose metrics");
  std::string pred, truth_img, pred_seg, truth_seg, joint_est, joint_truth;
  int parts = 0;
  std::optional<double> angle_est, angle_truth;
  ev->add_option("--pred", pred, "Predicted RGB image");
  ev->add_option("--truth", truth_img, "Ground-truth RGB image");
  ev->add_option("--pred-seg", pred_seg, "Predicted segmentation PNG");
  ev->add_option("--truth-seg", truth_seg, "Ground-truth segmentation PNG");
  ev->add_option("--parts", parts, "Part count P for segmentation maps");
  ev->add_option("--angle", angle_est, "Estimated angle in degrees");
  ev->add_option("--angle-truth", angle_truth, "True angle in degrees");
  ev->add_option("--joint", joint_est, "Estimated joint JSON");
  ev->add_option("--joint-truth", joint_truth, "True joint JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    check(clanerf_set_threads(common.threads));
    char* report = nullptr;
    if (gen->parsed()) {
      FieldHandle f;
      gen_field.load(f);
      json req = {{"views", views}, {"resolution", res}, {"seed", seed}, {"fov_deg", fov},
                  {"radius_scale", radius_scale}, {"k_coarse", gen_samples}, {"out", out_dir}};
      if (!articulations.empty()) req["articulations_deg"] = articulations;
      check(clanerf_generate_dataset(f.ptr, req.dump().c_str(), &report));
    } else if (tr->parsed()) {
      json req = {{"manifests", manifests}, {"out", ckpt}, {"iterations", iterations}, {"batch", batch},
                  {"lambda", lambda}, {"lr", lr}, {"lr_decay", lr_decay}, {"width", width}, {"depth", depth},
                  {"k_coarse", k_c}, {"k_fine", k_f}, {"detach_seg", detach}, {"conditioned", conditioned},
                  {"encoder", {{"kind", encoder}, {"levels", levels}}}, {"checkpoint_every", ckpt_every},
                  {"seed", seed}};
      if (!log_path.empty()) req["log"] = log_path;
      if (!holdout.empty()) req["holdout"] = holdout;
      if (!train_sources.empty()) req["source_frames"] = train_sources;
      if (art) req["articulation_deg"] = *art;
      check(clanerf_train(req.dump().c_str(), &report));
    } else if (rd->parsed() || ra->parsed()) {
      FieldHandle f;
      rd_field.load(f);
      json req = {{"camera", rd_cam.spec()}, {"render", rd_opts.spec()}, {"seed", seed}};
      if (ra->parsed()) {
        req["pose_deg"] = pose;
        if (!joints_path.empty()) req["joints"] = joints_path;
      }
      clanerf_frame* frame = nullptr;
      check(clanerf_render(f.ptr, req.dump().c_str(), &frame));
      const clanerf_status s = clanerf_frame_save(frame, out_rgb.c_str(), out_seg.empty() ? nullptr : out_seg.c_str(),
                                                  out_alpha.empty() ? nullptr : out_alpha.c_str());
      int w = 0, h = 0;
      clanerf_frame_size(frame, &w, &h);
      clanerf_frame_free(frame);
      check(s);
      json r = {{"rgb", out_rgb}, {"width", w}, {"height", h}};
      if (!out_seg.empty()) r["seg"] = out_seg;
      if (!out_alpha.empty()) r["alpha"] = out_alpha;
      publish(common, r.dump(2));
      return 0;
    } else if (ej->parsed()) {
      FieldHandle f;
      ej_field.load(f);
      json req = {{"render", ej_opts.spec()}};
      if (!ej_cameras.empty() && !ej_manifest.empty()) {
        throw CLI::ValidationError("--camera and --manifest are mutually exclusive");
      }
      if (!ej_cameras.empty()) {
        req["cameras"] = ej_cameras;
      } else if (!ej_manifest.empty()) {
        req["cameras"] = {{"manifest", ej_manifest}};
      } else {
        req["cameras"] = {{"ring", {{"count", ring}, {"elevation_deg", elevation}, {"resolution", ring_res}}}};
      }
      if (threshold) req["threshold"] = *threshold;
      if (!ej_out.empty()) req["out"] = ej_out;
      check(clanerf_estimate_joint(f.ptr, req.dump().c_str(), &report));
    } else if (ep->parsed()) {
      FieldHandle f;
      ep_field.load(f);
      ImageHandle img;
      check(clanerf_image_load(target.c_str(), &img.ptr));
      json req = {{"camera", ep_cam.spec()}, {"render", ep_opts.spec()}, {"bounds_deg", parse_bounds(bounds)},
                  {"restarts", restarts}, {"batch", pose_batch}, {"max_iters", max_iters}, {"seed", seed}};
      if (!ep_joints.empty()) req["joints"] = ep_joints;
      if (!initial.empty()) req["initial_deg"] = initial;
      if (!trace.empty()) req["trace_file"] = trace;
      if (truth) req["truth_deg"] = *truth;
      check(clanerf_estimate_pose(f.ptr, img.ptr, req.dump().c_str(), &report));
    } else if (hm->parsed()) {
      json req = {{"scene", hm_scene}, {"sources_deg", sources}, {"targets_deg", targets}, {"mode", hm_mode},
                  {"resolution", hm_res}, {"seed", seed}, {"reuse", reuse},
                  {"train", {{"iterations", hm_iters}, {"views", hm_views}, {"resolution", hm_res}}},
                  {"pose", {{"restarts", hm_restarts}}}};
      if (!hm_work.empty()) req["work_dir"] = hm_work;
      if (!hm_camera.empty()) req["camera"] = hm_camera;
      if (!hm_csv.empty()) req["out_csv"] = hm_csv;
      if (!hm_png.empty()) req["out_png"] = hm_png;
      check(clanerf_heatmap(req.dump().c_str(), &report));
    } else if (ev->parsed()) {
      json req = json::object();
      if (!pred.empty() || !truth_img.empty()) {
        req["pred"] = pred;
        req["truth"] = truth_img;
      }
      if (!pred_seg.empty() || !truth_seg.empty()) {
        req["pred_seg"] = pred_seg;
        req["truth_seg"] = truth_seg;
        req["parts"] = parts;
      }
      if (angle_est || angle_truth || !joint_est.empty() || !joint_truth.empty()) {
        if (!angle_est || !angle_truth || joint_est.empty() || joint_truth.empty()) {
          throw CLI::ValidationError("pose metrics need --angle, --angle-truth, --joint and --joint-truth");
        }
        req["pose"] = {{"estimate_deg", *angle_est}, {"truth_deg", *angle_truth}, {"estimate_joint", joint_est},
                       {"truth_joint", joint_truth}};
      }
      if (req.empty()) throw CLI::ValidationError("nothing to evaluate; pass --pred/--truth or other inputs");
      check(clanerf_evaluate(req.dump().c_str(), &report));
    }
    publish(common, take(report));
    return 0;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n" << "run with --help for usage\n";
    return kUsageError;
  } catch (const Failure& f) {
    const std::string msg = clanerf_last_error();
    std::cerr << "error: " << clanerf_status_name(f.status) << (msg.empty() ? "" : ": " + msg) << "\n";
    return kRuntimeError;
  }
}
