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

// Acceptance suite: one PASS/FAIL line per criterion with its runtime.
// Usage: clanerf_acceptance --work DIR [--only 1,3,9] [--threads N]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "clanerf/articulation.hpp"
#include "clanerf/error.hpp"
#include "clanerf/joint_estimation.hpp"
#include "clanerf/metrics.hpp"
#include "clanerf/parallel.hpp"
#include "clanerf/pipeline.hpp"
#include "clanerf/pose_estimation.hpp"
#include "clanerf/procedural.hpp"
#include "gradcheck.hpp"
#include "soft_hinge.hpp"

namespace fs = std::filesystem;
using namespace clanerf;
using nlohmann::json;
namespace pl = clanerf::pipeline;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

JointAttributes z_joint() { return JointAttributes{Vec3::UnitZ(), Vec3::Zero(), 2}; }

double image_mse(const Image& a, const Image& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    const double e = double(a.data()[i]) - double(b.data()[i]);
    s += e * e;
  }
  return s / static_cast<double>(a.data().size());
}

struct Context {
  fs::path work;
  std::string cli;
  std::string scenes;
};

Outcome slab_quadrature(Context&) {
  constexpr int kSamples = 4096;
  Outcome o;
  o.pass = true;
  double worst = 0.0;
  for (double sigma : {0.5, 1.0, 3.0}) {
    for (double length : {0.25, 1.0, 2.0}) {
      std::vector<double> t(kSamples);
      for (int k = 0; k < kSamples; ++k) t[k] = length * k / kSamples;
      std::vector<double> dens(kSamples, sigma), rgb(3 * kSamples, 1.0), logits(2 * kSamples, 0.0);
      const PixelResult p = composite(t, length, DenseSamples{2, dens, rgb, logits}, {0, 0, 0});
      worst = std::max(worst, std::abs(p.alpha - (1.0 - std::exp(-sigma * length))));
    }
  }
  // The same slab built from a procedural box and the image renderer.
  Primitive box;
  box.size = Vec3(0.5, 2.0, 2.0);
  box.density = 1.0f;
  const ProceduralScene slab(1, 1, {box}, {});
  RenderConfig rc;
  rc.k_coarse = kSamples;
  rc.t_near = 1.5;
  rc.t_far = 2.5;
  const Camera cam = Camera::look_at(Camera::intrinsics_from_fov(1, 1, 10.0), Vec3(-2.0, 0, 0), Vec3::Zero());
  const RenderOutput r = render_image(slab, cam, rc);
  worst = std::max(worst, std::abs(double(r.alpha.at(0, 0, 0)) - (1.0 - std::exp(-1.0))));
  o.pass = worst < 1e-3;
  o.detail = "max |alpha - (1 - exp(-sigma L))| = " + fmt("%.3g", worst) + " (< 1e-3)";
  return o;
}

Outcome reduction_identity(Context&) {
  const ProceduralScene hinge = ProceduralScene::hinge(37.0);
  const clanerf::testing::SoftHinge soft;
  const std::array<float, 3> bg{0.2f, 0.3f, 0.4f};
  Rng rng = make_rng(2024, 2);
  int mismatches = 0;
  int rays = 0;
  for (const RadianceField* field : {static_cast<const RadianceField*>(&hinge),
                                      static_cast<const RadianceField*>(&soft)}) {
    const ArticulatedPose rest = field->rest_pose();
    const DeformationSet id = build_deformations(rest, rest, {z_joint()}, 2);
    for (int n = 0; n < 5000; ++n, ++rays) {
      const double u = 2 * uniform01(rng) - 1, phi = 2 * kPi * uniform01(rng);
      const Vec3 origin = 2.5 * Vec3(std::sqrt(1 - u * u) * std::cos(phi), u, std::sqrt(1 - u * u) * std::sin(phi));
      const Vec3 aim(uniform01(rng) - 0.3, uniform01(rng) - 0.5, uniform01(rng) - 0.5);
      Ray ray;
      ray.origin = origin;
      ray.direction = (aim - origin).normalized();
      ray.t_near = 1.3;
      ray.t_far = 3.7;
      RenderConfig rc;
      rc.k_coarse = 16 + static_cast<int>(uniform01(rng) * 112);
      rc.jitter = true;
      const std::vector<double> t = sample_stratified(rc, ray, rng);
      std::vector<Vec3> x, d;
      for (double s : t) {
        x.push_back(ray.at(s));
        d.push_back(ray.direction);
      }
      SampleBuffer buf;
      field->evaluate(x, d, nullptr, buf);
      const PixelResult plain = composite(t, ray.t_far, buf, bg);
      const PixelResult art = composite_articulated(*field, ray, t, id, nullptr, bg);
      if (plain.color != art.color || plain.prob != art.prob || plain.alpha != art.alpha) ++mismatches;
    }
  }
  Outcome o;
  o.pass = mismatches == 0;
  o.detail = std::to_string(rays) + " random rays, " + std::to_string(mismatches) + " not bitwise equal";
  return o;
}

Outcome reposed_oracle(Context&) {
  const ProceduralScene rest = ProceduralScene::hinge(0.0);
  const ProceduralScene moved = ProceduralScene::hinge(30.0);
  const Camera cam = Camera::look_at(Camera::intrinsics_from_fov(128, 128, 35.0), Vec3(1.2, 1.4, -2.4),
                                     Vec3(0.2, 0.1, 0.0));
  RenderConfig rc;
  rc.k_coarse = 128;
  rc.t_near = 2.0;
  rc.t_far = 4.4;
  const RenderOutput truth = render_image(moved, cam, rc);
  const RenderOutput posed = render_articulated(rest, cam, {deg_to_rad(30.0)}, {z_joint()}, rc);
  int covered = 0;
  for (float a : truth.alpha.data()) covered += a > 0.5f;
  const double err = image_mse(truth.rgb, posed.rgb);
  Outcome o;
  o.pass = err < 1e-3 && covered > 1000;
  o.detail = "per-pixel MSE " + fmt("%.3g", err) + " (< 1e-3) over 128x128, " + std::to_string(covered) +
             " object pixels";
  return o;
}

std::vector<Camera> joint_ring(double bound, int res) {
  return ring_cameras(4, 45.0, 2.5 * bound, Camera::intrinsics_from_fov(res, res, 50.0));
}

RenderConfig joint_render(double bound) {
  RenderConfig rc;
  rc.k_coarse = 128;
  rc.t_near = 2.5 * bound - 1.05 * bound;
  rc.t_far = 2.5 * bound + 1.05 * bound;
  return rc;
}

Outcome joint_estimation(Context& ctx) {
  Outcome o;
  std::ostringstream d;
  const ProceduralScene open = ProceduralScene::hinge(90.0);
  const double bound = open.bounding_radius();
  const auto cams = joint_ring(bound, 128);
  const JointEstimate oracle = estimate_joint(open, cams, joint_render(bound), std::nullopt);
  const double oracle_deg = rad_to_deg(axis_angle_error(oracle.joint.axis, Vec3::UnitZ()));
  const double oracle_dist = line_distance(oracle.joint.pivot, oracle.joint.axis, Vec3::Zero(), Vec3::UnitZ());
  d << "oracle " << fmt("%.3f", oracle_deg) << " deg (< 2), " << fmt("%.4f", oracle_dist) << " (< 0.02)";
  bool pass = oracle_deg < 2.0 && oracle_dist < 0.02;

  bool ambiguous = false;
  try {
    estimate_joint(ProceduralScene::hinge(0.0), cams, joint_render(bound), std::nullopt);
  } catch (const Error& e) {
    ambiguous = e.code() == ErrorCode::kAmbiguousAxis;
  }
  d << "; closed hinge " << (ambiguous ? "AmbiguousAxis" : "no AmbiguousAxis");
  pass = pass && ambiguous;

  try {
    const fs::path dir = ctx.work / "c4";
    fs::remove_all(dir);
    fs::create_directories(dir);
    pl::generate_dataset(pl::procedural_field(open),
                         {{"views", 30}, {"resolution", 64}, {"seed", 4}, {"out", (dir / "data").string()}});
    pl::train({{"manifest", (dir / "data" / "manifest.json").string()},
               {"out", (dir / "model.ckpt").string()},
               {"iterations", 1000},
               {"seed", 4}});
    const pl::LoadedField learned = pl::load_field((dir / "model.ckpt").string());
    const JointEstimate est = estimate_joint(*learned.field, cams, joint_render(bound), std::nullopt);
    const double learned_deg = rad_to_deg(axis_angle_error(est.joint.axis, Vec3::UnitZ()));
    const double learned_dist = line_distance(est.joint.pivot, est.joint.axis, Vec3::Zero(), Vec3::UnitZ());
    d << "; trained field (1000 iterations) " << fmt("%.3f", learned_deg) << " deg (< 5), line distance "
      << fmt("%.4f", learned_dist);
    pass = pass && learned_deg < 5.0;
  } catch (const Error& e) {
    d << "; trained field failed: " << error_code_name(e.code()) << ": " << e.what();
    pass = false;
  }
  o.pass = pass;
  o.detail = d.str();
  return o;
}

Outcome pose_estimation(Context&) {
  const ProceduralScene rest = ProceduralScene::hinge(0.0);
  PoseProblem p;
  p.field = &rest;
  p.camera = Camera::look_at(Camera::intrinsics_from_fov(64, 64, 40.0), Vec3(1.2, 1.6, -2.2), Vec3(0.1, 0.2, 0.0));
  p.joints = {z_joint()};
  p.render.k_coarse = 64;
  p.render.t_near = 1.8;
  p.render.t_far = 4.2;
  p.opt.a_min = 0.0;
  p.opt.a_max = deg_to_rad(90.0);
  p.opt.restarts = 4;
  p.target = render_image(ProceduralScene::hinge(30.0), p.camera, p.render).rgb;
  const PoseEstimate e = estimate_pose(p);
  const double err = std::abs(rad_to_deg(e.angle) - 30.0);
  Outcome o;
  o.pass = err < 0.5;
  o.detail = "a_hat = " + fmt("%.3f", rad_to_deg(e.angle)) + " deg, |a_hat - 30| = " + fmt("%.3f", err) +
             " deg (< 0.5), 4 restarts";
  return o;
}

Outcome heatmap(Context& ctx) {
  const fs::path dir = ctx.work / "c6";
  fs::create_directories(dir);
  const json req = {{"scene", ctx.scenes + "/hinge.json"},
                    {"mode", "trained"},
                    {"work_dir", dir.string()},
                    {"sources_deg", {0, 30, 60, 90}},
                    {"targets_deg", {0, 30, 60, 90}},
                    {"resolution", 64},
                    {"seed", 6},
                    {"train", {{"iterations", 1500}, {"views", 30}, {"resolution", 64}}},
                    {"render", {{"k_coarse", 32}, {"k_fine", 32}}},
                    {"pose", {{"restarts", 4}, {"batch", 512}, {"bounds_deg", {0, 90}}}},
                    {"out_csv", (dir / "heatmap.csv").string()},
                    {"out_png", (dir / "heatmap.png").string()}};
  const json r = pl::heatmap(req);
  std::ofstream(dir / "report.json") << r.dump(2) << "\n";
  const double diag = r.at("diagonal_mean_deg");
  const double far = r.at("far_mean_deg");
  const bool row_min = r.at("row_min_on_diagonal");
  Outcome o;
  o.pass = row_min && far >= diag;
  std::ostringstream d;
  d << "row minimum on diagonal: " << (row_min ? "yes" : "no") << "; diagonal mean " << fmt("%.3f", diag)
    << " deg, |delta| >= 60 mean " << fmt("%.3f", far) << " deg; matrix " << r.at("errors_deg").dump();
  o.detail = d.str();
  return o;
}

Outcome training_sanity(Context& ctx) {
  const fs::path dir = ctx.work / "c7";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const pl::LoadedField scene = pl::procedural_field(ProceduralScene::hinge(90.0));
  pl::generate_dataset(scene, {{"views", 34}, {"resolution", 64}, {"seed", 7}, {"out", (dir / "data").string()}});
  const std::string manifest = (dir / "data" / "manifest.json").string();
  const std::string checkpoint = (dir / "model.ckpt").string();
  const json r = pl::train({{"manifest", manifest},
                            {"out", checkpoint},
                            {"log", (dir / "train_log.csv").string()},
                            {"iterations", 5000},
                            {"holdout", {30, 31, 32, 33}},
                            {"seed", 7}});
  std::ofstream(dir / "report.json") << r.dump(2) << "\n";

  const pl::LoadedField learned = pl::load_field(checkpoint);
  const SceneManifest m = load_manifest(manifest);
  double train_psnr = 0.0;
  const int train_views = 6;
  for (int f = 0; f < train_views; ++f) {
    Image rgb;
    LabelImage labels;
    load_frame(m, f, rgb, labels);
    RenderConfig rc = pl::render_config(json::object(), learned, m.frames[f].camera);
    rc.t_near = m.t_near;
    rc.t_far = m.t_far;
    train_psnr += image_metrics(render_image(*learned.field, m.frames[f].camera, rc).rgb, rgb).psnr;
  }
  train_psnr /= train_views;
  const double held_psnr = r.at("holdout").at("mean_psnr");
  const double held_miou = r.at("holdout").at("mean_miou");
  Outcome o;
  o.pass = train_psnr > 28.0 && held_psnr > 24.0 && held_miou > 0.90;
  o.detail = "train PSNR " + fmt("%.2f", train_psnr) + " dB (> 28), held-out PSNR " + fmt("%.2f", held_psnr) +
             " dB (> 24), held-out mIoU " + fmt("%.3f", held_miou) + " (> 0.90), 5000 iterations at 64x64";
  return o;
}

Outcome gradient_suite(Context&) {
  const std::vector<std::vector<LayerSpec>> configs = {
      {{5, 4, Activation::kIdentity}},
      {{6, 7, Activation::kRelu}, {7, 5, Activation::kRelu}, {5, 3, Activation::kIdentity}},
      {{4, 6, Activation::kSoftplus}, {6, 2, Activation::kSigmoid}},
      {{3, 5, Activation::kSigmoid}, {5, 5, Activation::kRelu}, {5, 1, Activation::kSoftplus}},
      {{8, 8, Activation::kSoftplus}, {8, 8, Activation::kSigmoid}, {8, 8, Activation::kRelu},
       {8, 4, Activation::kIdentity}},
  };
  double worst = 0.0;
  std::uint64_t seed = 300;
  for (const auto& layers : configs) worst = std::max(worst, clanerf::testing::check_mlp(layers, seed++).max_rel);
  FieldNetConfig net;
  net.depth = 3;
  net.width = 10;
  net.color_width = 6;
  net.pos_bands = 2;
  net.dir_bands = 1;
  worst = std::max(worst, clanerf::testing::check_field_network(net, seed++).max_rel);
  net.feature_dim = 6;
  worst = std::max(worst, clanerf::testing::check_field_network(net, seed++).max_rel);

  const clanerf::testing::SoftHinge field;
  PoseProblem p;
  p.field = &field;
  p.camera = Camera::look_at(Camera::intrinsics_from_fov(64, 64, 40.0), Vec3(1.2, 1.6, -2.2), Vec3(0.1, 0.2, 0.0));
  p.joints = {z_joint()};
  p.render.k_coarse = 64;
  p.render.t_near = 1.8;
  p.render.t_far = 4.2;
  p.target = render_articulated(field, p.camera, {deg_to_rad(30.0)}, p.joints, p.render).rgb;
  const RayBatch all = full_batch(p);
  double worst_ratio = 0.0;
  for (double deg : {5.0, 15.0, 45.0, 60.0, 80.0}) {
    const double g1 = pose_gradient(deg_to_rad(deg), p, all, p.opt.h);
    const double g2 = pose_gradient(deg_to_rad(deg), p, all, 2 * p.opt.h);
    worst_ratio = std::max(worst_ratio, std::abs(g1 - g2) / std::max(std::abs(g1), std::abs(g2)));
  }
  Outcome o;
  o.pass = worst < 1e-4 && worst_ratio < 0.05;
  o.detail = "MLP max rel err " + fmt("%.3g", worst) + " (< 1e-4, 64-bit, 7 configs); pose gradient h vs 2h " +
             fmt("%.3g", worst_ratio) + " (< 0.05)";
  return o;
}

std::string quote(const std::string& s) { return "'" + s + "'"; }

// Runs the CLI pipelines inside `dir`; returns the first failing command or "".
std::string run_pipelines(const Context& ctx, const fs::path& dir) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string cli = quote(ctx.cli) + " --threads 1 --quiet ";
  const std::vector<std::string> steps = {
      "gen-dataset --hinge 0 --views 6 --articulations 0,45 --res 24 --samples 64 --seed 5 --out data > gen.json",
      "train --manifest data/manifest.json --out model.ckpt --log train.csv --iterations 40 --batch 128 --width 32"
      " --depth 2 --k-coarse 16 --k-fine 16 --articulation 0 --holdout 5 --seed 5 > train.json",
      "render --scene model.ckpt --manifest data/manifest.json --frame 2 --samples 16 --fine-samples 16"
      " --out render.png --seg render_seg.png --alpha render_alpha.png --seed 5 > render.json",
      "estimate-joint --hinge 90 --ring 4 --res 48 --samples 96 --out joint.json > joint_report.json",
      "render-articulated --scene model.ckpt --manifest data/manifest.json --frame 2 --pose 45 --joints joint.json"
      " --samples 16 --fine-samples 16 --out posed.png --seg posed_seg.png --seed 5 > posed.json",
      "render --hinge 30 --voxels 48 --manifest data/manifest.json --frame 2 --out voxels.png > voxels.json",
      "estimate-pose --hinge 0 --manifest data/manifest.json --frame 3 --target data/rgb/001_001.png --samples 64"
      " --restarts 2 --batch 256 --max-iters 30 --trace trace.csv --seed 5 > pose.json",
      "heatmap --scene " + quote(ctx.scenes + "/hinge.json") +
          " --mode oracle --sources 0,45 --targets 0,45 --res 24 --restarts 2 --csv hm.csv --png hm.png --seed 5"
          " > hm.json",
      "heatmap --scene " + quote(ctx.scenes + "/hinge.json") +
          " --mode trained --work hm_trained --sources 0,45 --targets 45 --iterations 20 --views 4 --res 16"
          " --restarts 1 --csv hm_trained.csv --seed 5 > hm_trained.json",
      "eval --pred render.png --truth data/rgb/002_000.png --pred-seg render_seg.png --truth-seg data/seg/002_000.png"
      " --parts 2 --angle 44 --angle-truth 45 --joint joint.json --joint-truth joint.json > eval.json",
  };
  for (const auto& s : steps) {
    const std::string cmd = "cd " + quote(dir.string()) + " && " + cli + s + " 2>> stderr.log";
    if (std::system(cmd.c_str()) != 0) return s;
  }
  return "";
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().filename() == "stderr.log") continue;
    std::ifstream in(e.path(), std::ios::binary);
    out[fs::relative(e.path(), dir).string()] =
        std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  return out;
}

Outcome cli_determinism(Context& ctx) {
  Outcome o;
  const fs::path a = ctx.work / "c9" / "run_a";
  const fs::path b = ctx.work / "c9" / "run_b";
  for (const auto& dir : {a, b}) {
    const std::string failed = run_pipelines(ctx, dir);
    if (!failed.empty()) {
      o.detail = "command failed in " + dir.string() + ": " + failed;
      return o;
    }
  }
  const auto sa = snapshot(a);
  const auto sb = snapshot(b);
  std::vector<std::string> differ;
  for (const auto& [name, bytes] : sa) {
    const auto it = sb.find(name);
    if (it == sb.end() || it->second != bytes) differ.push_back(name);
  }
  for (const auto& [name, bytes] : sb) {
    if (!sa.count(name)) differ.push_back(name);
  }
  o.pass = differ.empty() && !sa.empty();
  o.detail = std::to_string(sa.size()) + " output files from 10 CLI runs compared, " + std::to_string(differ.size()) +
             " differ";
  if (!differ.empty()) o.detail += " (first: " + differ.front() + ")";
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome(Context&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"clanerf acceptance suite"};
  std::string work = (fs::temp_directory_path() / "clanerf_acceptance").string();
  std::vector<int> only;
  int threads = 0;
  app.add_option("--work", work, "Scratch directory");
  app.add_option("--only", only, "Criteria to run")->delimiter(',');
  app.add_option("--threads", threads, "Worker threads (0 = all cores)");
  CLI11_PARSE(app, argc, argv);
  set_thread_count(threads);

  Context ctx;
  ctx.work = fs::absolute(work);
  ctx.cli = CLANERF_CLI_PATH;
  ctx.scenes = CLANERF_SCENES_DIR;
  fs::create_directories(ctx.work);

  const std::vector<Criterion> criteria = {
      {1, "slab quadrature", 1.0, slab_quadrature},
      {2, "articulated reduction identity", 10.0, reduction_identity},
      {3, "articulated render vs re-posed oracle", 120.0, reposed_oracle},
      {4, "joint estimation", 300.0, joint_estimation},
      {5, "pose estimation", 120.0, pose_estimation},
      {6, "source x target heatmap", 1800.0, heatmap},
      {7, "training sanity", 1800.0, training_sanity},
      {8, "gradient suite", 60.0, gradient_suite},
      {9, "CLI determinism", 0.0, cli_determinism},
  };
  const std::set<int> selected(only.begin(), only.end());
  std::vector<int> order;
  for (int id = 1; id <= 9; ++id) {
    if (selected.empty() || selected.count(id)) order.push_back(id);
  }

  std::map<int, std::pair<Outcome, double>> results;
  for (int id : order) {
    const Criterion& c = criteria[id - 1];
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run(ctx);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("error: ") + e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    results[id] = {o, seconds};
    std::cerr << "[criterion " << id << " finished in " << fmt("%.1f", seconds) << " s]\n";
  }

  int failures = 0;
  for (const auto& [id, entry] : results) {
    const Criterion& c = criteria[id - 1];
    const auto& [o, seconds] = entry;
    const bool in_budget = c.budget_s <= 0.0 || seconds < c.budget_s;
    const bool pass = o.pass && in_budget;
    failures += !pass;
    std::cout << "criterion " << id << ": " << (pass ? "PASS" : "FAIL") << "  " << c.name << "  " << o.detail
              << "  [" << fmt("%.1f", seconds) << " s";
    if (c.budget_s > 0.0) std::cout << ", budget " << fmt("%.0f", c.budget_s) << " s" << (in_budget ? "" : ", OVER");
    std::cout << "]" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
