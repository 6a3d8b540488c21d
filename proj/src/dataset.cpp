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

#include "clanerf/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "clanerf/error.hpp"
#include "json_util.hpp"

namespace clanerf {

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace json_util;

namespace {

constexpr const char* kConvention = "pinhole; camera +x right, +y down, +z forward; world_to_camera row-major 4x4";

std::string resolve(const std::string& dir, const std::string& rel) {
  const fs::path p(rel);
  return p.is_absolute() ? rel : (fs::path(dir) / p).lexically_normal().string();
}

json matrix_json(const Mat4& m) {
  json a = json::array();
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) a.push_back(m(r, c));
  }
  return a;
}

ArticulatedPose degrees_to_pose(const json& v, const std::string& what) {
  ArticulatedPose a;
  for (double d : json_util::numbers(v, 0, what)) a.push_back(deg_to_rad(d));
  return a;
}

json pose_to_degrees(const ArticulatedPose& a) {
  json out = json::array();
  for (double r : a) out.push_back(rad_to_deg(r));
  return out;
}

}  // namespace

std::vector<JointAttributes> joints_from_json(const json& j, const std::string& where) {
  using namespace json_util;
  const json* list = &j;
  json single;
  if (j.is_object() && j.contains("joints")) {
    list = &j.at("joints");
  } else if (j.is_object()) {
    single = json::array({j});
    list = &single;
  }
  if (!list->is_array()) fail(ErrorCode::kSchema, where + ": \"joints\" must be an array");
  std::vector<JointAttributes> out;
  for (std::size_t i = 0; i < list->size(); ++i) {
    const std::string w = where + ".joints[" + std::to_string(i) + "]";
    const json& e = (*list)[i];
    JointAttributes jt;
    jt.axis = vec3(e, "axis", w);
    jt.pivot = vec3(e, "pivot", w);
    jt.child_part = e.contains("child") ? integer(e, "child", w) : 2;
    try {
      jt = normalized_joint(jt);
    } catch (const Error& err) {
      fail(ErrorCode::kSchema, w + ": " + err.what());
    }
    out.push_back(jt);
  }
  return out;
}

json joints_to_json(const std::vector<JointAttributes>& joints) {
  json out = json::array();
  for (const auto& jt : joints) {
    out.push_back({{"axis", json_util::to_array(jt.axis)},
                   {"pivot", json_util::to_array(jt.pivot)},
                   {"child", jt.child_part}});
  }
  return out;
}

std::vector<JointAttributes> load_joints(const std::string& path) {
  return joints_from_json(json_util::read_file(path), path);
}

SceneManifest load_manifest(const std::string& path) {
  using namespace json_util;
  const json j = read_file(path);
  const std::string where = path;
  SceneManifest m;
  m.directory = fs::path(path).parent_path().string();
  if (m.directory.empty()) m.directory = ".";
  if (j.contains("convention") && !j.at("convention").is_string()) {
    fail(ErrorCode::kSchema, where + ": \"convention\" must be a string");
  }
  const json& ji = need(j, "intrinsics", where);
  const std::string wi = where + ": intrinsics";
  m.intrinsics.fx = number(ji, "fx", wi);
  m.intrinsics.fy = number(ji, "fy", wi);
  m.intrinsics.cx = number(ji, "cx", wi);
  m.intrinsics.cy = number(ji, "cy", wi);
  m.intrinsics.width = integer(ji, "width", wi);
  m.intrinsics.height = integer(ji, "height", wi);
  m.parts = integer(j, "parts", where);
  if (m.parts < 1) fail(ErrorCode::kSchema, where + ": \"parts\" must be at least 1");
  if (j.contains("background")) m.background = rgb(j, "background", where);
  m.t_near = number(j, "near", where);
  m.t_far = number(j, "far", where);
  if (!(m.t_near >= 0.0 && m.t_far > m.t_near)) fail(ErrorCode::kSchema, where + ": need 0 <= near < far");
  if (j.contains("joints")) m.joints = joints_from_json(j.at("joints"), where);
  if (j.contains("rest_articulation_deg")) {
    m.rest = degrees_to_pose(j.at("rest_articulation_deg"), where + ": \"rest_articulation_deg\"");
  }
  if (j.contains("provenance")) m.provenance = j.at("provenance");
  const json& jf = need(j, "frames", where);
  if (!jf.is_array() || jf.empty()) fail(ErrorCode::kSchema, where + ": \"frames\" must be a nonempty array");
  for (std::size_t i = 0; i < jf.size(); ++i) {
    const std::string w = where + ": frames[" + std::to_string(i) + "]";
    const json& e = jf[i];
    Frame f;
    f.rgb_path = resolve(m.directory, string(e, "rgb", w));
    f.seg_path = resolve(m.directory, string(e, "seg", w));
    for (const auto& p : {f.rgb_path, f.seg_path}) {
      if (!fs::exists(p)) fail(ErrorCode::kIo, w + ": missing file " + p);
    }
    if (e.contains("articulation_deg")) {
      f.articulation = degrees_to_pose(e.at("articulation_deg"), w + ": \"articulation_deg\"");
    }
    const auto mv = numbers(need(e, "world_to_camera", w), 16, w + ": \"world_to_camera\"");
    Mat4 mat;
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) mat(r, c) = mv[4 * r + c];
    }
    try {
      f.camera = Camera(m.intrinsics, RigidTransform::from_matrix(mat));
    } catch (const Error& err) {
      fail(ErrorCode::kSchema, w + ": " + err.what());
    }
    m.frames.push_back(std::move(f));
  }
  if (!m.joints.empty() && m.rest.empty()) m.rest.assign(m.joints.size(), 0.0);
  return m;
}

void save_manifest(const std::string& path, const SceneManifest& m) {
  json j;
  j["convention"] = kConvention;
  j["intrinsics"] = {{"fx", m.intrinsics.fx},       {"fy", m.intrinsics.fy},
                     {"cx", m.intrinsics.cx},       {"cy", m.intrinsics.cy},
                     {"width", m.intrinsics.width}, {"height", m.intrinsics.height}};
  j["parts"] = m.parts;
  j["background"] = json_util::to_array(m.background);
  j["near"] = m.t_near;
  j["far"] = m.t_far;
  j["rest_articulation_deg"] = pose_to_degrees(m.rest);
  j["joints"] = joints_to_json(m.joints);
  const fs::path base = fs::path(path).parent_path();
  json frames = json::array();
  for (const Frame& f : m.frames) {
    frames.push_back({{"rgb", fs::path(f.rgb_path).lexically_relative(base).generic_string()},
                      {"seg", fs::path(f.seg_path).lexically_relative(base).generic_string()},
                      {"articulation_deg", pose_to_degrees(f.articulation)},
                      {"world_to_camera", matrix_json(f.camera.world_to_camera().matrix())}});
  }
  j["frames"] = frames;
  if (!m.provenance.is_null()) j["provenance"] = m.provenance;
  json_util::write_file(path, j);
}

void load_frame(const SceneManifest& m, std::size_t i, Image& rgb, LabelImage& labels) {
  if (i >= m.frames.size()) fail(ErrorCode::kInvalidArgument, "frame index out of range");
  const Frame& f = m.frames[i];
  rgb = load_image(f.rgb_path);
  labels = load_label_image(f.seg_path);
  if (rgb.width() != m.intrinsics.width || rgb.height() != m.intrinsics.height || rgb.channels() < 3) {
    fail(ErrorCode::kSchema, f.rgb_path + ": image size does not match the manifest intrinsics");
  }
  if (rgb.channels() > 3) {
    Image three(rgb.width(), rgb.height(), 3);
    for (int y = 0; y < rgb.height(); ++y)
      for (int x = 0; x < rgb.width(); ++x)
        for (int c = 0; c < 3; ++c) three.at(x, y, c) = rgb.at(x, y, c);
    rgb = std::move(three);
  }
  if (labels.width != m.intrinsics.width || labels.height != m.intrinsics.height) {
    fail(ErrorCode::kSchema, f.seg_path + ": segmentation size does not match the manifest intrinsics");
  }
  validate_labels(labels, m.parts, f.seg_path);
}

std::vector<Camera> sphere_cameras(int count, double radius, const Intrinsics& intrinsics, std::uint64_t seed) {
  if (count < 1) fail(ErrorCode::kInvalidArgument, "need at least one view");
  if (!(radius > 0.0)) fail(ErrorCode::kInvalidArgument, "camera radius must be positive");
  std::vector<Camera> out;
  Rng rng = make_rng(seed, 0xca3e7a);
  for (int i = 0; i < count; ++i) {
    const double z = 2.0 * uniform01(rng) - 1.0;
    const double phi = 2.0 * kPi * uniform01(rng);
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    const Vec3 dir(s * std::cos(phi), s * std::sin(phi), z);
    out.push_back(Camera::look_at(intrinsics, radius * dir, Vec3::Zero()));
  }
  return out;
}

std::vector<Camera> ring_cameras(int count, double elevation_deg, double radius, const Intrinsics& intrinsics,
                                 double offset_deg) {
  if (count < 1) fail(ErrorCode::kInvalidArgument, "need at least one camera");
  if (!(radius > 0.0)) fail(ErrorCode::kInvalidArgument, "camera radius must be positive");
  const double el = deg_to_rad(elevation_deg);
  std::vector<Camera> out;
  for (int i = 0; i < count; ++i) {
    const double az = deg_to_rad(offset_deg + 360.0 * i / count);
    const Vec3 eye = radius * Vec3(std::cos(el) * std::cos(az), std::sin(el), std::cos(el) * std::sin(az));
    out.push_back(Camera::look_at(intrinsics, eye, Vec3::Zero()));
  }
  return out;
}

Camera camera_from_json(const json& j, const std::string& where) {
  const json& ji = need(j, "intrinsics", where);
  const std::string wi = where + ": intrinsics";
  Intrinsics k;
  k.fx = number(ji, "fx", wi);
  k.fy = number(ji, "fy", wi);
  k.cx = number(ji, "cx", wi);
  k.cy = number(ji, "cy", wi);
  k.width = integer(ji, "width", wi);
  k.height = integer(ji, "height", wi);
  if (k.width < 1 || k.height < 1 || !(k.fx > 0.0) || !(k.fy > 0.0)) {
    fail(ErrorCode::kSchema, wi + ": need positive size and focal lengths");
  }
  const auto mv = numbers(need(j, "world_to_camera", where), 16, where + ": \"world_to_camera\"");
  Mat4 mat;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) mat(r, c) = mv[4 * r + c];
  try {
    return Camera(k, RigidTransform::from_matrix(mat));
  } catch (const Error& e) {
    fail(ErrorCode::kSchema, where + ": \"world_to_camera\": " + e.what());
  }
}

json camera_to_json(const Camera& camera) {
  const Intrinsics& k = camera.intrinsics();
  return {{"intrinsics",
           {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}, {"width", k.width}, {"height", k.height}}},
          {"world_to_camera", matrix_json(camera.world_to_camera().matrix())}};
}

SceneManifest generate_dataset(const ProceduralScene& scene, const DatasetConfig& config, const std::string& out_dir) {
  if (config.views < 1) fail(ErrorCode::kInvalidArgument, "need at least one view");
  if (config.resolution < 1) fail(ErrorCode::kInvalidArgument, "resolution must be positive");
  if (scene.joints().size() != 1 && config.articulations_deg.size() > 1) {
    fail(ErrorCode::kInvalidArgument, "articulation lists need a single-joint scene");
  }
  std::vector<ProceduralScene> posed;
  double bound = 0.0;
  for (double deg : config.articulations_deg) {
    ArticulatedPose a(scene.joints().size(), deg_to_rad(deg));
    posed.push_back(scene.posed(a));
    bound = std::max(bound, posed.back().bounding_radius());
  }
  if (posed.empty()) {
    posed.push_back(scene);
    bound = scene.bounding_radius();
  }
  if (!(bound > 0.0)) bound = 1.0;
  const double radius = config.radius_scale * bound;
  const Intrinsics k = Camera::intrinsics_from_fov(config.resolution, config.resolution, config.fov_deg);
  const std::vector<Camera> cams = sphere_cameras(config.views, radius, k, config.seed);

  SceneManifest m;
  m.directory = out_dir;
  m.intrinsics = k;
  m.parts = scene.part_count();
  m.background = scene.background();
  m.t_near = std::max(1e-3, radius - 1.05 * bound);
  m.t_far = radius + 1.05 * bound;
  m.rest = posed.front().angles();
  m.joints = scene.joints();

  RenderConfig rc;
  rc.k_coarse = config.k_coarse;
  rc.t_near = m.t_near;
  rc.t_far = m.t_far;
  rc.background = scene.background();
  rc.seed = config.seed;

  fs::create_directories(fs::path(out_dir) / "rgb");
  fs::create_directories(fs::path(out_dir) / "seg");
  for (int v = 0; v < config.views; ++v) {
    for (std::size_t a = 0; a < posed.size(); ++a) {
      char name[64];
      std::snprintf(name, sizeof(name), "%03d_%03zu.png", v, a);
      Frame f;
      f.rgb_path = (fs::path(out_dir) / "rgb" / name).string();
      f.seg_path = (fs::path(out_dir) / "seg" / name).string();
      f.articulation = posed[a].angles();
      f.camera = cams[v];
      const RenderOutput r = render_image(posed[a], cams[v], rc);
      save_image(f.rgb_path, r.rgb);
      save_label_image(f.seg_path, r.labels);
      m.frames.push_back(std::move(f));
    }
  }
  json deg = json::array();
  for (const auto& p : posed) deg.push_back(pose_to_degrees(p.angles()));
  m.provenance = {{"generator", "clanerf procedural oracle"},
                  {"scene", scene.to_json()},
                  {"seed", config.seed},
                  {"views", config.views},
                  {"articulations_deg", deg},
                  {"resolution", config.resolution},
                  {"fov_deg", config.fov_deg},
                  {"radius_scale", config.radius_scale},
                  {"k_coarse", config.k_coarse}};
  save_manifest((fs::path(out_dir) / "manifest.json").string(), m);
  return m;
}

}  // namespace clanerf
