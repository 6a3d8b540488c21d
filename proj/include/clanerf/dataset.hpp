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

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "clanerf/image.hpp"
#include "clanerf/joint.hpp"
#include "clanerf/procedural.hpp"
#include "clanerf/renderer.hpp"

namespace clanerf {

struct Frame {
  std::string rgb_path;  // absolute or relative to the working directory
  std::string seg_path;
  ArticulatedPose articulation;  // radians
  Camera camera;
};

/// Posed RGB + part-segmentation frames of one object instance.
struct SceneManifest {
  std::string directory;  // frame paths in the file are relative to this
  Intrinsics intrinsics;
  int parts = 1;
  std::array<float, 3> background{0, 0, 0};
  double t_near = 0.5;
  double t_far = 4.0;
  ArticulatedPose rest;                 // radians
  std::vector<JointAttributes> joints;  // empty when ground truth is unknown
  std::vector<Frame> frames;
  nlohmann::json provenance;
};

/// Parses and validates a manifest; every referenced file must exist. Schema
/// errors name the offending key and I/O errors the path.
SceneManifest load_manifest(const std::string& path);
void save_manifest(const std::string& path, const SceneManifest& manifest);

/// Loads frame i, checking sizes against the intrinsics and labels against P.
void load_frame(const SceneManifest& manifest, std::size_t i, Image& rgb, LabelImage& labels);

/// Joint list from JSON: {"joints": [...]}, a bare array, or one joint object.
/// Entries hold "axis", "pivot" and optionally "child" (default 2).
std::vector<JointAttributes> joints_from_json(const nlohmann::json& j, const std::string& where);
nlohmann::json joints_to_json(const std::vector<JointAttributes>& joints);
std::vector<JointAttributes> load_joints(const std::string& path);

struct DatasetConfig {
  int views = 30;
  std::vector<double> articulations_deg;  // empty: the scene as posed
  int resolution = 128;
  std::uint64_t seed = 0;
  double fov_deg = 50.0;
  double radius_scale = 2.5;  // camera distance over the object's bounding radius
  int k_coarse = 192;
};

/// Cameras uniformly distributed on a sphere about the origin, looking at it.
std::vector<Camera> sphere_cameras(int count, double radius, const Intrinsics& intrinsics, std::uint64_t seed);

/// `count` cameras on a horizontal ring at the given elevation, azimuths
/// offset_deg + i * 360 / count, all looking at the origin.
std::vector<Camera> ring_cameras(int count, double elevation_deg, double radius, const Intrinsics& intrinsics,
                                 double offset_deg = 45.0);

/// Camera file: {"intrinsics": {fx, fy, cx, cy, width, height},
/// "world_to_camera": 16 numbers, row-major}.
Camera camera_from_json(const nlohmann::json& j, const std::string& where);
nlohmann::json camera_to_json(const Camera& camera);

/// Renders every (view, articulation) pair of the scene with the analytic
/// field and writes manifest.json, rgb/NNN_AAA.png and seg/NNN_AAA.png under
/// `out_dir` (NNN view index, AAA articulation index).
SceneManifest generate_dataset(const ProceduralScene& scene, const DatasetConfig& config, const std::string& out_dir);

}  // namespace clanerf
