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
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "clanerf/conditioning.hpp"
#include "clanerf/dataset.hpp"
#include "clanerf/field.hpp"
#include "clanerf/joint.hpp"
#include "clanerf/mlp_field.hpp"
#include "clanerf/procedural.hpp"
#include "clanerf/renderer.hpp"
#include "clanerf/training.hpp"

// Request-driven pipelines shared by the C API and the command-line tool.
// Requests and reports are JSON objects; angles in them are degrees.
namespace clanerf::pipeline {

using nlohmann::json;

/// A field together with everything needed to render it sensibly.
struct LoadedField {
  std::shared_ptr<const RadianceField> field;
  std::shared_ptr<const ProceduralScene> scene;  // analytic scenes only
  std::shared_ptr<const FieldModel> model;       // learned fields only
  std::shared_ptr<const Conditioner> cond;
  std::vector<JointAttributes> joints;  // ground truth when the source knows it
  double bound_radius = 1.0;
  std::array<float, 3> background{0.0f, 0.0f, 0.0f};
};

/// Scene JSON or checkpoint, told apart by the checkpoint magic.
LoadedField load_field(const std::string& path);
LoadedField procedural_field(ProceduralScene scene);
LoadedField learned_field(std::shared_ptr<const FieldModel> model);
LoadedField voxel_field(const LoadedField& source, int resolution);
void attach_conditioning(LoadedField& field, const std::string& manifest_path, const std::vector<std::size_t>& frames);

/// A camera file path, an inline camera object, or {"manifest": path, "frame": i}.
Camera camera_spec(const json& spec, const std::string& where);
/// A list of camera specs, {"manifest": path, "frames": [...]}, or
/// {"ring": {"count", "elevation_deg", "radius", "resolution", "fov_deg", "offset_deg"}}.
std::vector<Camera> camera_list(const json& spec, const LoadedField& field);
/// Renderer settings from request["render"]; near/far default to the span of
/// the field's bounding sphere seen from `camera`.
RenderConfig render_config(const json& request, const LoadedField& field, const Camera& camera);
std::vector<JointAttributes> joints_spec(const json& request, const LoadedField& field);

RenderOutput render(const LoadedField& field, const json& request);
json render_and_save(const LoadedField& field, const json& request);
json estimate_joint(const LoadedField& field, const json& request);
json estimate_pose(const LoadedField& field, const Image& target, const json& request);
json heatmap(const json& request);
json generate_dataset(const LoadedField& scene, const json& request);
TrainConfig train_config(const json& request);
json train(const json& request);
json evaluate(const json& request);

/// Report formatting for terminals: one "key value" line per scalar entry.
std::string table(const json& report);

}  // namespace clanerf::pipeline
