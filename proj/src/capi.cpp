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

#include "clanerf/clanerf.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "clanerf/error.hpp"
#include "clanerf/image.hpp"
#include "clanerf/parallel.hpp"
#include "clanerf/pipeline.hpp"

struct clanerf_field {
  clanerf::pipeline::LoadedField value;
};

struct clanerf_image {
  clanerf::Image value;
};

struct clanerf_frame {
  clanerf::RenderOutput value;
};

namespace {

thread_local std::string g_last_error;

clanerf_status status_of(clanerf::ErrorCode code) {
  switch (code) {
    case clanerf::ErrorCode::kInvalidArgument: return CLANERF_INVALID_ARGUMENT;
    case clanerf::ErrorCode::kDomain: return CLANERF_DOMAIN;
    case clanerf::ErrorCode::kContract: return CLANERF_CONTRACT;
    case clanerf::ErrorCode::kIo: return CLANERF_IO;
    case clanerf::ErrorCode::kSchema: return CLANERF_SCHEMA;
    case clanerf::ErrorCode::kNoBoundary: return CLANERF_NO_BOUNDARY;
    case clanerf::ErrorCode::kAmbiguousAxis: return CLANERF_AMBIGUOUS_AXIS;
    case clanerf::ErrorCode::kDegenerate: return CLANERF_DEGENERATE;
    case clanerf::ErrorCode::kNumeric: return CLANERF_NUMERIC;
  }
  return CLANERF_INTERNAL;
}

template <typename Fn>
clanerf_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return CLANERF_OK;
  } catch (const clanerf::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const nlohmann::json::exception& e) {
    g_last_error = std::string("malformed request: ") + e.what();
    return CLANERF_SCHEMA;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return CLANERF_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CLANERF_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return CLANERF_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) clanerf::fail(clanerf::ErrorCode::kInvalidArgument, std::string(what) + " must not be null");
}

nlohmann::json parse(const char* text) {
  if (!text || !*text) return nlohmann::json::object();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    clanerf::fail(clanerf::ErrorCode::kSchema, std::string("request is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) clanerf::fail(clanerf::ErrorCode::kSchema, "request must be a JSON object");
  return j;
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void emit(const nlohmann::json& report, char** out) { *out = dup(report.dump(2)); }

}  // namespace

extern "C" {

const char* clanerf_version(void) { return "1.0.0"; }

const char* clanerf_status_name(clanerf_status status) {
  switch (status) {
    case CLANERF_OK: return "OK";
    case CLANERF_INTERNAL: return "Internal";
    default: return clanerf::error_code_name(static_cast<clanerf::ErrorCode>(status));
  }
}

const char* clanerf_last_error(void) { return g_last_error.c_str(); }

clanerf_status clanerf_set_threads(int threads) {
  return guarded([&] {
    if (threads < 0) clanerf::fail(clanerf::ErrorCode::kInvalidArgument, "thread count must be nonnegative");
    clanerf::set_thread_count(threads);
  });
}

void clanerf_string_free(char* text) { std::free(text); }

clanerf_status clanerf_field_load(const char* path, clanerf_field** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new clanerf_field{clanerf::pipeline::load_field(path)};
  });
}

clanerf_status clanerf_field_hinge(double opening_deg, clanerf_field** out) {
  return guarded([&] {
    need(out, "out");
    *out = new clanerf_field{clanerf::pipeline::procedural_field(clanerf::ProceduralScene::hinge(opening_deg))};
  });
}

clanerf_status clanerf_field_bake_voxels(const clanerf_field* scene, int resolution, clanerf_field** out) {
  return guarded([&] {
    need(scene, "scene");
    need(out, "out");
    *out = new clanerf_field{clanerf::pipeline::voxel_field(scene->value, resolution)};
  });
}

clanerf_status clanerf_field_part_count(const clanerf_field* field, int* parts) {
  return guarded([&] {
    need(field, "field");
    need(parts, "parts");
    *parts = field->value.field->part_count();
  });
}

clanerf_status clanerf_field_set_sources(clanerf_field* field, const char* manifest_path, const size_t* frames,
                                         size_t frame_count) {
  return guarded([&] {
    need(field, "field");
    need(manifest_path, "manifest_path");
    if (frame_count > 0) need(frames, "frames");
    clanerf::pipeline::attach_conditioning(field->value, manifest_path,
                                           std::vector<std::size_t>(frames, frames + frame_count));
  });
}

void clanerf_field_free(clanerf_field* field) { delete field; }

clanerf_status clanerf_image_load(const char* path, clanerf_image** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new clanerf_image{clanerf::load_image(path)};
  });
}

clanerf_status clanerf_image_create(int width, int height, int channels, const float* data, clanerf_image** out) {
  return guarded([&] {
    need(data, "data");
    need(out, "out");
    if (width < 1 || height < 1 || channels < 1 || channels > 4) {
      clanerf::fail(clanerf::ErrorCode::kInvalidArgument, "image needs positive size and 1 to 4 channels");
    }
    clanerf::Image img(width, height, channels);
    std::memcpy(img.data().data(), data, img.data().size() * sizeof(float));
    *out = new clanerf_image{std::move(img)};
  });
}

clanerf_status clanerf_image_save(const clanerf_image* image, const char* path) {
  return guarded([&] {
    need(image, "image");
    need(path, "path");
    clanerf::save_image(path, image->value);
  });
}

clanerf_status clanerf_image_size(const clanerf_image* image, int* width, int* height, int* channels) {
  return guarded([&] {
    need(image, "image");
    if (width) *width = image->value.width();
    if (height) *height = image->value.height();
    if (channels) *channels = image->value.channels();
  });
}

const float* clanerf_image_data(const clanerf_image* image) {
  return image ? image->value.data().data() : nullptr;
}

void clanerf_image_free(clanerf_image* image) { delete image; }

clanerf_status clanerf_render(const clanerf_field* field, const char* request_json, clanerf_frame** out) {
  return guarded([&] {
    need(field, "field");
    need(out, "out");
    *out = new clanerf_frame{clanerf::pipeline::render(field->value, parse(request_json))};
  });
}

clanerf_status clanerf_frame_size(const clanerf_frame* frame, int* width, int* height) {
  return guarded([&] {
    need(frame, "frame");
    if (width) *width = frame->value.rgb.width();
    if (height) *height = frame->value.rgb.height();
  });
}

const float* clanerf_frame_rgb(const clanerf_frame* frame) {
  return frame ? frame->value.rgb.data().data() : nullptr;
}

const uint8_t* clanerf_frame_labels(const clanerf_frame* frame) {
  return frame ? frame->value.labels.labels.data() : nullptr;
}

const float* clanerf_frame_alpha(const clanerf_frame* frame) {
  return frame ? frame->value.alpha.data().data() : nullptr;
}

clanerf_status clanerf_frame_save(const clanerf_frame* frame, const char* rgb_path, const char* seg_path,
                                  const char* alpha_path) {
  return guarded([&] {
    need(frame, "frame");
    if (rgb_path) clanerf::save_image(rgb_path, frame->value.rgb);
    if (seg_path) clanerf::save_label_image(seg_path, frame->value.labels);
    if (alpha_path) clanerf::save_image(alpha_path, frame->value.alpha);
  });
}

void clanerf_frame_free(clanerf_frame* frame) { delete frame; }

clanerf_status clanerf_estimate_joint(const clanerf_field* field, const char* request_json, char** report_json) {
  return guarded([&] {
    need(field, "field");
    need(report_json, "report_json");
    emit(clanerf::pipeline::estimate_joint(field->value, parse(request_json)), report_json);
  });
}

clanerf_status clanerf_estimate_pose(const clanerf_field* field, const clanerf_image* target,
                                     const char* request_json, char** report_json) {
  return guarded([&] {
    need(field, "field");
    need(target, "target");
    need(report_json, "report_json");
    emit(clanerf::pipeline::estimate_pose(field->value, target->value, parse(request_json)), report_json);
  });
}

clanerf_status clanerf_heatmap(const char* request_json, char** report_json) {
  return guarded([&] {
    need(report_json, "report_json");
    emit(clanerf::pipeline::heatmap(parse(request_json)), report_json);
  });
}

clanerf_status clanerf_generate_dataset(const clanerf_field* scene, const char* request_json, char** report_json) {
  return guarded([&] {
    need(scene, "scene");
    need(report_json, "report_json");
    emit(clanerf::pipeline::generate_dataset(scene->value, parse(request_json)), report_json);
  });
}

clanerf_status clanerf_train(const char* request_json, char** report_json) {
  return guarded([&] {
    need(report_json, "report_json");
    emit(clanerf::pipeline::train(parse(request_json)), report_json);
  });
}

clanerf_status clanerf_evaluate(const char* request_json, char** report_json) {
  return guarded([&] {
    need(report_json, "report_json");
    emit(clanerf::pipeline::evaluate(parse(request_json)), report_json);
  });
}

clanerf_status clanerf_report_table(const char* report_json, char** table) {
  return guarded([&] {
    need(table, "table");
    *table = dup(clanerf::pipeline::table(parse(report_json)));
  });
}

}  // extern "C"
