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

/* C interface to clanerf. All handles are opaque; every call that can fail
 * returns a clanerf_status and leaves a thread-local message readable through
 * clanerf_last_error(). Requests and reports are UTF-8 JSON strings; angles in
 * them are degrees. Strings returned through char** outputs must be released
 * with clanerf_string_free(). */
#ifndef CLANERF_CLANERF_H_
#define CLANERF_CLANERF_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CLANERF_API __declspec(dllexport)
#else
#define CLANERF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum clanerf_status {
  CLANERF_OK = 0,
  CLANERF_INVALID_ARGUMENT = 1,
  CLANERF_DOMAIN = 2,
  CLANERF_CONTRACT = 3,
  CLANERF_IO = 4,
  CLANERF_SCHEMA = 5,
  CLANERF_NO_BOUNDARY = 6,
  CLANERF_AMBIGUOUS_AXIS = 7,
  CLANERF_DEGENERATE = 8,
  CLANERF_NUMERIC = 9,
  CLANERF_INTERNAL = 100
} clanerf_status;

typedef struct clanerf_field clanerf_field;
typedef struct clanerf_image clanerf_image;
typedef struct clanerf_frame clanerf_frame;

CLANERF_API const char* clanerf_version(void);
CLANERF_API const char* clanerf_status_name(clanerf_status status);
/* Message of the last failed call on this thread; empty after success. */
CLANERF_API const char* clanerf_last_error(void);
/* Worker thread cap for all later calls; 0 restores hardware concurrency. */
CLANERF_API clanerf_status clanerf_set_threads(int threads);
CLANERF_API void clanerf_string_free(char* text);

/* Fields: scene JSON or checkpoint file, the built-in two-plate hinge, or a
 * voxel grid baked from an analytic scene. */
CLANERF_API clanerf_status clanerf_field_load(const char* path, clanerf_field** out);
CLANERF_API clanerf_status clanerf_field_hinge(double opening_deg, clanerf_field** out);
CLANERF_API clanerf_status clanerf_field_bake_voxels(const clanerf_field* scene, int resolution,
                                                     clanerf_field** out);
CLANERF_API clanerf_status clanerf_field_part_count(const clanerf_field* field, int* parts);
/* Source views for conditioned checkpoints. */
CLANERF_API clanerf_status clanerf_field_set_sources(clanerf_field* field, const char* manifest_path,
                                                     const size_t* frames, size_t frame_count);
CLANERF_API void clanerf_field_free(clanerf_field* field);

/* Float images with interleaved channels, values in [0, 1]. */
CLANERF_API clanerf_status clanerf_image_load(const char* path, clanerf_image** out);
CLANERF_API clanerf_status clanerf_image_create(int width, int height, int channels, const float* data,
                                                clanerf_image** out);
CLANERF_API clanerf_status clanerf_image_save(const clanerf_image* image, const char* path);
CLANERF_API clanerf_status clanerf_image_size(const clanerf_image* image, int* width, int* height, int* channels);
CLANERF_API const float* clanerf_image_data(const clanerf_image* image);
CLANERF_API void clanerf_image_free(clanerf_image* image);

/* Rendering. The request holds "camera" and optional "render" settings; with
 * "pose_deg" (and "joints" for learned fields) the articulated renderer runs. */
CLANERF_API clanerf_status clanerf_render(const clanerf_field* field, const char* request_json, clanerf_frame** out);
CLANERF_API clanerf_status clanerf_frame_size(const clanerf_frame* frame, int* width, int* height);
CLANERF_API const float* clanerf_frame_rgb(const clanerf_frame* frame);
/* Label map: 0 background, p for part p. */
CLANERF_API const uint8_t* clanerf_frame_labels(const clanerf_frame* frame);
CLANERF_API const float* clanerf_frame_alpha(const clanerf_frame* frame);
/* Any path may be NULL to skip that output. */
CLANERF_API clanerf_status clanerf_frame_save(const clanerf_frame* frame, const char* rgb_path, const char* seg_path,
                                              const char* alpha_path);
CLANERF_API void clanerf_frame_free(clanerf_frame* frame);

/* Pipelines returning JSON reports. */
CLANERF_API clanerf_status clanerf_estimate_joint(const clanerf_field* field, const char* request_json,
                                                  char** report_json);
CLANERF_API clanerf_status clanerf_estimate_pose(const clanerf_field* field, const clanerf_image* target,
                                                 const char* request_json, char** report_json);
CLANERF_API clanerf_status clanerf_heatmap(const char* request_json, char** report_json);
CLANERF_API clanerf_status clanerf_generate_dataset(const clanerf_field* scene, const char* request_json,
                                                    char** report_json);
CLANERF_API clanerf_status clanerf_train(const char* request_json, char** report_json);
CLANERF_API clanerf_status clanerf_evaluate(const char* request_json, char** report_json);
/* Renders a report as aligned "key value" lines. */
CLANERF_API clanerf_status clanerf_report_table(const char* report_json, char** table);

#ifdef __cplusplus
}
#endif

#endif /* CLANERF_CLANERF_H_ */
