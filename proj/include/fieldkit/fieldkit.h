#ifndef FIELDKIT_FIELDKIT_H
#define FIELDKIT_FIELDKIT_H

/*
 * C interface to the fieldkit library.
 *
 * Every call returns an fk_status. On failure fk_last_error() holds a message
 * for the calling thread until its next failing call. Strings returned
 * through char** are owned by the caller and released with fk_string_free;
 * handles are released with their *_destroy function. Structured inputs and
 * outputs are JSON documents (see README for their shapes).
 */

#include <stddef.h>
#include <stdint.h>

#if defined(FIELDKIT_BUILD_SHARED)
#define FK_API __attribute__((visibility("default")))
#else
#define FK_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fk_status {
  FK_OK = 0,
  FK_ERR_INVALID_ARGUMENT = 1,
  FK_ERR_PARSE = 2,
  FK_ERR_IO = 3,
  FK_ERR_OUT_OF_FIELD = 4,
  FK_ERR_NO_PATH = 5,
  FK_ERR_BEHIND_CAMERA = 6,
  FK_ERR_HORIZON_RAY = 7,
  FK_ERR_INVALID_DISTORTION = 8,
  FK_ERR_DEGENERATE = 9,
  FK_ERR_DEGENERATE_CLOUD = 10,
  FK_ERR_DIMENSION_MISMATCH = 11,
  FK_ERR_CYCLE = 12,
  FK_ERR_UNKNOWN_SLOT = 13,
  FK_ERR_DUPLICATE_PRODUCER = 14,
  FK_ERR_FILTER_FAILURE = 15,
  FK_ERR_INTERNAL = 99
} fk_status;

FK_API const char* fk_version(void);
FK_API const char* fk_status_name(fk_status status);
/* Nonzero for failures caused by the inputs rather than by the algorithm
 * (NoPath, Degenerate, DegenerateCloud, FilterFailure and Internal are algorithm failures). */
FK_API int fk_status_is_input_error(fk_status status);
FK_API const char* fk_last_error(void);
FK_API void fk_string_free(char* s);

/* ---- images: 8-bit, 1 (gray) or 3 (RGB) interleaved channels, PGM/PPM on disk ---- */

typedef struct fk_image fk_image;

FK_API fk_status fk_image_create(int width, int height, int channels, fk_image** out);
FK_API fk_status fk_image_load(const char* path, fk_image** out);
FK_API fk_status fk_image_save(const fk_image* image, const char* path);
FK_API void fk_image_destroy(fk_image* image);
FK_API int fk_image_width(const fk_image* image);
FK_API int fk_image_height(const fk_image* image);
FK_API int fk_image_channels(const fk_image* image);
/* width * height * channels bytes, row-major. */
FK_API uint8_t* fk_image_data(fk_image* image);
FK_API const uint8_t* fk_image_const_data(const fk_image* image);

/* ---- field model ---- */

typedef struct fk_field fk_field;

FK_API fk_status fk_field_default(fk_field** out);
FK_API fk_status fk_field_from_json(const char* json, fk_field** out);
FK_API fk_status fk_field_to_json(const fk_field* field, char** out_json);
FK_API void fk_field_destroy(fk_field* field);
FK_API fk_status fk_field_pose_to_cell(const fk_field* field, double x, double y, int* row, int* col);
FK_API fk_status fk_field_cell_center(const fk_field* field, int row, int col, double* x, double* y);

/* ---- ball planner ---- */

/* request_json: {"robot":{x,y,theta}, "teammates":[...], "opponents":[[x,y],...],
 * "ball":[x,y], "kick_lengths":[...], speeds...}. Writes the plan as JSON. */
FK_API fk_status fk_plan(const fk_field* field, const char* request_json, int use_heuristic, char** out_json);
/* Same search, drawn over a top-down field image. */
FK_API fk_status fk_plan_render(const fk_field* field, const char* request_json, int use_heuristic,
                                double meters_per_pixel, fk_image** out);

/* ---- line vision ---- */

/* config_json may be NULL for defaults; seed drives the Hough point order. */
FK_API fk_status fk_detect_lines(const fk_image* image, const char* config_json, uint64_t seed, char** out_json);

/* ---- camera geometry ---- */

/* camera_json: {"intrinsics":{...}, "camera":{...}, "birdview":{...}, "sampling":"nearest"|"bilinear"} */
FK_API fk_status fk_birdview(const fk_image* image, const char* camera_json, fk_image** out);
/* Re-renders a rectilinear image as if seen through radial distortion (k1, k2). */
FK_API fk_status fk_distort(const fk_image* image, const char* intrinsics_json, double k1, double k2, fk_image** out);
/* 255 inside the field-of-view limit (radians, full angle), 0 outside. */
FK_API fk_status fk_fov_mask(const char* intrinsics_json, double fov_limit, fk_image** out);
FK_API fk_status fk_apply_mask(fk_image* image, const fk_image* mask);

/* ---- localization ---- */

/* Runs the particle filter over a trajectory document and writes one JSON
 * object per step, newline separated. config_json may be NULL. */
FK_API fk_status fk_localize(const fk_field* field, const char* trajectory_json, const char* config_json,
                             uint64_t seed, char** out_json_lines);
FK_API fk_status fk_generate_trajectory(const fk_field* field, const char* config_json, uint64_t seed,
                                        char** out_json);

/* ---- stereo obstacles ---- */

/* params_json may be NULL. out_xyz, if not NULL, receives the voxelized
 * cloud as ASCII "x y z" lines. */
FK_API fk_status fk_stereo(const fk_image* left, const fk_image* right, const char* rig_json,
                           const char* params_json, uint64_t seed, char** out_json, char** out_xyz);

/* ---- synthetic renders ---- */

FK_API fk_status fk_render(const char* scene_json, uint64_t seed, fk_image** out);
FK_API fk_status fk_render_stereo(const char* scene_json, const char* rig_json, uint64_t seed, fk_image** left,
                                  fk_image** right);

/* ---- pipeline scheduler ---- */

typedef struct fk_pipeline fk_pipeline;

/* Returns nonzero to signal failure of the filter for that frame. */
typedef int (*fk_filter_fn)(const char* filter_name, uint64_t frame, void* user);

FK_API fk_status fk_pipeline_parse(const char* json, fk_pipeline** out);
FK_API void fk_pipeline_destroy(fk_pipeline* pipeline);
FK_API fk_status fk_pipeline_batches(const fk_pipeline* pipeline, char** out_json);
/* Runs frames 0..frames-1, calling fn once per executed filter. workers 0
 * picks the pipeline or hardware default. Writes per-filter execution counts. */
FK_API fk_status fk_pipeline_run(const fk_pipeline* pipeline, uint64_t frames, int workers, fk_filter_fn fn,
                                 void* user, char** out_json);
/* Sleep-filter benchmark. Timings vary run to run and are only included when
 * include_timing is nonzero. */
FK_API fk_status fk_pipeline_bench(const fk_pipeline* pipeline, uint64_t frames, int workers, int include_timing,
                                   char** out_json);

#ifdef __cplusplus
}
#endif

#endif
