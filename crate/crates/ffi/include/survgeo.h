#ifndef SURVGEO_H
#define SURVGEO_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result codes. Zero is success.
 */
typedef enum SurvStatus {
  SURV_STATUS_OK = 0,
  SURV_STATUS_NULL_POINTER = 1,
  SURV_STATUS_INVALID_UTF8 = 2,
  SURV_STATUS_IO = 3,
  SURV_STATUS_PARSE = 4,
  SURV_STATUS_INVALID_ARGUMENT = 5,
  SURV_STATUS_UNKNOWN_CAMERA = 6,
  SURV_STATUS_NON_POSITIVE_DEPTH = 7,
  SURV_STATUS_DIMENSION_MISMATCH = 8,
  SURV_STATUS_DEGENERATE_SIZE = 9,
  SURV_STATUS_ALL_INVALID = 10,
  SURV_STATUS_CONSTANT_MAP = 11,
  SURV_STATUS_NO_VALID_GROUND_TRUTH = 12,
  SURV_STATUS_INVALID_TRANSFORM = 13,
  SURV_STATUS_OTHER = 14,
  SURV_STATUS_PANIC = 15,
} SurvStatus;

/*
 Three-channel unit-vector map.
 */
typedef struct SurvNormalMap SurvNormalMap;

/*
 Camera rig loaded from JSON.
 */
typedef struct SurvRig SurvRig;

/*
 Single-channel map (depth, disparity).
 */
typedef struct SurvScalarMap SurvScalarMap;

/*
 Depth metrics as returned by [`survgeo_evaluate`].
 */
typedef struct SurvMetrics {
  double abs_rel;
  double sq_rel;
  double rmse;
  double rmse_log;
  double delta1;
  double delta2;
  double delta3;
  size_t valid_pixels;
  double scale;
} SurvMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread, or null after a
 success. Valid until the next call on the same thread.
 */
const char *survgeo_last_error(void);

/*
 Loads a rig from a JSON file.

 # Safety
 `path` must be a NUL-terminated string; `out` must be writable.
 */
enum SurvStatus survgeo_rig_load(const char *path, struct SurvRig **out);

/*
 # Safety
 `rig` must be null or a handle from [`survgeo_rig_load`], freed once.
 */
void survgeo_rig_free(struct SurvRig *rig);

/*
 Number of cameras, or 0 for a null handle.

 # Safety
 `rig` must be null or a live handle.
 */
size_t survgeo_rig_camera_count(const struct SurvRig *rig);

/*
 Projects a camera-frame point `xyz[3]` of camera `camera_id` to pixel
 coordinates `uv[2]`.

 # Safety
 `rig` must be a live handle; `xyz` readable for 3 and `uv` writable for 2
 doubles.
 */
enum SurvStatus survgeo_rig_project(const struct SurvRig *rig,
                                    size_t camera_id,
                                    const double *xyz,
                                    double *uv);

/*
 Lifts pixel `(u, v)` at z-depth `depth` to a camera-frame point `xyz[3]`.

 # Safety
 `rig` must be a live handle; `xyz` writable for 3 doubles.
 */
enum SurvStatus survgeo_rig_unproject(const struct SurvRig *rig,
                                      size_t camera_id,
                                      double u,
                                      double v,
                                      double depth,
                                      double *xyz);

/*
 Builds a map from `height * width` row-major values; NaN marks invalid
 pixels.

 # Safety
 `data` must be readable for `height * width` doubles; `out` writable.
 */
enum SurvStatus survgeo_map_new(size_t height,
                                size_t width,
                                const double *data,
                                struct SurvScalarMap **out);

/*
 Reads a single-channel PFM file.

 # Safety
 `path` must be a NUL-terminated string; `out` must be writable.
 */
enum SurvStatus survgeo_map_read_pfm(const char *path, struct SurvScalarMap **out);

/*
 Writes a map as a single-channel PFM file.

 # Safety
 `map` must be a live handle; `path` a NUL-terminated string.
 */
enum SurvStatus survgeo_map_write_pfm(const struct SurvScalarMap *map, const char *path);

/*
 Writes the map dimensions.

 # Safety
 `map` must be a live handle; `height` and `width` writable.
 */
enum SurvStatus survgeo_map_dims(const struct SurvScalarMap *map, size_t *height, size_t *width);

/*
 Copies the map into `buf` row-major, NaN at invalid pixels. `len` must
 equal `height * width`.

 # Safety
 `map` must be a live handle; `buf` writable for `len` doubles.
 */
enum SurvStatus survgeo_map_copy(const struct SurvScalarMap *map, double *buf, size_t len);

/*
 # Safety
 `map` must be null or a live handle, freed once.
 */
void survgeo_map_free(struct SurvScalarMap *map);

/*
 Min-max normalizes a disparity-like map into depth in `[d_min, d_max]`.

 # Safety
 `disparity` must be a live handle; `out` writable.
 */
enum SurvStatus survgeo_pseudo_depth(const struct SurvScalarMap *disparity,
                                     double d_min,
                                     double d_max,
                                     struct SurvScalarMap **out);

/*
 Surface normals of camera `camera_id` from its depth map.

 # Safety
 `rig` and `depth` must be live handles; `out` writable.
 */
enum SurvStatus survgeo_normal_map(const struct SurvRig *rig,
                                   size_t camera_id,
                                   const struct SurvScalarMap *depth,
                                   struct SurvNormalMap **out);

/*
 Copies normals into `buf` as row-major xyz triples, NaN at invalid
 pixels. `len` must equal `3 * height * width`.

 # Safety
 `normals` must be a live handle; `buf` writable for `len` doubles.
 */
enum SurvStatus survgeo_normals_copy(const struct SurvNormalMap *normals, double *buf, size_t len);

/*
 # Safety
 `normals` must be null or a live handle, freed once.
 */
void survgeo_normals_free(struct SurvNormalMap *normals);

/*
 Depth metrics of `pred` against `gt` over `gt ∈ [min_depth, max_depth]`.

 # Safety
 `pred` and `gt` must be live handles; `out` writable.
 */
enum SurvStatus survgeo_evaluate(const struct SurvScalarMap *pred,
                                 const struct SurvScalarMap *gt,
                                 double min_depth,
                                 double max_depth,
                                 bool median_scale,
                                 struct SurvMetrics *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SURVGEO_H */
