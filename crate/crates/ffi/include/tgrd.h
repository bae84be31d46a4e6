#ifndef TGRD_H
#define TGRD_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes.
typedef enum TgrdStatus {
  TGRD_STATUS_OK = 0,
  TGRD_STATUS_NULL_ARGUMENT = 1,
  TGRD_STATUS_IO = 2,
  TGRD_STATUS_PARSE = 3,
  TGRD_STATUS_INVALID_SCENE = 4,
  TGRD_STATUS_INVALID_ARGUMENT = 5,
  TGRD_STATUS_RUNTIME = 6,
  TGRD_STATUS_PANIC = 7,
} TgrdStatus;

// Transient histogram with its gradient planes.
typedef struct TgrdHistogram TgrdHistogram;

// Loaded scene.
typedef struct TgrdScene TgrdScene;

// Histogram dimensions.
typedef struct TgrdDims {
  size_t height;
  size_t width;
  size_t frames;
  size_t parameters;
  // First frame start in nanoseconds.
  double t0;
  // Frame exposure in nanoseconds.
  double dt;
} TgrdDims;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty after a success.
// Valid until the next call on the same thread.
const char *tgrd_last_error(void);

// Library version as a NUL-terminated string.
const char *tgrd_version(void);

// Loads and validates a scene file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum TgrdStatus tgrd_scene_load(const char *path, struct TgrdScene **out);

// Builds a named built-in scene.
//
// # Safety
// `name` must be a NUL-terminated string and `out` a valid pointer.
enum TgrdStatus tgrd_scene_preset(const char *name, struct TgrdScene **out);

// # Safety
// `scene` must come from this library or be null.
void tgrd_scene_free(struct TgrdScene *scene);

// Number of scene parameters; 0 for a null scene.
//
// # Safety
// `scene` must be a valid handle or null.
size_t tgrd_scene_num_parameters(const struct TgrdScene *scene);

// Copies the current parameter values into `out[0..len]`.
//
// # Safety
// `out` must point to `len` writable doubles.
enum TgrdStatus tgrd_scene_get_parameters(const struct TgrdScene *scene, double *out, size_t len);

// Replaces the parameter values with `values[0..len]`.
//
// # Safety
// `values` must point to `len` readable doubles.
enum TgrdStatus tgrd_scene_set_parameters(struct TgrdScene *scene,
                                          const double *values,
                                          size_t len);

// Forward transient render. `threads == 0` picks the default worker count.
//
// # Safety
// `scene` must be a valid handle and `out` a valid pointer.
enum TgrdStatus tgrd_render(const struct TgrdScene *scene,
                            uint32_t spp,
                            uint64_t seed,
                            uint32_t threads,
                            struct TgrdHistogram **out);

// Intensity and gradient (interior plus boundary terms).
//
// # Safety
// `scene` must be a valid handle and `out` a valid pointer.
enum TgrdStatus tgrd_gradient(const struct TgrdScene *scene,
                              uint32_t spp_interior,
                              uint32_t spp_boundary,
                              uint64_t seed,
                              uint32_t threads,
                              struct TgrdHistogram **out);

// # Safety
// `hist` must be a valid handle and `out` a valid pointer.
enum TgrdStatus tgrd_histogram_dims(const struct TgrdHistogram *hist, struct TgrdDims *out);

// Copies plane `plane` (0 = intensity, `1 + i` = gradient of parameter
// `i`) into `out`, row-major over `(row, col, frame)`. `len` must equal
// `height * width * frames`.
//
// # Safety
// `out` must point to `len` writable doubles.
enum TgrdStatus tgrd_histogram_plane(const struct TgrdHistogram *hist,
                                     size_t plane,
                                     double *out,
                                     size_t len);

// # Safety
// `hist` must be a valid handle and `path` a NUL-terminated string.
enum TgrdStatus tgrd_histogram_save(const struct TgrdHistogram *hist, const char *path);

// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum TgrdStatus tgrd_histogram_load(const char *path, struct TgrdHistogram **out);

// # Safety
// `hist` must come from this library or be null.
void tgrd_histogram_free(struct TgrdHistogram *hist);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TGRD_H */
