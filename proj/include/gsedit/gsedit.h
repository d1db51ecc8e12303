/* SPDX-FileCopyrightText: 2026 gsedit authors
 *
 * SPDX-License-Identifier: Apache-2.0 */

/* C interface to the gsedit core. Objects are opaque handles owned by the caller
 * and released with the matching *_free function. Every fallible call returns a
 * gsedit_status; the message of the last failure on the calling thread is
 * available from gsedit_last_error(). Strings returned through char** are
 * heap-allocated and released with gsedit_string_free(). */

#ifndef GSEDIT_GSEDIT_H
#define GSEDIT_GSEDIT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define GSEDIT_API __declspec(dllexport)
#elif defined(__GNUC__)
#  define GSEDIT_API __attribute__((visibility("default")))
#else
#  define GSEDIT_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gsedit_status {
    GSEDIT_OK = 0,
    GSEDIT_ERR_INVALID_ARGUMENT = 1,
    GSEDIT_ERR_IO = 2,
    GSEDIT_ERR_FORMAT = 3,
    GSEDIT_ERR_VALIDATION = 4,
    GSEDIT_ERR_EMPTY_REGION = 5,
    GSEDIT_ERR_NUMERICAL = 6,
    GSEDIT_ERR_CONFIG = 7,
    GSEDIT_ERR_TRANSPORT = 8,
    GSEDIT_ERR_PROVIDER = 9,
    GSEDIT_ERR_INTERNAL = 10
} gsedit_status;

typedef enum gsedit_subset {
    GSEDIT_SUBSET_ALL = 0,
    GSEDIT_SUBSET_EDITABLE = 1,
    GSEDIT_SUBSET_FIXED = 2
} gsedit_subset;

typedef struct gsedit_scene gsedit_scene;
typedef struct gsedit_config gsedit_config;
typedef struct gsedit_provider gsedit_provider;
typedef struct gsedit_server gsedit_server;

/* Pinhole intrinsics; pixel (i, j) has its center at (i, j). */
typedef struct gsedit_intrinsics {
    double fx, fy, cx, cy;
    int width, height;
} gsedit_intrinsics;

/* World to camera: X_c = R(quat) X + trans, quat = (w, x, y, z). */
typedef struct gsedit_pose {
    double quat[4];
    double trans[3];
} gsedit_pose;

GSEDIT_API const char* gsedit_version(void);
GSEDIT_API const char* gsedit_last_error(void);
GSEDIT_API const char* gsedit_status_name(gsedit_status status);
GSEDIT_API void gsedit_string_free(char* str);

/* Scenes */
GSEDIT_API gsedit_status gsedit_scene_load(const char* path, gsedit_scene** out);
GSEDIT_API gsedit_status gsedit_scene_save(const gsedit_scene* scene, const char* path);
GSEDIT_API size_t gsedit_scene_size(const gsedit_scene* scene);
GSEDIT_API int gsedit_scene_sh_degree(const gsedit_scene* scene);
GSEDIT_API void gsedit_scene_free(gsedit_scene* scene);

/* Renders `subset` (NULL renders every Gaussian) into rgb_out, which must hold
 * width * height * 3 doubles in row-major HWC order. alpha_out may be NULL. */
GSEDIT_API gsedit_status gsedit_render(const gsedit_scene* scene, const size_t* subset, size_t subset_count,
                                       const gsedit_pose* pose, const gsedit_intrinsics* intrinsics,
                                       const double background[3], double* rgb_out, double* alpha_out);

/* Configuration (TOML, or JSON for *.json paths) */
GSEDIT_API gsedit_status gsedit_config_default(gsedit_config** out);
GSEDIT_API gsedit_status gsedit_config_load(const char* path, gsedit_config** out);
/* Merges a JSON object of overrides into the config and re-validates it. The
 * config is left unchanged on failure. */
GSEDIT_API gsedit_status gsedit_config_apply_json(gsedit_config* config, const char* json_overrides);
GSEDIT_API gsedit_status gsedit_config_validate(const gsedit_config* config);
GSEDIT_API gsedit_status gsedit_config_to_json(const gsedit_config* config, char** out);
GSEDIT_API gsedit_status gsedit_config_intrinsics(const gsedit_config* config, gsedit_intrinsics* out);
GSEDIT_API void gsedit_config_free(gsedit_config* config);

/* Pose grid of the refinement stage as a JSON array of {quat, trans, intrinsics}. */
GSEDIT_API gsedit_status gsedit_pose_grid_json(const gsedit_config* config, char** out);

/* Guidance providers */
GSEDIT_API gsedit_status gsedit_provider_mock(const char* fixture_dir, const double background[3], double weight,
                                              uint64_t seed, gsedit_provider** out);
GSEDIT_API gsedit_status gsedit_provider_remote(const char* url, int timeout_ms, int max_attempts,
                                                gsedit_provider** out);
/* "mock:<fixture dir>" or "remote:<url>", using the config's provider settings. */
GSEDIT_API gsedit_status gsedit_provider_from_spec(const char* spec, const gsedit_config* config,
                                                   gsedit_provider** out);
GSEDIT_API void gsedit_provider_free(gsedit_provider* provider);

/* Full edit: writes edited.ply, editset.json, report.json and turntable PNGs into
 * out_dir. report_json may be NULL. */
GSEDIT_API gsedit_status gsedit_run(const gsedit_config* config, const char* scene_path, const char* out_dir,
                                    gsedit_provider* provider, char** report_json);

/* Writes view_NNN.png for every pose in poses_path (a pose-grid JSON file) or,
 * when poses_path is NULL, for every refinement grid pose of the config. The
 * editable set is read from editset_path (an editset.json sidecar) when given,
 * otherwise it is the Gaussians inside the config box. written may be NULL. */
GSEDIT_API gsedit_status gsedit_render_pngs(const gsedit_scene* scene, const gsedit_config* config,
                                            gsedit_subset subset, const char* editset_path, const char* poses_path,
                                            const char* out_dir, int* written);

/* Built-in fixtures: "blob-10", "box-scene-100". */
GSEDIT_API gsedit_status gsedit_fixture_write(const char* name, uint64_t seed, const char* out_dir);

/* (1 - max over mask) + lambda * sum of squares outside the mask. mask holds
 * width * height bytes (nonzero = inside); the attention map is resampled to the
 * mask size when the sizes differ. */
GSEDIT_API gsedit_status gsedit_localization_loss(const double* attention, int attention_width,
                                                  int attention_height, const uint8_t* mask, int mask_width,
                                                  int mask_height, double lambda, double* out);

/* HTTP guidance server backed by `provider` (NULL answers 503). port 0 picks a
 * free port; the bound port is stored in bound_port. */
GSEDIT_API gsedit_status gsedit_server_start(gsedit_provider* provider, const char* host, int port,
                                             gsedit_server** out, int* bound_port);
GSEDIT_API void gsedit_server_stop(gsedit_server* server);

#ifdef __cplusplus
}
#endif

#endif /* GSEDIT_GSEDIT_H */
