/* C interface to the elgar library.  All functions return an elgar_status; on failure
 * elgar_last_error() describes the problem (thread-local, valid until the next call). */
#ifndef ELGAR_ELGAR_H
#define ELGAR_ELGAR_H

#include <stddef.h>
#include <stdint.h>

#if defined(ELGAR_BUILDING_LIBRARY)
#define ELGAR_API __attribute__((visibility("default")))
#else
#define ELGAR_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values double as process exit codes. */
typedef enum elgar_status {
  ELGAR_OK = 0,
  ELGAR_ERR_INTERNAL = 1,
  ELGAR_ERR_INPUT = 2,      /* unreadable, malformed or invalid input */
  ELGAR_ERR_GEOMETRY = 3,   /* degenerate rotations, landmarks, segments */
  ELGAR_ERR_DIVERGENCE = 4, /* non-finite activations or model output */
  ELGAR_ERR_ALIGNMENT = 5   /* frame-rate, length or overlap mismatch */
} elgar_status;

typedef struct elgar_config elgar_config;
typedef struct elgar_skeleton elgar_skeleton;
typedef struct elgar_cello elgar_cello;
typedef struct elgar_motion elgar_motion;

ELGAR_API const char* elgar_version(void);
ELGAR_API const char* elgar_last_error(void);
/* Frees strings returned through char** out-parameters. */
ELGAR_API void elgar_string_free(char* s);

/* ---- run configuration ---- */
/* path may be NULL for the built-in defaults. */
ELGAR_API elgar_status elgar_config_load(const char* path, elgar_config** out);
ELGAR_API void elgar_config_free(elgar_config* config);
ELGAR_API elgar_status elgar_config_set_seed(elgar_config* config, uint64_t seed);
ELGAR_API elgar_status elgar_config_set_guidance_w(elgar_config* config, double w);
ELGAR_API elgar_status elgar_config_set_steps(elgar_config* config, int steps);
ELGAR_API elgar_status elgar_config_set_overlap_s(elgar_config* config, double overlap_s);
ELGAR_API elgar_status elgar_config_set_output(elgar_config* config, const char* dir);
ELGAR_API elgar_status elgar_config_set_dataset(elgar_config* config, const char* dir);
/* Echo of the effective configuration as JSON. */
ELGAR_API elgar_status elgar_config_json(const elgar_config* config, char** json);

/* ---- assets ---- */
ELGAR_API elgar_status elgar_skeleton_load(const char* path, elgar_skeleton** out);
ELGAR_API void elgar_skeleton_free(elgar_skeleton* skeleton);
ELGAR_API int elgar_skeleton_joint_count(const elgar_skeleton* skeleton);
ELGAR_API elgar_status elgar_cello_load(const char* path, elgar_cello** out);
ELGAR_API void elgar_cello_free(elgar_cello* cello);

/* ---- motion files ---- */
ELGAR_API elgar_status elgar_motion_read(const char* path, elgar_motion** out);
/* data: frames x dim, frame-major. */
ELGAR_API elgar_status elgar_motion_create(double fps, int frames, int dim, const double* data, elgar_motion** out);
ELGAR_API elgar_status elgar_motion_write(const elgar_motion* motion, const char* path);
ELGAR_API void elgar_motion_free(elgar_motion* motion);
ELGAR_API int elgar_motion_frames(const elgar_motion* motion);
ELGAR_API int elgar_motion_dim(const elgar_motion* motion);
ELGAR_API double elgar_motion_fps(const elgar_motion* motion);
ELGAR_API elgar_status elgar_motion_copy_data(const elgar_motion* motion, double* out, size_t capacity);

/* ---- kinematics and geometry ---- */
/* R is row-major 3x3. */
ELGAR_API elgar_status elgar_rot6d_to_matrix(const double a[6], double R[9]);
ELGAR_API elgar_status elgar_matrix_to_rot6d(const double R[9], double a[6]);
/* positions: joint_count x 3. */
ELGAR_API elgar_status elgar_forward_kinematics(const elgar_skeleton* skeleton, const double* frame, size_t frame_len,
                                                double* positions, size_t capacity);
/* frog/tip of one motion frame. */
ELGAR_API elgar_status elgar_bow_endpoints(const elgar_skeleton* skeleton, const elgar_cello* cello,
                                           const double* frame, size_t frame_len, double frog[3], double tip[3]);
/* P, Q: n x 3 row-major; R row-major; t translation; fits R P + t ~ Q. */
ELGAR_API elgar_status elgar_kabsch(const double* P, const double* Q, size_t n, double R[9], double t[3], double* rmsd);
ELGAR_API elgar_status elgar_segment_distance(const double a0[3], const double a1[3], const double b0[3],
                                              const double b1[3], double* distance, double* s, double* u);

/* ---- audio ---- */
/* Returns a malloc'd f0 track (free with elgar_buffer_free). */
ELGAR_API elgar_status elgar_extract_f0_wav(const char* wav_path, double fps, double** f0, size_t* frames);
ELGAR_API void elgar_buffer_free(double* buffer);

/* ---- pipeline ---- */
ELGAR_API elgar_status elgar_synth_dataset(const elgar_config* config, const char* out_dir, int* takes);
/* summary: JSON text with frame count and alignment RMSD statistics. */
ELGAR_API elgar_status elgar_preprocess(const elgar_config* config, const char* take_path, const char* audio_path,
                                        const char* out_prefix, char** summary);
/* Every raw take of the configured dataset. */
ELGAR_API elgar_status elgar_preprocess_dataset(const elgar_config* config, char** summary);
ELGAR_API elgar_status elgar_train(const elgar_config* config, const char* out_dir);
/* Exactly one of audio_path / condition_path is non-NULL.  duration_s <= 0 keeps the full
 * length; otherwise the condition is cut (or padded with its final frame) to that duration. */
ELGAR_API elgar_status elgar_generate(const elgar_config* config, const char* checkpoint_path, const char* audio_path,
                                      const char* condition_path, double duration_s, const char* out_path);
/* gt_path may be NULL.  report: JSON; table: aligned text. */
ELGAR_API elgar_status elgar_evaluate(const elgar_config* config, const char* motion_path, const char* condition_path,
                                      const char* gt_path, const char* out_json, char** table);
ELGAR_API elgar_status elgar_ablate(const elgar_config* config, const char* out_dir, char** table);

#ifdef __cplusplus
}
#endif

#endif
