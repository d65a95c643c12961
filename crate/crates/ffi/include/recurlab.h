#ifndef RECURLAB_H
#define RECURLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum RlStatus {
  RL_STATUS_OK = 0,
  RL_STATUS_NULL_POINTER = 1,
  RL_STATUS_INVALID_ARGUMENT = 2,
  RL_STATUS_CONFIG = 3,
  RL_STATUS_RESOURCE = 4,
  RL_STATUS_OUT_OF_RANGE = 5,
  RL_STATUS_INDETERMINATE = 6,
  RL_STATUS_KIND_MISMATCH = 7,
  RL_STATUS_NOT_INVERTIBLE = 8,
  RL_STATUS_IO = 9,
  RL_STATUS_PANIC = 10,
} RlStatus;

// A built construction program.
typedef struct RlProgram RlProgram;

// A dynamical system built from a JSON descriptor.
typedef struct RlSystem RlSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static nul-terminated string.
const char *rl_version(void);

// Copy of the last error message on this thread, or null. Release with [`rl_string_free`].
char *rl_last_error(void);

// # Safety
// `s` must be null or a string returned by this library that was not freed yet.
void rl_string_free(char *s);

// Builds the construction up to `level` with seed `seed_k`.
//
// # Safety
// `out` must be valid for a pointer write.
enum RlStatus rl_program_new(uintptr_t level, uint64_t seed_k, struct RlProgram **out);

// # Safety
// `p` must be null or a handle from [`rl_program_new`] that was not freed yet.
void rl_program_free(struct RlProgram *p);

// Symbol of the constructed word at a decimal index.
//
// # Safety
// `p` must be a live program handle, `index` a nul-terminated string, `out` writable.
enum RlStatus rl_program_symbol_at(const struct RlProgram *p, const char *index, uint8_t *out);

// Checkpoint table as CSV.
//
// # Safety
// `p` must be a live program handle and `out` writable.
enum RlStatus rl_program_checkpoints_csv(const struct RlProgram *p, char **out);

// Builds a system from its JSON descriptor.
//
// # Safety
// `json` must be a nul-terminated string and `out` writable.
enum RlStatus rl_system_from_json(const char *json, struct RlSystem **out);

// # Safety
// `s` must be null or a handle from [`rl_system_from_json`] that was not freed yet.
void rl_system_free(struct RlSystem *s);

// `#{0 <= j < horizon : d(x, f^j x) < radius}`. `program` may be null unless the point is `u`.
//
// # Safety
// Handles must be live or null where allowed; strings nul-terminated; `out` writable.
enum RlStatus rl_return_count(const struct RlSystem *sys,
                              const struct RlProgram *program,
                              const char *point_text,
                              const char *radius,
                              uint64_t horizon,
                              uint64_t *out);

// Density profile as CSV. `radii` is a comma-separated list, or null for the default grid.
//
// # Safety
// As for [`rl_return_count`].
enum RlStatus rl_density_csv(const struct RlSystem *sys,
                             const struct RlProgram *program,
                             const char *point_text,
                             const char *radii_list,
                             uint64_t horizon,
                             uint64_t n_min,
                             char **out);

// Recurrence profile as JSON. Null thresholds select the defaults.
//
// # Safety
// As for [`rl_return_count`].
enum RlStatus rl_classify_json(const struct RlSystem *sys,
                               const struct RlProgram *program,
                               const char *point_text,
                               const char *radii_list,
                               uint64_t horizon,
                               const char *theta_high,
                               const char *theta_low,
                               char **out);

// Lap-growth entropy estimate and the number of iterates actually computed.
//
// # Safety
// `sys` must be a live handle; out-pointers writable.
enum RlStatus rl_lap_entropy(const struct RlSystem *sys,
                             uintptr_t n_max,
                             double *out_estimate,
                             uintptr_t *out_achieved);

// Turbulence witness as JSON, or the string `null` when the search up to `m_max` fails.
//
// # Safety
// `sys` must be a live handle and `out` writable.
enum RlStatus rl_turbulence_json(const struct RlSystem *sys, uint32_t m_max, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RECURLAB_H */
