#ifndef IDEALFLOW_H
#define IDEALFLOW_H

/* Generated by cbindgen; regenerate with `cargo build -p idealflow-ffi --features headers`. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum IcfScheme {
  ICF_SCHEME_IMEX_EULER = 0,
  ICF_SCHEME_IMEX_BDF2 = 1,
  ICF_SCHEME_EXPLICIT_RK4 = 2,
} IcfScheme;

typedef enum IcfStatus {
  ICF_STATUS_OK = 0,
  ICF_STATUS_NULL_POINTER = 1,
  ICF_STATUS_INVALID_ARGUMENT = 2,
  ICF_STATUS_WINDING_MISMATCH = 3,
  ICF_STATUS_BLOWUP = 4,
  ICF_STATUS_CONFIG = 5,
  ICF_STATUS_IO = 6,
  ICF_STATUS_BUFFER_TOO_SMALL = 7,
  ICF_STATUS_PANIC = 8,
} IcfStatus;

/**
 * Opaque flow state with its integrator settings.
 */
typedef struct IcfFlow IcfFlow;

/**
 * Opaque curvature profile.
 */
typedef struct IcfProfile IcfProfile;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *icf_last_error_message(void);

/**
 * Exact `omega`-fold circle of total length `length` on `n` nodes.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum IcfStatus icf_profile_circle(double length, int64_t omega, size_t n, struct IcfProfile **out);

/**
 * Circle plus `sum a_i cos(2 pi m_i s / L + phase_i)`.
 *
 * # Safety
 * `modes`, `amplitudes` and `phases` must each hold `count` values; `out`
 * must be valid for a pointer write.
 */
enum IcfStatus icf_profile_perturbed(double length,
                                     int64_t omega,
                                     size_t n,
                                     const uint32_t *modes,
                                     const double *amplitudes,
                                     const double *phases,
                                     size_t count,
                                     struct IcfProfile **out);

/**
 * Profile from `n` curvature samples at `s_j = j length / n`.
 *
 * # Safety
 * `samples` must hold `n` values; `out` must be valid for a pointer write.
 */
enum IcfStatus icf_profile_from_samples(const double *samples,
                                        size_t n,
                                        double length,
                                        int64_t omega,
                                        struct IcfProfile **out);

/**
 * # Safety
 * `profile` must come from this library and not be used afterwards.
 */
void icf_profile_free(struct IcfProfile *profile);

/**
 * # Safety
 * `profile` must be a live profile; `out` valid for a write.
 */
enum IcfStatus icf_profile_len(const struct IcfProfile *profile, size_t *out);

/**
 * `E = 1/2 integral k_s^2 ds`.
 *
 * # Safety
 * `profile` must be a live profile; `out` valid for a write.
 */
enum IcfStatus icf_profile_energy(const struct IcfProfile *profile, double *out);

/**
 * Measured winding number `integral k ds / 2 pi`.
 *
 * # Safety
 * `profile` must be a live profile; `out` valid for a write.
 */
enum IcfStatus icf_profile_winding(const struct IcfProfile *profile, double *out);

/**
 * The length-preserving multiplier `h`.
 *
 * # Safety
 * `profile` must be a live profile; `out` valid for a write.
 */
enum IcfStatus icf_profile_constraint_h(const struct IcfProfile *profile, double *out);

/**
 * `max |k - 2 pi omega / L|`.
 *
 * # Safety
 * `profile` must be a live profile; `out` valid for a write.
 */
enum IcfStatus icf_profile_sup_deviation(const struct IcfProfile *profile, double *out);

/**
 * Copies the curvature samples into `buf`, which must hold `len >= n`.
 *
 * # Safety
 * `profile` must be a live profile; `buf` valid for `len` writes.
 */
enum IcfStatus icf_profile_copy_curvature(const struct IcfProfile *profile,
                                          double *buf,
                                          size_t len);

/**
 * Starts a flow at a copy of `profile`. `blowup_cap <= 0` selects the
 * default cap.
 *
 * # Safety
 * `profile` must be a live profile; `out` valid for a pointer write.
 */
enum IcfStatus icf_flow_new(const struct IcfProfile *profile,
                            enum IcfScheme scheme,
                            double dt,
                            double blowup_cap,
                            struct IcfFlow **out);

/**
 * Advances `steps` time steps. On failure the flow keeps the last good
 * state.
 *
 * # Safety
 * `flow` must be a live flow.
 */
enum IcfStatus icf_flow_step(struct IcfFlow *flow, uint64_t steps);

/**
 * # Safety
 * `flow` must be a live flow; `out` valid for a write.
 */
enum IcfStatus icf_flow_time(const struct IcfFlow *flow, double *out);

/**
 * # Safety
 * `flow` must be a live flow; `out` valid for a write.
 */
enum IcfStatus icf_flow_energy(const struct IcfFlow *flow, double *out);

/**
 * # Safety
 * `flow` must be a live flow; `buf` valid for `len` writes.
 */
enum IcfStatus icf_flow_copy_curvature(const struct IcfFlow *flow, double *buf, size_t len);

/**
 * Snapshot of the current profile, owned by the caller.
 *
 * # Safety
 * `flow` must be a live flow; `out` valid for a pointer write.
 */
enum IcfStatus icf_flow_profile(const struct IcfFlow *flow, struct IcfProfile **out);

/**
 * # Safety
 * `flow` must come from this library and not be used afterwards.
 */
void icf_flow_free(struct IcfFlow *flow);

/**
 * Runs a JSON configuration and writes its artifacts to `out_dir`.
 * `passed` receives whether every hard monitor passed.
 *
 * # Safety
 * `config_json` and `out_dir` must be NUL-terminated UTF-8; `passed` must
 * be valid for a write.
 */
enum IcfStatus icf_run_config_json(const char *config_json, const char *out_dir, bool *passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IDEALFLOW_H */
