/* C interface to the pmaplab simulation laboratory. */

#ifndef PMAPLAB_H
#define PMAPLAB_H

/* Generated by cbindgen from crates/pmaplab-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every `pml_` function.
 */
typedef enum {
  PML_STATUS_OK = 0,
  PML_STATUS_NULL_ARGUMENT = 1,
  PML_STATUS_INVALID_ARGUMENT = 2,
  PML_STATUS_BUFFER_TOO_SMALL = 3,
  PML_STATUS_UTF8_ERROR = 4,
  PML_STATUS_JSON_ERROR = 5,
  /**
   * The experiment ran but a pinned threshold failed.
   */
  PML_STATUS_THRESHOLD_FAILED = 6,
  PML_STATUS_PANIC = 7,
} PmlStatus;

/**
 * Opaque handle: a ranked hub-family distribution on `[n]`.
 */
typedef struct PmlFamily PmlFamily;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Build the hub family for `theta[0..theta_len]` and size `n`.
 *
 * `theta` may be null when `theta_len == 0` (the uniform case). On success
 * `*out` owns the handle; release it with `pml_family_free`.
 *
 * # Safety
 * `theta` must point to `theta_len` readable doubles and `out` must be a
 * valid writable pointer.
 */
PmlStatus pml_family_new(const double *theta, uintptr_t theta_len, uintptr_t n, PmlFamily **out);

/**
 * Release a family handle. Null is ignored.
 *
 * # Safety
 * `family` must come from `pml_family_new` and not have been freed.
 */
void pml_family_free(PmlFamily *family);

/**
 * Number of atoms `n`.
 *
 * # Safety
 * `family` must be a live handle.
 */
uintptr_t pml_family_len(const PmlFamily *family);

/**
 * Write `sigma(p)` to `*out`.
 *
 * # Safety
 * `family` must be a live handle and `out` writable.
 */
PmlStatus pml_family_sigma(const PmlFamily *family, double *out);

/**
 * Copy the probability vector into `buf` (capacity `len >= n`).
 *
 * # Safety
 * `buf` must point to `len` writable doubles.
 */
PmlStatus pml_family_values(const PmlFamily *family, double *buf, uintptr_t len);

/**
 * Sample a p-mapping on the stream `(seed, stream)` into `image`
 * (capacity `len >= n`, 1-based values).
 *
 * # Safety
 * `image` must point to `len` writable `uint32_t`.
 */
PmlStatus pml_sample_mapping(const PmlFamily *family,
                             uint64_t seed,
                             uint64_t stream,
                             uint32_t *image,
                             uintptr_t len);

/**
 * Sample a p-tree; `parent` receives the parent array (0 at the root) and
 * `*root_out` the root label.
 *
 * # Safety
 * `parent` must point to `len` writable `uint32_t`; `root_out` writable.
 */
PmlStatus pml_sample_tree(const PmlFamily *family,
                          uint64_t seed,
                          uint64_t stream,
                          uint32_t *parent,
                          uintptr_t len,
                          uint32_t *root_out);

/**
 * Count the cyclic points of a mapping given as a 1-based image array.
 *
 * # Safety
 * `image` must point to `n` readable `uint32_t`; `out` writable.
 */
PmlStatus pml_cyclic_count(const uint32_t *image, uintptr_t n, uintptr_t *out);

/**
 * Run a catalog experiment from a JSON config string; on success `*report`
 * receives a JSON report to be released with `pml_string_free`.
 *
 * Returns `ThresholdFailed` (with the report still written) when the
 * experiment ran but its pinned threshold did not hold.
 *
 * # Safety
 * `config_json` must be a NUL-terminated string; `report` writable.
 */
PmlStatus pml_run_experiment_json(const char *config_json, char **report);

/**
 * Release a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void pml_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* PMAPLAB_H */
