#ifndef GL2MODP_H
#define GL2MODP_H

#pragma once

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum Gl2Status {
  GL2_STATUS_OK = 0,
  GL2_STATUS_NULL_POINTER = 1,
  GL2_STATUS_INVALID_ARGUMENT = 2,
  GL2_STATUS_CHECKS_FAILED = 3,
  GL2_STATUS_INTERNAL = 4,
} Gl2Status;

typedef struct Gl2Field Gl2Field;

typedef struct Gl2HModule Gl2HModule;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failing call on this thread; owned by the library
 * and valid until the next call that fails.
 */
const char *gl2_last_error_message(void);

/**
 * Creates F_q with q = p^n.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum Gl2Status gl2_field_new(uint32_t p, uint32_t n, struct Gl2Field **out);

/**
 * # Safety
 * `f` must be null or a handle from `gl2_field_new` not yet freed.
 */
void gl2_field_free(struct Gl2Field *f);

/**
 * Field size, or 0 for a null handle.
 *
 * # Safety
 * `f` must be null or a live field handle.
 */
uint32_t gl2_field_q(const struct Gl2Field *f);

/**
 * Elements are encoded as integers 0..q-1 by their F_p-coordinates in base p.
 *
 * # Safety
 * `f` must be a live field handle and `out` writable.
 */
enum Gl2Status gl2_field_mul(const struct Gl2Field *f, uint32_t a, uint32_t b, uint32_t *out);

/**
 * # Safety
 * `f` must be a live field handle and `out` writable.
 */
enum Gl2Status gl2_field_add(const struct Gl2Field *f, uint32_t a, uint32_t b, uint32_t *out);

/**
 * # Safety
 * `f` must be a live field handle and `out` writable.
 */
enum Gl2Status gl2_field_inv(const struct Gl2Field *f, uint32_t a, uint32_t *out);

/**
 * The supersingular module for the orbit of χ(diag(g^i, g^j)) = g^{c i + d j},
 * with T_Π^2 acting by `lambda`.
 *
 * # Safety
 * `f` must be a live field handle and `out` writable.
 */
enum Gl2Status gl2_hmodule_make_m_gamma(const struct Gl2Field *f,
                                        int64_t c,
                                        int64_t d,
                                        uint32_t lambda,
                                        struct Gl2HModule **out);

/**
 * The two-dimensional module for a regular orbit; fails for χ = χ^s.
 *
 * # Safety
 * `f` must be a live field handle and `out` writable.
 */
enum Gl2Status gl2_hmodule_make_l_gamma(const struct Gl2Field *f,
                                        int64_t c,
                                        int64_t d,
                                        uint32_t lambda,
                                        struct Gl2HModule **out);

/**
 * # Safety
 * `m` must be null or a live module handle.
 */
void gl2_hmodule_free(struct Gl2HModule *m);

/**
 * Dimension, or 0 for a null handle.
 *
 * # Safety
 * `m` must be null or a live module handle.
 */
size_t gl2_hmodule_dim(const struct Gl2HModule *m);

/**
 * Audits the defining relations; returns `ChecksFailed` naming the first
 * violated relation.
 *
 * # Safety
 * `m` must be a live module handle.
 */
enum Gl2Status gl2_hmodule_check_relations(const struct Gl2HModule *m);

/**
 * # Safety
 * `a` and `b` must be live module handles over the same field and `out` writable.
 */
enum Gl2Status gl2_hmodule_is_isomorphic(const struct Gl2HModule *a,
                                         const struct Gl2HModule *b,
                                         bool *out);

/**
 * JSON description of the module; free with `gl2_string_free`. Null on a null handle.
 *
 * # Safety
 * `m` must be null or a live module handle.
 */
char *gl2_hmodule_to_json(const struct Gl2HModule *m);

/**
 * Runs a CLI command (`irreps`, `envelopes`, `hecke`, `injmod`, `tree`,
 * `supermod`, `acceptance`) and writes its JSON report to `out`. `p = 0`
 * with `acceptance` runs every default field. Returns `ChecksFailed`, with
 * the report still written, when some check fails.
 *
 * # Safety
 * `command` must be a NUL-terminated string and `out` writable.
 */
enum Gl2Status gl2_run_command(const char *command,
                               uint32_t p,
                               uint32_t n,
                               uint64_t seed,
                               bool trace,
                               char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void gl2_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* GL2MODP_H */
