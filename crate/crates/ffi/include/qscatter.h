#ifndef QSCATTER_H
#define QSCATTER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QsSide {
  QS_SIDE_LEFT = 0,
  QS_SIDE_RIGHT = 1,
} QsSide;

typedef enum QsStatus {
  QS_STATUS_OK = 0,
  QS_STATUS_NULL_POINTER = 1,
  QS_STATUS_INVALID_ARGUMENT = 2,
  QS_STATUS_PARSE = 3,
  QS_STATUS_IO = 4,
  QS_STATUS_NUMERICAL = 5,
  QS_STATUS_STEP_SIZE = 6,
  QS_STATUS_DOMAIN = 7,
  QS_STATUS_PANIC = 8,
} QsStatus;

/**
 * Opaque barrier handle.
 */
typedef struct QsBarrier QsBarrier;

/**
 * Opaque table of scattering functions on a k-grid.
 */
typedef struct QsCoeffs QsCoeffs;

/**
 * One row of a [`QsCoeffs`] table.
 */
typedef struct QsCoeffSample {
  double k;
  double t;
  double r;
  double j;
  double f;
  double j_prime;
  double f_prime;
} QsCoeffSample;

/**
 * Characteristic times of a Gaussian scenario in `ħ = m = 1` units.
 */
typedef struct QsTimeReport {
  double t_bar;
  double r_bar;
  double swpa_tr;
  double swpa_ref;
  double delay_tr;
  double delay_ref_minus;
  double delay_ref_plus;
  double spatial_delay_tr;
  double spatial_delay_ref;
  double t_start;
  double t_end_tr;
  double t_end_ref;
  double t_end;
  double tau_scatt;
  double scat_length_tr;
  double scat_length_ref;
  double tau_scatt_narrow;
  /**
   * Incident, transmitted and reflected completed-scattering flags.
   */
  bool completed[3];
} QsTimeReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the next
 * failing call on the same thread.
 */
const char *qs_last_error(void);

/**
 * Build a barrier from `n` segments starting at `a`.
 *
 * # Safety
 * `widths` and `heights` must point to `n` readable doubles; `out` must be
 * writable.
 */
enum QsStatus qs_barrier_new(double a,
                             const double *widths,
                             const double *heights,
                             size_t n,
                             struct QsBarrier **out);

/**
 * Parse a barrier from the text format (`a <value>` then `<width> <height>`
 * lines).
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum QsStatus qs_barrier_parse(const char *text, struct QsBarrier **out);

/**
 * # Safety
 * `barrier` must be null or a handle from `qs_barrier_new`/`qs_barrier_parse`
 * that has not been freed.
 */
void qs_barrier_free(struct QsBarrier *barrier);

/**
 * Transmission coefficient `T(k)`.
 *
 * # Safety
 * `barrier` must be a live handle; `out` must be writable.
 */
enum QsStatus qs_transmission(const struct QsBarrier *barrier, double k, double *out);

/**
 * Tabulate the scattering functions on `n` uniform nodes of `[kmin, kmax]`.
 *
 * # Safety
 * `barrier` must be a live handle; `out` must be writable.
 */
enum QsStatus qs_coeffs_compute(const struct QsBarrier *barrier,
                                double kmin,
                                double kmax,
                                size_t n,
                                struct QsCoeffs **out);

/**
 * Number of rows, or 0 for a null handle.
 *
 * # Safety
 * `coeffs` must be null or a live handle.
 */
size_t qs_coeffs_len(const struct QsCoeffs *coeffs);

/**
 * Row `i` of the table.
 *
 * # Safety
 * `coeffs` must be a live handle; `out` must be writable.
 */
enum QsStatus qs_coeffs_get(const struct QsCoeffs *coeffs, size_t i, struct QsCoeffSample *out);

/**
 * # Safety
 * `coeffs` must be null or a live handle from `qs_coeffs_compute`.
 */
void qs_coeffs_free(struct QsCoeffs *coeffs);

/**
 * Characteristic times of a Gaussian packet (`k0`, `l0`) incident from
 * `side` on a grid of `n` positive nodes. `x_r` is the start of a right-side
 * packet (NaN for the default); `narrow` adds the narrow-packet lengths.
 *
 * # Safety
 * `barrier` must be a live handle; `out` must be writable.
 */
enum QsStatus qs_time_report(const struct QsBarrier *barrier,
                             enum QsSide side,
                             double k0,
                             double l0,
                             double x_r,
                             size_t n,
                             double l1,
                             double l2,
                             bool narrow,
                             struct QsTimeReport *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QSCATTER_H */
