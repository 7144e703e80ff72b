#ifndef CBMLAB_H
#define CBMLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Status codes shared by every function.
 */
typedef enum CbmStatus {
  CBM_STATUS_OK = 0,
  /*
   The scenario ran but at least one verdict failed.
   */
  CBM_STATUS_VERDICT_FAILED = 1,
  /*
   Invalid scenario, option or handle contents.
   */
  CBM_STATUS_CONFIG = 2,
  /*
   Expression syntax error or undeclared variable.
   */
  CBM_STATUS_PARSE = 3,
  /*
   A precondition of the computation does not hold.
   */
  CBM_STATUS_PRECONDITION = 4,
  /*
   A numerical failure during the computation.
   */
  CBM_STATUS_NUMERICAL = 5,
  CBM_STATUS_IO = 6,
  CBM_STATUS_NULL_POINTER = 7,
  CBM_STATUS_INVALID_UTF8 = 8,
  CBM_STATUS_PANIC = 9,
} CbmStatus;

/*
 A parsed expression.
 */
typedef struct CbmExpr CbmExpr;

/*
 A weighted Bergman model of one fibre.
 */
typedef struct CbmModel CbmModel;

/*
 The result of a scenario run.
 */
typedef struct CbmReport CbmReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread; empty after a success.
 Valid until the next call on the same thread.
 */
const char *cbm_last_error(void);

/*
 Library version as a static string.
 */
const char *cbm_version(void);

/*
 Frees a string returned by this library.

 # Safety
 `s` must come from this library and not be freed twice.
 */
void cbm_string_free(char *s);

/*
 Parses an expression in `t1..tm` and `z1..zn`.

 # Safety
 `text` must be a NUL-terminated string and `out` writable.
 */
enum CbmStatus cbm_expr_parse(const char *text, struct CbmExpr **out);

/*
 Evaluates an expression at base point `t` (length `m`) and fibre point
 `z` (length `n`), given as separate real and imaginary arrays.

 # Safety
 Arrays must hold the stated lengths; outputs must be writable.
 */
enum CbmStatus cbm_expr_eval(const struct CbmExpr *expr,
                             const double *t_re,
                             const double *t_im,
                             size_t m,
                             const double *z_re,
                             const double *z_im,
                             size_t n,
                             double *out_re,
                             double *out_im);

/*
 # Safety
 `expr` must come from [`cbm_expr_parse`] and not be freed twice.
 */
void cbm_expr_free(struct CbmExpr *expr);

/*
 Builds the Bergman model of the fibre over `t` of the one-dimensional
 family with defining function `rho` and weight `phi` (empty for 0).
 Zero for `degree`, `radial_order` or `angular_order` selects the default.

 # Safety
 Strings must be NUL-terminated and `out` writable.
 */
enum CbmStatus cbm_model_build(const char *rho,
                               const char *phi,
                               double t_re,
                               double t_im,
                               size_t degree,
                               size_t radial_order,
                               size_t angular_order,
                               struct CbmModel **out);

/*
 Number of retained basis functions.

 # Safety
 `model` must be a live handle.
 */
enum CbmStatus cbm_model_dim(const struct CbmModel *model, size_t *out);

/*
 Kernel derivative ∂_ζ^α ∂_η̄^β K(ζ, η); α = β = 0 gives the kernel.

 # Safety
 `model` must be a live handle; outputs must be writable.
 */
enum CbmStatus cbm_model_kernel(const struct CbmModel *model,
                                size_t alpha,
                                size_t beta,
                                double zeta_re,
                                double zeta_im,
                                double eta_re,
                                double eta_im,
                                double *out_re,
                                double *out_im);

/*
 # Safety
 `model` must come from [`cbm_model_build`] and not be freed twice.
 */
void cbm_model_free(struct CbmModel *model);

/*
 Runs a scenario given as JSON text. `grid` of 0 keeps the scenario grid;
 `timings` of 0 leaves timings out of the report. A report is produced
 both for passing runs and for [`CbmStatus::VerdictFailed`].

 # Safety
 `scenario` must be NUL-terminated and `out` writable.
 */
enum CbmStatus cbm_run_scenario(const char *scenario,
                                double tol_scale,
                                size_t grid,
                                int32_t timings,
                                struct CbmReport **out);

/*
 1 when every verdict passed or was skipped, else 0.

 # Safety
 `report` must be a live handle.
 */
int32_t cbm_report_passed(const struct CbmReport *report);

/*
 The JSON report, owned by the handle.

 # Safety
 `report` must be a live handle; the string dies with it.
 */
const char *cbm_report_json(const struct CbmReport *report);

/*
 A named scalar of the report.

 # Safety
 `report` must be a live handle, `name` NUL-terminated, `out` writable.
 */
enum CbmStatus cbm_report_value(const struct CbmReport *report, const char *name, double *out);

/*
 The scan CSV as a new string, or null when the scenario has none. Free
 with [`cbm_string_free`].

 # Safety
 `report` must be a live handle.
 */
char *cbm_report_csv(const struct CbmReport *report);

/*
 # Safety
 `report` must come from [`cbm_run_scenario`] and not be freed twice.
 */
void cbm_report_free(struct CbmReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CBMLAB_H */
