#ifndef CMLAB_H
#define CMLAB_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  CMLAB_OK = 0,
  CMLAB_INVALID_ARGUMENT = 1,
  CMLAB_DIMENSION_MISMATCH = 2,
  CMLAB_NOT_POSITIVE_DEFINITE = 3,
  CMLAB_NONCONVEX = 4,
  CMLAB_SINGULAR = 5,
  CMLAB_SOLVER_FAILURE = 6,
  CMLAB_OUT_OF_SUPPORT = 7,
  CMLAB_IO_ERROR = 8,
  CMLAB_FORMAT_ERROR = 9,
  CMLAB_INTERNAL_ERROR = 10
} cmlab_status;

typedef struct cmlab_field cmlab_field;

/* Message of the last failing call on this thread ("" if none). */
const char* cmlab_last_error(void);
const char* cmlab_status_name(int status);
const char* cmlab_version(void);

/* Strings returned through char** out-parameters are owned by the caller. */
void cmlab_string_free(char* s);

/* Property suites over random quadratic gauges. Result JSON:
   {"name", "trials", "failures", "worst_margin", "witness"}. */
int cmlab_lemma_suite_count(void);
const char* cmlab_lemma_suite_name(int index);
int cmlab_lemma_suite_run(const char* name, int trials, uint64_t seed, char** result_json);
/* Test hook: drops the phase correction in the Takagi factorization. */
void cmlab_set_takagi_fault(int on);

/* Solve an experiment (JSON text; relative domain paths resolve against base_dir).
   On CMLAB_SOLVER_FAILURE the report and the last field are still returned. */
int cmlab_solve(const char* experiment_json, const char* base_dir, cmlab_field** field, char** report_json);
/* Output directory and requested checks of an experiment, as JSON {"output", "checks", "seed"}. */
int cmlab_experiment_info(const char* experiment_json, const char* base_dir, char** info_json);

int cmlab_field_read(const char* path, cmlab_field** out);
int cmlab_field_from_json(const char* text, cmlab_field** out);
int cmlab_field_write(const cmlab_field* field, const char* path);
int cmlab_field_to_json(const cmlab_field* field, char** text);
void cmlab_field_free(cmlab_field* field);
int cmlab_field_dim(const cmlab_field* field, int* n);
int cmlab_field_eps(const cmlab_field* field, double* eps);
/* "analytic", "radial", "reinhardt" or "full". */
int cmlab_field_rep(const cmlab_field* field, const char** rep);
/* z_real holds 2n interleaved real coordinates. */
int cmlab_field_value(const cmlab_field* field, const double* z_real, double* value);

/* Tangent gauge at a point; eps < 0 uses the field's eps. */
int cmlab_gauge(const cmlab_field* field, const double* z_real, double eps, char** gauge_json);

/* Runs comma-separated checks (NULL or "all" for every check) with the field's eps and metric.
   failures receives the number of failed checks. */
int cmlab_verify(const cmlab_field* field, const char* checks, uint64_t seed, char** report_json, int* failures);
/* Comma-separated names of the available checks (static storage). */
const char* cmlab_check_names(void);

/* Leaf through z_real (n = 2 fields). Writes the CSV dump and the leaf residuals. */
int cmlab_leaf(const cmlab_field* field, const double* z_real, double radius, int steps, char** csv,
               double* harmonicity, double* cauchy_riemann);

/* Subsolution on a ring (domain JSON) with metric JSON (NULL for identity). Result JSON reports
   ordering, boundary errors, psh margin and the inner normal derivative. */
int cmlab_subsolution(const char* ring_json, const char* metric_json, double c, uint64_t seed, char** result_json);

/* Member t of the deformation family of a ring; radius targets r, R (<= 0 keeps the default). */
int cmlab_deform(const char* ring_json, double t, double r, double R, char** ring_out_json);

#ifdef __cplusplus
}
#endif

#endif
