/* hessgeo: Hessian / Lagrange curvature verification engine, C interface.
 *
 * All entry points take JSON text and produce an opaque report handle whose
 * JSON payload can be read back with hg_report_json(). Status codes mirror
 * the CLI exit-code contract. On statuses other than HG_OK the report (when
 * one is produced) carries an "errors" array with diagnostics.
 */
#ifndef HESSGEO_H
#define HESSGEO_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hg_status {
    HG_OK = 0,             /* run complete, every check behaved as expected */
    HG_CHECK_FAILURE = 1,  /* run complete, at least one check failed */
    HG_INVALID_INPUT = 2,  /* scenario/options validation or parse error */
    HG_DOMAIN_ERROR = 3,   /* numeric domain error (log of <= 0, singular metric, ...) */
    HG_INTERNAL_ERROR = 4
} hg_status;

typedef struct hg_report hg_report;

const char* hg_version(void);

/* options_json is optional (NULL for defaults):
 *   {"seed": <uint64>, "tolerance_scale": <double>, "dump_tensors": <bool>}
 */
hg_status hg_run_scenario(const char* scenario_json, const char* options_json,
                          hg_report** out_report);

/* Single-point tensor dump for a scenario's chart. `point` has m coordinates
 * for hessian scenarios and 2m (x then y) otherwise. */
hg_status hg_inspect_point(const char* scenario_json, const double* point, size_t point_len,
                           const char* options_json, hg_report** out_report);

/* Runs every built-in scenario and produces one combined report. */
hg_status hg_run_corpus(const char* options_json, hg_report** out_report);

/* Runs only the jet-versus-finite-difference audit of a scenario. */
hg_status hg_fd_audit(const char* scenario_json, const char* options_json,
                      hg_report** out_report);

/* Report accessors. The string is owned by the report handle. */
const char* hg_report_json(const hg_report* report);
int hg_report_pass(const hg_report* report); /* 1 when every check behaved as expected */
void hg_report_free(hg_report* report);

/* Built-in scenario registry. */
int hg_corpus_count(void);
const char* hg_corpus_name(int index);                 /* NULL when out of range */
const char* hg_corpus_scenario_json(const char* name); /* NULL when unknown */

#ifdef __cplusplus
}
#endif

#endif /* HESSGEO_H */
