/* C interface to the VPP market simulator. All functions return a
 * vppm_status; outputs are via out-parameters. Strings returned through
 * char** are heap-allocated and must be released with vppm_string_free.
 * Error details for the calling thread are kept in thread-local storage
 * and read back with vppm_last_error / vppm_last_error_name. */
#ifndef VPPMARKET_H
#define VPPMARKET_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum vppm_status {
  VPPM_OK = 0,
  VPPM_EPARSE = 1,      /* malformed input */
  VPPM_EVALIDATION = 2, /* scenario invariant violated */
  VPPM_ESOLVER = 3,     /* solver failed or dispatch infeasible */
  VPPM_EGUARD = 4,      /* brute-force guard tripped */
  VPPM_ECHECK = 5,      /* a requested check did not pass */
  VPPM_EARG = 6         /* bad argument (null handle, unknown key, ...) */
} vppm_status;

typedef struct vppm_scenario vppm_scenario;
typedef struct vppm_result vppm_result;

/* Scenario lifecycle */
vppm_status vppm_scenario_load(const char* path, vppm_scenario** out);
vppm_status vppm_scenario_parse(const char* json_text, vppm_scenario** out);
void vppm_scenario_free(vppm_scenario* s);

/* Validation report as a JSON array of {field, rule, advisory}; empty
 * array means the scenario is valid. Returns VPPM_OK either way unless
 * the handle is null. */
vppm_status vppm_scenario_validate(const vppm_scenario* s, char** report_json);

/* Solver overrides. Keys: eval_budget, seed, restarts, feas_tol,
 * comp_tol. Integral keys truncate the value. */
vppm_status vppm_scenario_set(vppm_scenario* s, const char* key, double value);

/* Runs the requested mode(s). mode: 1, 2, or 3 (= both). */
vppm_status vppm_run(const vppm_scenario* s, int mode, vppm_result** out);
void vppm_result_free(vppm_result* r);

/* Full machine-readable result (the result.json payload). */
vppm_status vppm_result_json(const vppm_result* r, char** json_text);

/* Emitted files (CSV reports plus result.json), for the caller to write. */
vppm_status vppm_result_file_count(const vppm_result* r, size_t* count);
vppm_status vppm_result_file_name(const vppm_result* r, size_t i, char** name);
vppm_status vppm_result_file_content(const vppm_result* r, size_t i,
                                     char** content);

/* Scalar probes used by callers that do not want to parse JSON. */
vppm_status vppm_result_leader_objective(const vppm_result* r, double* out);
vppm_status vppm_result_identity_residual(const vppm_result* r, double* out);
vppm_status vppm_result_vpp_count(const vppm_result* r, size_t* out);
/* mode: 1 or 2 */
vppm_status vppm_result_vpp_cost(const vppm_result* r, size_t j, int mode,
                                 double* out);

/* Brute-force cross-check of the solvers on a small scenario.
 * Returns VPPM_OK when every delta is within its documented bound,
 * VPPM_ECHECK when some delta exceeds it, VPPM_EGUARD when the scenario
 * is too large to enumerate. report_json (optional) receives per-check
 * deltas and bounds. */
vppm_status vppm_oracle_check(const vppm_scenario* s, int price_points,
                              double power_step, char** report_json);

void vppm_string_free(char* s);

/* Message / exception-class name for the last failing call on this
 * thread. Stable storage until the next failing call. */
const char* vppm_last_error(void);
const char* vppm_last_error_name(void);

#ifdef __cplusplus
}
#endif

#endif /* VPPMARKET_H */
