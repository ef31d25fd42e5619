/* crosscurve: numerical verification of nonnegative cross-curvature for cost
 * spaces -- chord/max/convexity checks along variational segments, MTW tensor
 * scans, exact discrete optimal transport lifts, Gromov-Wasserstein and cone
 * costs.
 *
 * C interface over the C++ core. Requests and reports travel as JSON strings;
 * results are held behind an opaque handle until freed.
 */

#ifndef CROSSCURVE_H
#define CROSSCURVE_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cc_status {
  CC_OK = 0,           /* request ran and every check passed */
  CC_CHECK_FAILED = 1, /* request ran; a check failed or a module error occurred */
  CC_USAGE_ERROR = 2,  /* malformed request */
  CC_IO_ERROR = 3      /* reserved for callers writing files */
} cc_status;

typedef struct cc_report cc_report;

/* Dispatch a JSON request, e.g.
 *   {"cmd":"verify","check":"nncc","family":{"family":"hilbert","dim":3},
 *    "trials":200,"seed":42}
 * Commands: verify, counterexample, mtw, lift, gw, gh, cone.
 * On CC_OK and CC_CHECK_FAILED *out (if non-null) receives a report handle
 * to be released with cc_report_free. Identical requests produce
 * byte-identical reports.
 */
cc_status cc_run(const char* request_json, cc_report** out);

/* JSON text of the report; owned by the handle. */
const char* cc_report_json(const cc_report* report);

/* 1 when every check in the report passed ("no violation found"), else 0. */
int cc_report_passed(const cc_report* report);

/* Number of named CSV artifacts attached to the report. */
int cc_report_artifact_count(const cc_report* report);
const char* cc_report_artifact_name(const cc_report* report, int index);
const char* cc_report_artifact_data(const cc_report* report, int index);
/* Artifact content by name; null when absent. */
const char* cc_report_artifact(const cc_report* report, const char* name);

void cc_report_free(cc_report* report);

/* Message of the most recent failure on this thread; empty string if none. */
const char* cc_last_error(void);

const char* cc_version(void);

#ifdef __cplusplus
}
#endif

#endif /* CROSSCURVE_H */
