#ifndef OMX_OMX_H
#define OMX_OMX_H

/*
 * C interface to the omx engine.
 *
 * Every function returns an omx_status; on anything other than OMX_OK or
 * OMX_FAIL, omx_last_error() describes the failure (per thread). Handles
 * are opaque and owned by the caller, who releases them with the matching
 * *_free function. Free functions accept NULL.
 */

#include <stddef.h>

#if defined(OMX_BUILDING_LIBRARY)
#define OMX_API __attribute__((visibility("default")))
#else
#define OMX_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum omx_status {
  OMX_OK = 0,
  OMX_FAIL = 1, /* completed, but a check or expectation failed */
  OMX_ERR_INVALID_ARGUMENT = 2,
  OMX_ERR_CONFIG = 3,
  OMX_ERR_IO = 4,
  OMX_ERR_SOLVER = 5,
  OMX_ERR_INTERNAL = 6
} omx_status;

typedef struct omx_scenario omx_scenario;
typedef struct omx_report omx_report;

OMX_API const char* omx_version(void);
OMX_API const char* omx_status_string(omx_status status);
OMX_API const char* omx_last_error(void);

OMX_API omx_status omx_scenario_from_file(const char* path, omx_scenario** out);
OMX_API omx_status omx_scenario_from_text(const char* text, omx_scenario** out);

/* Presets: "fig2", "fig3", "fig4" (two sub-scenarios), "fig4_equal",
 * "fig4_unequal". */
OMX_API omx_status omx_preset_count(const char* name, size_t* count);
OMX_API omx_status omx_scenario_preset(const char* name, size_t index,
                                       omx_scenario** out);

/* Sets one configuration key; `value` uses config-file syntax. The result
 * is revalidated; on error the scenario is left unchanged. */
OMX_API omx_status omx_scenario_set(omx_scenario* scenario, const char* key,
                                    const char* value);

/* Config text of the scenario, valid until the handle changes or is freed. */
OMX_API const char* omx_scenario_text(omx_scenario* scenario);
OMX_API void omx_scenario_free(omx_scenario* scenario);

/* Simulates and writes CSV + JSON sidecars into out_dir. Returns OMX_FAIL
 * (with a report) when a convergence, validity or expectation check fails. */
OMX_API omx_status omx_run(const omx_scenario* scenario, const char* out_dir,
                           omx_report** report);
OMX_API omx_status omx_converge(const omx_scenario* scenario,
                                omx_report** report);
OMX_API omx_status omx_validate(omx_report** report);

OMX_API int omx_report_passed(const omx_report* report);
OMX_API const char* omx_report_text(const omx_report* report);
OMX_API void omx_report_free(omx_report* report);

#ifdef __cplusplus
}
#endif

#endif
