#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "omx/omx.h"

static int failures = 0;

#define EXPECT(cond)                                               \
  do {                                                             \
    if (!(cond)) {                                                 \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                  \
    }                                                              \
  } while (0)

int main(int argc, char** argv) {
  if (argc < 2) {
    fprintf(stderr, "usage: capi_test <data-dir>\n");
    return 2;
  }
  char path[4096];
  omx_scenario* s = NULL;
  omx_report* r = NULL;
  size_t n = 0;

  EXPECT(strlen(omx_version()) > 0);
  EXPECT(strcmp(omx_status_string(OMX_ERR_CONFIG), "") != 0);

  snprintf(path, sizeof path, "%s/small.toml", argv[1]);
  EXPECT(omx_scenario_from_file(path, &s) == OMX_OK);
  EXPECT(s != NULL);
  EXPECT(strstr(omx_scenario_text(s), "name = \"small\"") != NULL);

  EXPECT(omx_scenario_set(s, "kapa", "0.1") == OMX_ERR_CONFIG);
  EXPECT(strstr(omx_last_error(), "kapa") != NULL);
  EXPECT(omx_scenario_set(s, "kappa", "-1") == OMX_ERR_CONFIG);
  EXPECT(strstr(omx_scenario_text(s), "kappa = 0.05") != NULL);
  EXPECT(omx_scenario_set(s, "name", "\"capi\"") == OMX_OK);

  EXPECT(omx_run(s, "capi_out", &r) == OMX_OK);
  EXPECT(r != NULL && omx_report_passed(r));
  EXPECT(r != NULL && strstr(omx_report_text(r), "capi_nth0.csv") != NULL);
  omx_report_free(r);
  r = NULL;
  FILE* f = fopen("capi_out/capi_nth0.json", "r");
  EXPECT(f != NULL);
  if (f) fclose(f);

  EXPECT(omx_converge(s, &r) == OMX_OK);
  omx_report_free(r);
  r = NULL;
  omx_scenario_free(s);
  s = NULL;

  snprintf(path, sizeof path, "%s/typo.toml", argv[1]);
  EXPECT(omx_scenario_from_file(path, &s) == OMX_ERR_CONFIG);
  EXPECT(s == NULL);
  EXPECT(strstr(omx_last_error(), "kapa") != NULL);
  EXPECT(omx_scenario_from_file("missing.toml", &s) == OMX_ERR_IO);
  EXPECT(omx_scenario_from_text("g0 = 0.5\ng0 = 0.6\n", &s) == OMX_ERR_CONFIG);

  EXPECT(omx_preset_count("fig4", &n) == OMX_OK && n == 2);
  EXPECT(omx_preset_count("fig9", &n) == OMX_ERR_CONFIG);
  EXPECT(omx_scenario_preset("fig4", 2, &s) == OMX_ERR_INVALID_ARGUMENT);
  EXPECT(omx_scenario_preset("fig4", 1, &s) == OMX_OK);
  EXPECT(strstr(omx_scenario_text(s), "g2 = 0.5") != NULL);
  omx_scenario_free(s);

  EXPECT(omx_scenario_from_text(NULL, &s) == OMX_ERR_INVALID_ARGUMENT);
  EXPECT(omx_run(NULL, "x", &r) == OMX_ERR_INVALID_ARGUMENT);
  omx_scenario_free(NULL);
  omx_report_free(NULL);

  if (failures) {
    fprintf(stderr, "%d failure(s)\n", failures);
    return 1;
  }
  puts("capi: all checks passed");
  return 0;
}
