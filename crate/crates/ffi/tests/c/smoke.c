#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "bridgeham.h"

#define CHECK(cond)                                                  \
  do {                                                               \
    if (!(cond)) {                                                   \
      const char *m = bh_last_error_message();                       \
      fprintf(stderr, "line %d: %s (%s)\n", __LINE__, #cond, m ? m : ""); \
      return 1;                                                      \
    }                                                                \
  } while (0)

int main(void) {
  BhParams p = {400, 0.0, 150.0, 1.0, 1.0, 9, 1};
  BhTiling t;
  CHECK(bh_params_compute(&p, &t) == BH_STATUS_OK);
  CHECK(t.k == 5);

  BhTrial *trial = NULL;
  CHECK(bh_trial_run(&p, BH_MODE_STRICT, 1, &trial) == BH_STATUS_OK);
  BhEvents ev;
  CHECK(bh_trial_events(trial, &ev) == BH_STATUS_OK);
  CHECK(ev.h && ev.success);

  size_t len = bh_trial_cycle_len(trial);
  CHECK(len == 400);
  size_t *order = malloc(len * sizeof *order);
  CHECK(bh_trial_cycle(trial, order, len) == BH_STATUS_OK);
  char *seen = calloc(len, 1);
  for (size_t i = 0; i < len; i++) {
    CHECK(order[i] < len && !seen[order[i]]);
    seen[order[i]] = 1;
  }
  free(seen);
  free(order);

  char *json = NULL;
  CHECK(bh_trial_report_json(trial, &json) == BH_STATUS_OK);
  CHECK(strstr(json, "\"success\":true") != NULL);
  bh_string_free(json);
  bh_trial_free(trial);

  p.l = 8;
  CHECK(bh_trial_run(&p, BH_MODE_STRICT, 1, &trial) == BH_STATUS_INVALID_PARAMS);
  CHECK(trial == NULL);
  CHECK(strstr(bh_last_error_message(), "L must be >= 9") != NULL);
  puts("ok");
  return 0;
}
