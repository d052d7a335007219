#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "convoy.h"

#define CHECK(cond)                                                     \
  do {                                                                  \
    if (!(cond)) {                                                      \
      const char *e = convoy_last_error();                              \
      fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__, #cond,    \
              e ? e : "no error");                                      \
      return 1;                                                         \
    }                                                                   \
  } while (0)

static const char *SCENARIO =
    "[camera]\nwidth = 160\nheight = 120\nfocal = 100\n"
    "[leader]\nwaypoints = 0,0; 50,0\n"
    "[formation]\ns_com = 2\n"
    "[run]\nduration = 1\n";

int main(void) {
  CHECK(strlen(convoy_version()) > 0);

  ConvoyScenario *sc = NULL;
  CHECK(convoy_scenario_parse(SCENARIO, &sc) == CONVOY_STATUS_OK);
  CHECK(convoy_scenario_steps(sc) == 100);

  ConvoyRun *run = NULL;
  CHECK(convoy_run(sc, &run) == CONVOY_STATUS_OK);
  CHECK(convoy_run_row_count(run) == 100);
  ConvoyTelemetryRow row;
  CHECK(convoy_run_row(run, 99, &row) == CONVOY_STATUS_OK);
  CHECK(fabs(row.t - 0.99) < 1e-9);
  ConvoySummary summary;
  CHECK(convoy_run_summary(run, &summary) == CONVOY_STATUS_OK);
  CHECK(summary.steps == 100);
  convoy_run_free(run);
  convoy_scenario_free(sc);

  ConvoyScenario *bad = NULL;
  CHECK(convoy_scenario_parse("[formation]\ns_com = -1\n", &bad) == CONVOY_STATUS_VALIDATION);
  CHECK(bad == NULL && convoy_last_error() != NULL);

  size_t w = 96, h = 72;
  uint8_t *rgb = malloc(w * h * 3);
  for (size_t y = 0; y < h; y++)
    for (size_t x = 0; x < w; x++) {
      uint8_t *p = rgb + 3 * (y * w + x);
      int inside = x >= 30 && x < 46 && y >= 30 && y < 40;
      p[0] = inside ? 230 : 100;
      p[1] = inside ? 30 : 110;
      p[2] = inside ? 30 : 105;
    }
  ConvoyTracker *t = NULL;
  CHECK(convoy_tracker_acquire(rgb, w, h, convoy_hue(230, 30, 30),
                               CONVOY_FEATURES_HUE_SAT, true, &t) == CONVOY_STATUS_OK);
  ConvoyTrackReport rep;
  CHECK(convoy_tracker_process(t, rgb, w, h, &rep) == CONVOY_STATUS_OK);
  CHECK(rep.status == CONVOY_TRACK_STATUS_LOCKED && rep.has_target);
  CHECK(fabs(rep.target.cx - 38.0) < 1.0 && fabs(rep.target.cy - 35.0) < 1.0);
  convoy_tracker_free(t);
  free(rgb);

  ConvoyCamera cam = convoy_camera_centered(640, 480, 320.0, 0.9, 0.5);
  ConvoyTargetBox box = {320.0, 240.0, 36.0, 20.0, 0.0};
  ConvoyPose pose;
  CHECK(convoy_estimate_pose(&cam, &box, &pose) == CONVOY_STATUS_OK);
  CHECK(fabs(pose.range - 8.0) < 1e-9);

  ConvoyGains g = convoy_gains_default();
  double delta = 0.0;
  CHECK(convoy_follower_heading(&g, 0.2, 0.0, &delta) == CONVOY_STATUS_OK);
  CHECK(delta < 0.0 && delta >= -g.delta_max);
  CHECK(convoy_follower_heading(NULL, 0.2, 0.0, &delta) == CONVOY_STATUS_NULL_POINTER);

  puts("ok");
  return 0;
}
