#ifndef CONVOY_H
#define CONVOY_H

/* Generated by cbindgen from crates/ffi; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ConvoyStatus {
  CONVOY_STATUS_OK = 0,
  CONVOY_STATUS_NULL_POINTER = 1,
  CONVOY_STATUS_INVALID_ARGUMENT = 2,
  CONVOY_STATUS_PARSE = 3,
  CONVOY_STATUS_VALIDATION = 4,
  CONVOY_STATUS_IO = 5,
  CONVOY_STATUS_TRACK = 6,
  CONVOY_STATUS_POSE = 7,
  CONVOY_STATUS_PANIC = 8,
} ConvoyStatus;

typedef enum ConvoyFeatures {
  CONVOY_FEATURES_HUE = 0,
  CONVOY_FEATURES_HUE_SAT = 1,
  CONVOY_FEATURES_HUE_SAT_LBP = 2,
} ConvoyFeatures;

typedef enum ConvoyTrackStatus {
  CONVOY_TRACK_STATUS_LOCKED = 0,
  CONVOY_TRACK_STATUS_PARTIAL = 1,
  CONVOY_TRACK_STATUS_FULL = 2,
  CONVOY_TRACK_STATUS_LOST = 3,
} ConvoyTrackStatus;

typedef struct ConvoyRun ConvoyRun;

typedef struct ConvoyScenario ConvoyScenario;

typedef struct ConvoyTracker ConvoyTracker;

typedef struct ConvoyTelemetryRow {
  double t;
  double leader_x;
  double leader_y;
  double leader_psi;
  double follower_x;
  double follower_y;
  double follower_psi;
  double range_true;
  // NaN until the first pose fix.
  double range_est;
  double bearing_est;
  double cmd_speed;
  double cmd_heading;
  double track_cx;
  double track_cy;
  double track_area;
  // 0 locked, 1 partial, 2 full occlusion, 3 lost or not yet acquired.
  uint8_t status;
} ConvoyTelemetryRow;

// Run summary; times and errors that never occurred are NaN and
// `max_relock_frames` is -1 when no relock happened.
typedef struct ConvoySummary {
  size_t steps;
  size_t frames;
  double acquired_at;
  double converged_at;
  double max_bearing_error_after_convergence;
  double final_range_error;
  size_t frames_locked;
  size_t frames_partial;
  size_t frames_full;
  size_t frames_lost;
  size_t occlusion_episodes;
  int64_t max_relock_frames;
  double track_lost_at;
  double max_cmd_speed;
  double max_abs_cmd_heading;
} ConvoySummary;

typedef struct ConvoyRect {
  size_t x;
  size_t y;
  size_t w;
  size_t h;
} ConvoyRect;

// Moment-equivalent target rectangle in continuous pixel coordinates.
typedef struct ConvoyTargetBox {
  double cx;
  double cy;
  double width;
  double height;
  double angle;
} ConvoyTargetBox;

typedef struct ConvoyTrackReport {
  uint64_t frame;
  enum ConvoyTrackStatus status;
  // Track center; the filter prediction when the target is not measured.
  double centroid_x;
  double centroid_y;
  struct ConvoyRect search_window;
  struct ConvoyRect window;
  double m00;
  double predicted_area;
  size_t iterations;
  // `target` is meaningful only when set (locked frames).
  bool has_target;
  struct ConvoyTargetBox target;
  // The appearance model was blended with the current frame.
  bool refreshed;
} ConvoyTrackReport;

typedef struct ConvoyCamera {
  double focal_px;
  double cx;
  double cy;
  size_t img_w;
  size_t img_h;
  double marker_width_m;
  double marker_height_m;
} ConvoyCamera;

// Relative pose of the marker: bearing is positive to the right of the
// optical axis; angles in radians, range in metres.
typedef struct ConvoyPose {
  double bearing;
  double marker_yaw;
  double los_angle;
  double range;
} ConvoyPose;

typedef struct ConvoyGains {
  double eta_z;
  double eta_beta;
  double lambda;
  double boundary_layer;
  double u_max;
  double delta_max;
  // Use the discontinuous sign law instead of the boundary-layer saturation.
  bool pure_sgn;
} ConvoyGains;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *convoy_version(void);

// Message of the most recent failure on this thread, or NULL. The pointer
// stays valid until the next failing call on the same thread.
const char *convoy_last_error(void);

// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum ConvoyStatus convoy_scenario_load(const char *path, struct ConvoyScenario **out);

// # Safety
// `source` must be a NUL-terminated string; `out` must be writable.
enum ConvoyStatus convoy_scenario_parse(const char *source, struct ConvoyScenario **out);

// # Safety
// `scenario` must come from `convoy_scenario_load` or `convoy_scenario_parse`.
enum ConvoyStatus convoy_scenario_set_seed(struct ConvoyScenario *scenario, uint64_t seed);

// # Safety
// `scenario` must come from `convoy_scenario_load` or `convoy_scenario_parse`.
enum ConvoyStatus convoy_scenario_set_frame_stride(struct ConvoyScenario *scenario, size_t stride);

// Number of control steps the scenario runs for; 0 for NULL.
//
// # Safety
// `scenario` must be NULL or a live scenario handle.
size_t convoy_scenario_steps(const struct ConvoyScenario *scenario);

// # Safety
// `scenario` must be NULL or a live scenario handle; it is invalid afterwards.
void convoy_scenario_free(struct ConvoyScenario *scenario);

// Runs the scenario to completion.
//
// # Safety
// `scenario` must be a live scenario handle; `out` must be writable.
enum ConvoyStatus convoy_run(const struct ConvoyScenario *scenario, struct ConvoyRun **out);

// Number of telemetry rows (one per control step); 0 for NULL.
//
// # Safety
// `run` must be NULL or a live run handle.
size_t convoy_run_row_count(const struct ConvoyRun *run);

// # Safety
// `run` must be a live run handle; `out` must be writable.
enum ConvoyStatus convoy_run_row(const struct ConvoyRun *run,
                                 size_t index,
                                 struct ConvoyTelemetryRow *out);

// # Safety
// `run` must be a live run handle; `out` must be writable.
enum ConvoyStatus convoy_run_summary(const struct ConvoyRun *run, struct ConvoySummary *out);

// Writes the telemetry as CSV with a header line.
//
// # Safety
// `run` must be a live run handle; `path` a NUL-terminated string.
enum ConvoyStatus convoy_run_write_telemetry(const struct ConvoyRun *run, const char *path);

// # Safety
// `run` must be NULL or a live run handle; it is invalid afterwards.
void convoy_run_free(struct ConvoyRun *run);

// Hue of an RGB colour on the 0..180 scale used by `convoy_tracker_acquire`.
uint8_t convoy_hue(uint8_t r, uint8_t g, uint8_t b);

// Starts a track on `window` of the first frame.
//
// # Safety
// `rgb` must hold `width * height * 3` bytes; `out` must be writable.
enum ConvoyStatus convoy_tracker_new(const uint8_t *rgb,
                                     size_t width,
                                     size_t height,
                                     struct ConvoyRect window,
                                     enum ConvoyFeatures features,
                                     bool refresh,
                                     struct ConvoyTracker **out);

// Finds the marker of hue `target_hue` (0..180) and starts a track on it.
//
// # Safety
// `rgb` must hold `width * height * 3` bytes; `out` must be writable.
enum ConvoyStatus convoy_tracker_acquire(const uint8_t *rgb,
                                         size_t width,
                                         size_t height,
                                         uint8_t target_hue,
                                         enum ConvoyFeatures features,
                                         bool refresh,
                                         struct ConvoyTracker **out);

// Tracks one frame, which must have the size of the first frame.
//
// # Safety
// `tracker` must be a live tracker handle; `rgb` must hold
// `width * height * 3` bytes; `out` must be writable.
enum ConvoyStatus convoy_tracker_process(struct ConvoyTracker *tracker,
                                         const uint8_t *rgb,
                                         size_t width,
                                         size_t height,
                                         struct ConvoyTrackReport *out);

// # Safety
// `tracker` must be NULL or a live tracker handle; it is invalid afterwards.
void convoy_tracker_free(struct ConvoyTracker *tracker);

// Camera with the principal point at the image center.
struct ConvoyCamera convoy_camera_centered(size_t width,
                                           size_t height,
                                           double focal_px,
                                           double marker_width_m,
                                           double marker_height_m);

// # Safety
// `camera` and `target` must be readable; `out` must be writable.
enum ConvoyStatus convoy_estimate_pose(const struct ConvoyCamera *camera,
                                       const struct ConvoyTargetBox *target,
                                       struct ConvoyPose *out);

struct ConvoyGains convoy_gains_default(void);

// Wraps an angle to (-pi, pi].
double convoy_wrap_angle(double angle);

// Heading-rate command from the bearing error and its rate.
//
// # Safety
// `gains` must be readable; `out` must be writable.
enum ConvoyStatus convoy_follower_heading(const struct ConvoyGains *gains,
                                          double bearing_error,
                                          double bearing_rate,
                                          double *out);

// Speed command from the leader state `{x, y, vx, vy}`, the follower pose
// `{x, y, psi}` and the range error; `prev_speed` is held when the heading
// is nearly perpendicular to the line of sight.
//
// # Safety
// `gains` must be readable, `leader` must hold 4 and `follower` 3 doubles;
// `out` must be writable.
enum ConvoyStatus convoy_follower_speed(const struct ConvoyGains *gains,
                                        const double *leader,
                                        const double *follower,
                                        double range_error,
                                        double prev_speed,
                                        double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CONVOY_H */
