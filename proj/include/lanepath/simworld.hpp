// Synthetic track, camera-view mask renderer, Frenet-frame kinematic
// bicycle, lane-keeping controller, static and dynamic evaluation runs.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lanepath/imagekit.hpp"
#include "lanepath/pipeline.hpp"
#include "lanepath/viewgeom.hpp"

namespace lanepath {

struct TrackSegment {
  double length = 0.0;     // m
  double curvature = 0.0;  // 1/m, positive bends left
};

struct TrackSpec {
  std::vector<TrackSegment> segments;
  double blend_length = 30.0;  // linear curvature ramp across boundaries
  double lane_width = 3.5;
};

// Maximum |curvature| accepted by build_track; one order above real-road
// maxima (minimum radius of general roads ~130-160 m).
inline constexpr double kMaxTrackCurvature = 0.07;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

// Arc-length parameterized centerline. Beyond both ends the track extends
// with the end curvature so lookahead sampling and rendering stay defined
// near the finish line.
class Track {
 public:
  double length() const { return length_; }
  double lane_width() const { return lane_width_; }
  double kappa(double s) const;
  double heading(double s) const;
  Vec2 position(double s) const;
  // Centerline point displaced laterally (positive left of travel).
  Vec2 offset_point(double s, double lateral) const;

 private:
  friend Track build_track(const TrackSpec& spec);
  double length_ = 0.0;
  double lane_width_ = 3.5;
  double step_ = 0.1;
  std::vector<double> kappa_knot_s_;  // piecewise-linear curvature profile
  std::vector<double> kappa_knot_v_;
  std::vector<double> theta_knot_;  // exact heading integral at each knot
  std::vector<double> theta_;       // heading samples every step_
  std::vector<double> x_;
  std::vector<double> y_;
};

// Throws std::invalid_argument on empty/non-positive segments, curvature
// beyond kMaxTrackCurvature, or blend zones that overlap.
Track build_track(const TrackSpec& spec);

struct VehicleState {
  double s = 0.0;    // m along centerline
  double d = 0.0;    // m lateral offset, positive left of centerline
  double psi = 0.0;  // rad heading error vs centerline tangent
  double v = 0.0;    // m/s
};

inline constexpr double kWheelbase = 2.7;  // m

struct OccluderRect {
  long frame_begin = 0;  // inclusive
  long frame_end = 0;    // exclusive
  int x0 = 0, y0 = 0;    // top-left, inclusive
  int x1 = 0, y1 = 0;    // bottom-right, exclusive
};

struct RenderOptions {
  double line_width = 0.12;     // lane-line width, m
  double pixel_noise_sd = 0.0;  // Gaussian sd in probability units
  double dropout_rate = 0.0;    // fraction of line pixels deleted
  std::vector<OccluderRect> occluders;
  std::uint64_t seed = 1;
};

// Projects both ego-lane lines through the vehicle-relative camera and
// rasterizes them with the given metric width, then applies dropout, pixel
// noise (clamped to [0,1]) and occluders. Deterministic given (seed, frame).
GrayMask render_mask(const Track& track, const VehicleState& vehicle,
                     const CameraModel& cam, const RenderOptions& opts,
                     long frame_idx = 0);

struct GroundTruth {
  double kappa_gt = 0.0;  // 1/m, evaluated one fit-window start ahead
  double delta_gt = 0.0;  // m, positive = vehicle right of lane center
};

GroundTruth ground_truth(const Track& track, const VehicleState& vehicle,
                         double lookahead_u = 5.0);

// Frenet-frame kinematic bicycle, forward Euler:
//   s'   = v cos(psi) / (1 - d kappa(s))
//   d'   = v sin(psi)
//   psi' = v tan(steering) / L - kappa(s) s'
VehicleState step_vehicle(const VehicleState& state, double steering, double dt,
                          const Track& track);

// steering = atan(L kappa_hat) + atan(k_d delta_hat / v), clamped to
// +-0.5 rad. Positive delta_hat (vehicle right of center) steers left,
// which is positive steering under the bicycle model above.
double controller(double kappa_hat, double delta_hat_m, double v,
                  double k_d = 0.8, double clamp_rad = 0.5);

struct SimFrame {
  FrameResult result;
  double kappa_gt = 0.0;
  double delta_gt = 0.0;
  double s = 0.0;
  double d = 0.0;
  double psi = 0.0;
};

enum class RunOutcome { completed, off_lane, duration_reached };

struct RunRecord {
  std::vector<SimFrame> frames;
  RunOutcome outcome = RunOutcome::completed;
  VehicleState final_state;
  double max_abs_d = 0.0;
};

struct RunParams {
  double speed_kmh = 50.0;   // must be > 0; capped at 70
  double frame_rate = 20.0;  // Hz
  double duration_s = 1e9;
  // Closed loop driven by ideal measurements instead of the pipeline:
  // track curvature at the vehicle and the error-free RoI-lookahead
  // lateral offset with the road-bend sag removed. Isolates controller
  // behavior from perception error.
  bool oracle_perception = false;
  // Dump rendered masks as frame_%06d.pgm plus gt.csv into this directory.
  std::string dump_masks_dir;
};

inline constexpr double kMaxSpeedKmh = 70.0;

// Host follows the exact centerline (d = 0, psi = 0) at fixed speed; every
// rendered frame runs through the pipeline and is paired with ground truth.
RunRecord run_static(const Track& track, const CameraModel& cam, const RenderOptions& opts,
                     const PipelineConfig& cfg, long n_frames, const RunParams& params);

// Closed loop: each frame's estimates feed the controller which feeds
// step_vehicle. Ends at track end, duration, or off-lane (|d| >= lane
// width), which is reported as the run outcome.
RunRecord run_dynamic(const Track& track, const CameraModel& cam, const RenderOptions& opts,
                      const PipelineConfig& cfg, const RunParams& params);

// The 3919 m benchmark track: straights, R = 100..500 m arcs and an
// S-blend, |kappa| <= 0.01.
TrackSpec benchmark_track_spec();

}  // namespace lanepath
