// Per-frame orchestration: average -> binarize -> dots -> DBSCAN -> select
// -> PM -> parallel fit -> middle -> path -> curvature -> Kalman -> lateral
// offset -> optional IPM overlay.
#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "lanepath/clusterer.hpp"
#include "lanepath/estfilter.hpp"
#include "lanepath/imagekit.hpp"
#include "lanepath/lanefit.hpp"
#include "lanepath/viewgeom.hpp"

namespace lanepath {

struct PipelineConfig {
  double threshold = 0.5;
  double eps = 8.0;          // DBSCAN, pixels
  int min_pts = 5;
  int min_cluster_size = 12;
  double alpha = 0.6;
  double beta = 1.0;         // 1 in calibrated-metric TDV; 12 in pixel-TDV mode
  double u_s = 5.0;
  double u_f = 30.0;
  double forgetting = 0.9;
  double ridge = 1e-10;
  double kalman_q = 0.0001;
  double kalman_r = 0.01;
  int n_min = 10;            // RoI foreground pixels per side for Delta
  bool anchored_path = false;
  CurvatureFormula curvature_formula = CurvatureFormula::standard;
  int mask_window = 5;
  int kalman_window = 15;
  bool render_overlay = false;
};

struct FrameResult {
  long frame_idx = 0;
  std::optional<double> kappa_raw;   // 1/m, this frame's beta * kappa0
  std::optional<double> kappa_hat;   // 1/m, Kalman-filtered
  std::optional<double> delta_px;    // pixels
  std::optional<double> delta_m;     // meters
  bool kappa_avail = false;
  bool delta_avail = false;
  std::optional<LaneModel> lane_model;
  std::optional<RgbImage> overlay;
};

// Counters for the latest frame; used to check that per-frame work stays
// linear in foreground pixel count.
struct FrameStats {
  std::size_t foreground_pixels = 0;
  std::size_t dots = 0;
  std::size_t dbscan_distance_checks = 0;
};

// One session = one in-order frame stream with its temporal state
// (mask buffer, fit state, curvature window, last lane model).
class PipelineSession {
 public:
  // Throws std::invalid_argument when the homography is not invertible.
  PipelineSession(const Homography& h, const PipelineConfig& cfg);

  FrameResult process_frame(const GrayMask& mask);

  const PipelineConfig& config() const { return cfg_; }
  const Homography& homography() const { return h_; }
  const FrameStats& last_stats() const { return stats_; }
  // Lateral ground meters per pixel at the RoI center row.
  double roi_scale() const { return roi_scale_; }
  const std::optional<LaneModel>& last_model() const { return last_model_; }

 private:
  Homography h_;
  PipelineConfig cfg_;
  double roi_scale_ = 0.0;
  MaskBuffer mask_buffer_;
  CurvatureWindow kappa_window_;
  std::optional<RlsState> fit_state_;
  std::optional<LaneModel> last_model_;
  long frame_idx_ = 0;
  FrameStats stats_;
};

// Sampled TDV curve mapped to camera view through ipm; points above the
// horizon are dropped.
std::vector<PixelPoint> overlay_curve_points(const Quadratic& f, const Homography& h,
                                             double u_s, double u_f, double step = 0.5);

// Lane lines in blue, path polynomial in green, over the (optional) gray
// mask background. Throws std::invalid_argument when the result carries no
// lane model.
RgbImage render_overlay(const FrameResult& result, const Homography& h,
                        const GrayMask* background = nullptr,
                        double u_s = 5.0, double u_f = 30.0,
                        bool anchored_path = false);

}  // namespace lanepath
