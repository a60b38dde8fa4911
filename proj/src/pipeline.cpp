#include "lanepath/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lanepath/log.hpp"

namespace lanepath {

PipelineSession::PipelineSession(const Homography& h, const PipelineConfig& cfg)
    : h_(h),
      cfg_(cfg),
      mask_buffer_(cfg.mask_window),
      kappa_window_(cfg.kalman_window) {
  if (!h_.valid()) throw std::invalid_argument("pipeline: homography is not calibrated");
  const double roi_row = (kRoiRowBegin + kRoiRowEnd) / 2.0;
  roi_scale_ = ground_meters_per_pixel(h_, {kRoiSplitX + 0.0, roi_row});
}

FrameResult PipelineSession::process_frame(const GrayMask& mask) {
  FrameResult result;
  result.frame_idx = frame_idx_++;
  stats_ = FrameStats{};

  // Clustering path: temporal average of the gray masks, then binarize.
  const GrayMask averaged = mask_buffer_.push_and_average(mask);
  const BinaryMask bin_avg = binarize(averaged, cfg_.threshold);
  const std::vector<Dot> dots = extract_dots(bin_avg);
  stats_.dots = dots.size();
  for (const auto d : bin_avg.data) stats_.foreground_pixels += d;

  DbscanStats dbscan_stats;
  const Clustering clusters = dbscan(dots, cfg_.eps, cfg_.min_pts, &dbscan_stats);
  stats_.dbscan_distance_checks = dbscan_stats.distance_checks;
  const LaneSideDots sides = select_lane_clusters(clusters, dots, h_, cfg_.min_cluster_size);

  // Fit window in TDV; dots above the horizon or outside [u_s, u_f] drop out.
  auto to_window = [&](const std::vector<Dot>& side) {
    std::vector<TdvPoint> pts;
    pts.reserve(side.size());
    for (const auto& d : side) {
      const auto q = pm(h_, {d.x, static_cast<double>(d.y)});
      if (!q || q->u < cfg_.u_s || q->u > cfg_.u_f) continue;
      pts.push_back(*q);
    }
    return pts;
  };
  const std::vector<TdvPoint> left = to_window(sides.left);
  const std::vector<TdvPoint> right = to_window(sides.right);

  if (!left.empty() || !right.empty()) {
    FitOptions fit_opt;
    fit_opt.forgetting = cfg_.forgetting;
    fit_opt.ridge = cfg_.ridge;
    fit_opt.u_mid = (cfg_.u_s + cfg_.u_f) / 2.0;
    fit_opt.u_half = std::max((cfg_.u_f - cfg_.u_s) / 2.0, 1.0);
    FitResult fit = fit_parallel(left, right, fit_state_, fit_opt);
    if (fit.model && fit.model->c_left > fit.model->c_right) {
      fit_state_ = fit.state;
      last_model_ = fit.model;
    }
  }
  // On a frame without usable evidence (or a degenerate fit) the previous
  // model is reused unchanged: kappa stays available while the current
  // frame's perception is out.

  if (last_model_) {
    const Quadratic middle = middle_line(*last_model_);
    const Quadratic path = path_polynomial(middle, cfg_.u_s, cfg_.u_f, cfg_.anchored_path);
    const double kappa0 = curvature(path, cfg_.u_s, cfg_.curvature_formula);
    result.kappa_raw = world_curvature(kappa0, cfg_.beta);
    kappa_window_.push(*result.kappa_raw);
    result.kappa_hat = kalman_estimate(kappa_window_, {cfg_.kalman_q, cfg_.kalman_r});
    result.kappa_avail = true;
    result.lane_model = last_model_;
  }

  // Lateral offset is a live mask-space measurement: it uses the current
  // frame only, so occlusions make it unavailable even while the averaged
  // clustering path still sees line evidence.
  const BinaryMask bin_live = binarize(mask, cfg_.threshold);
  const auto offset = lateral_offset(roi_centroids(bin_live, cfg_.n_min), cfg_.alpha);
  if (offset) {
    result.delta_px = offset->delta;
    result.delta_m = offset->delta * roi_scale_;
    result.delta_avail = true;
  }

  if (cfg_.render_overlay && last_model_)
    result.overlay = render_overlay(result, h_, &mask, cfg_.u_s, cfg_.u_f, cfg_.anchored_path);
  return result;
}

std::vector<PixelPoint> overlay_curve_points(const Quadratic& f, const Homography& h,
                                             double u_s, double u_f, double step) {
  std::vector<PixelPoint> pts;
  for (double u = u_s; u <= u_f + 1e-9; u += step) {
    const auto p = ipm(h, {u, f.eval(u)});
    if (p) pts.push_back(*p);
  }
  return pts;
}

namespace {

void draw_polyline(RgbImage& img, const std::vector<PixelPoint>& pts, std::uint8_t r,
                   std::uint8_t g, std::uint8_t b) {
  auto plot = [&](int x, int y) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int px = x + dx, py = y + dy;
        if (px >= 0 && px < img.width && py >= 0 && py < img.height) img.set(px, py, r, g, b);
      }
    }
  };
  for (std::size_t i = 1; i < pts.size(); ++i) {
    // Bresenham-style stepping along the longer axis.
    const double dx = pts[i].x - pts[i - 1].x;
    const double dy = pts[i].y - pts[i - 1].y;
    const int steps = std::max(1, static_cast<int>(std::ceil(std::max(std::abs(dx), std::abs(dy)))));
    for (int s = 0; s <= steps; ++s) {
      const double t = static_cast<double>(s) / steps;
      plot(static_cast<int>(std::lround(pts[i - 1].x + t * dx)),
           static_cast<int>(std::lround(pts[i - 1].y + t * dy)));
    }
  }
}

}  // namespace

RgbImage render_overlay(const FrameResult& result, const Homography& h,
                        const GrayMask* background, double u_s, double u_f,
                        bool anchored_path) {
  if (!result.lane_model) throw std::invalid_argument("render_overlay: no lane model");
  const int w = background ? background->width : kMaskWidth;
  const int ht = background ? background->height : kMaskHeight;
  RgbImage img(w, ht);
  if (background) {
    for (int y = 0; y < ht; ++y) {
      for (int x = 0; x < w; ++x) {
        const auto v = static_cast<std::uint8_t>(
            std::clamp(std::lround(background->at(x, y) * 180.0), 0L, 255L));
        img.set(x, y, v, v, v);
      }
    }
  }
  const LaneModel& model = *result.lane_model;
  const Quadratic middle = middle_line(model);
  const Quadratic path = path_polynomial(middle, u_s, u_f, anchored_path);
  draw_polyline(img, overlay_curve_points(model.left(), h, u_s, u_f), 0, 0, 255);
  draw_polyline(img, overlay_curve_points(model.right(), h, u_s, u_f), 0, 0, 255);
  draw_polyline(img, overlay_curve_points(path, h, u_s, u_f), 0, 255, 0);
  return img;
}

}  // namespace lanepath
