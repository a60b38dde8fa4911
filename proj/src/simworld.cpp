#include "lanepath/simworld.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>

#include "lanepath/log.hpp"

namespace lanepath {

namespace {

constexpr double kSampleStep = 0.1;  // m, centerline sample table

// Heading under a linear curvature ramp from kappa0 with slope m over ds.
double theta_advance(double kappa0, double slope, double ds) {
  return kappa0 * ds + 0.5 * slope * ds * ds;
}

// Exact constant-curvature pose advance.
void arc_advance(double& x, double& y, double theta, double kappa, double ds) {
  if (std::abs(kappa) < 1e-12) {
    x += ds * std::cos(theta);
    y += ds * std::sin(theta);
  } else {
    x += (std::sin(theta + kappa * ds) - std::sin(theta)) / kappa;
    y += (std::cos(theta) - std::cos(theta + kappa * ds)) / kappa;
  }
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t frame) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (frame + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

Track build_track(const TrackSpec& spec) {
  if (spec.segments.empty()) throw std::invalid_argument("track: no segments");
  if (!(spec.lane_width > 0.0)) throw std::invalid_argument("track: lane width must be > 0");
  if (spec.blend_length < 0.0) throw std::invalid_argument("track: blend length must be >= 0");
  double total = 0.0;
  for (std::size_t i = 0; i < spec.segments.size(); ++i) {
    const auto& seg = spec.segments[i];
    if (!(seg.length > 0.0)) throw std::invalid_argument("track: segment length must be > 0");
    if (std::abs(seg.curvature) > kMaxTrackCurvature)
      throw std::invalid_argument("track: |curvature| exceeds 0.07 1/m");
    const double half_blends =
        (i > 0 ? spec.blend_length / 2.0 : 0.0) +
        (i + 1 < spec.segments.size() ? spec.blend_length / 2.0 : 0.0);
    if (half_blends > seg.length)
      throw std::invalid_argument("track: blend zones overlap inside a segment");
    total += seg.length;
  }

  Track t;
  t.lane_width_ = spec.lane_width;
  t.length_ = total;
  t.step_ = kSampleStep;

  // Piecewise-linear curvature profile: constant inside segments, linear
  // ramps of blend_length centered on the boundaries.
  t.kappa_knot_s_.push_back(0.0);
  t.kappa_knot_v_.push_back(spec.segments.front().curvature);
  double boundary = 0.0;
  for (std::size_t i = 0; i + 1 < spec.segments.size(); ++i) {
    boundary += spec.segments[i].length;
    const double half = spec.blend_length / 2.0;
    t.kappa_knot_s_.push_back(boundary - half);
    t.kappa_knot_v_.push_back(spec.segments[i].curvature);
    t.kappa_knot_s_.push_back(boundary + half);
    t.kappa_knot_v_.push_back(spec.segments[i + 1].curvature);
  }
  t.kappa_knot_s_.push_back(total);
  t.kappa_knot_v_.push_back(spec.segments.back().curvature);

  // Exact heading integrals at the knots (the profile is piecewise linear,
  // so the trapezoid rule between knots is exact).
  t.theta_knot_.resize(t.kappa_knot_s_.size());
  t.theta_knot_[0] = 0.0;
  for (std::size_t k = 1; k < t.kappa_knot_s_.size(); ++k) {
    const double ds = t.kappa_knot_s_[k] - t.kappa_knot_s_[k - 1];
    t.theta_knot_[k] =
        t.theta_knot_[k - 1] + 0.5 * (t.kappa_knot_v_[k] + t.kappa_knot_v_[k - 1]) * ds;
  }

  // Curvature interpolated inside one knot piece (a zero-length piece is a
  // step; its right value wins).
  auto piece_kappa = [&](std::size_t knot, double s) {
    const double s0 = t.kappa_knot_s_[knot], s1 = t.kappa_knot_s_[knot + 1];
    const double v0 = t.kappa_knot_v_[knot], v1 = t.kappa_knot_v_[knot + 1];
    if (s1 - s0 < 1e-12) return v1;
    return v0 + (v1 - v0) * (s - s0) / (s1 - s0);
  };

  // Sample the centerline every step_: exact arc updates where curvature is
  // constant, trapezoidal position integration across the ramps.
  const std::size_t n = static_cast<std::size_t>(std::floor(total / kSampleStep)) + 1;
  t.x_.reserve(n + 1);
  t.y_.reserve(n + 1);
  t.theta_.reserve(n + 1);
  double x = 0.0, y = 0.0, theta = 0.0;
  t.x_.push_back(x);
  t.y_.push_back(y);
  t.theta_.push_back(theta);
  std::size_t knot = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    double s0 = (i - 1) * kSampleStep;
    const double s1 = std::min(i * kSampleStep, total);
    while (s0 < s1 - 1e-12) {
      while (knot + 1 < t.kappa_knot_s_.size() && t.kappa_knot_s_[knot + 1] <= s0 + 1e-12)
        ++knot;
      const double piece_end = std::min(s1, t.kappa_knot_s_[knot + 1]);
      const double ds = piece_end - s0;
      const double k0 = piece_kappa(knot, s0);
      const double k1 = piece_kappa(knot, piece_end);
      if (std::abs(k1 - k0) < 1e-15) {
        arc_advance(x, y, theta, k0, ds);
        theta += k0 * ds;
      } else {
        const double slope = (k1 - k0) / ds;
        const double theta1 = theta + theta_advance(k0, slope, ds);
        x += ds * 0.5 * (std::cos(theta) + std::cos(theta1));
        y += ds * 0.5 * (std::sin(theta) + std::sin(theta1));
        theta = theta1;
      }
      s0 = piece_end;
    }
    t.x_.push_back(x);
    t.y_.push_back(y);
    t.theta_.push_back(theta);
  }
  return t;
}

double Track::kappa(double s) const {
  if (s <= 0.0) return kappa_knot_v_.front();
  if (s >= length_) return kappa_knot_v_.back();
  // Knot count is small (two per boundary); binary search keeps this cheap.
  const auto it = std::upper_bound(kappa_knot_s_.begin(), kappa_knot_s_.end(), s);
  const std::size_t hi = static_cast<std::size_t>(it - kappa_knot_s_.begin());
  if (hi == 0) return kappa_knot_v_.front();
  if (hi >= kappa_knot_s_.size()) return kappa_knot_v_.back();
  const double s0 = kappa_knot_s_[hi - 1], s1 = kappa_knot_s_[hi];
  const double v0 = kappa_knot_v_[hi - 1], v1 = kappa_knot_v_[hi];
  if (s1 - s0 < 1e-12) return v1;
  return v0 + (v1 - v0) * (s - s0) / (s1 - s0);
}

double Track::heading(double s) const {
  if (s <= 0.0) return theta_knot_.front() + kappa_knot_v_.front() * s;
  if (s >= length_) return theta_knot_.back() + kappa_knot_v_.back() * (s - length_);
  const auto it = std::upper_bound(kappa_knot_s_.begin(), kappa_knot_s_.end(), s);
  const std::size_t hi =
      std::min(static_cast<std::size_t>(it - kappa_knot_s_.begin()), kappa_knot_s_.size() - 1);
  const std::size_t lo = hi - 1;
  const double s0 = kappa_knot_s_[lo], s1 = kappa_knot_s_[hi];
  const double v0 = kappa_knot_v_[lo], v1 = kappa_knot_v_[hi];
  const double ds = s - s0;
  const double slope = s1 - s0 > 1e-12 ? (v1 - v0) / (s1 - s0) : 0.0;
  return theta_knot_[lo] + theta_advance(v0, slope, ds);
}

Vec2 Track::position(double s) const {
  double x, y, theta, kappa_c, ds;
  if (s <= 0.0) {
    x = x_.front();
    y = y_.front();
    theta = theta_.front();
    kappa_c = kappa_knot_v_.front();
    ds = s;
  } else if (s >= length_) {
    x = x_.back();
    y = y_.back();
    theta = theta_.back();
    kappa_c = kappa_knot_v_.back();
    ds = s - length_;
  } else {
    const std::size_t i = static_cast<std::size_t>(s / step_);
    x = x_[i];
    y = y_[i];
    theta = theta_[i];
    ds = s - i * step_;
    kappa_c = kappa(i * step_ + ds / 2.0);
  }
  arc_advance(x, y, theta, kappa_c, ds);
  return {x, y};
}

Vec2 Track::offset_point(double s, double lateral) const {
  const Vec2 p = position(s);
  const double th = heading(s);
  return {p.x - lateral * std::sin(th), p.y + lateral * std::cos(th)};
}

GrayMask render_mask(const Track& track, const VehicleState& vehicle, const CameraModel& cam,
                     const RenderOptions& opts, long frame_idx) {
  GrayMask mask(kMaskWidth, kMaskHeight, 0.0f);
  const Vec2 c = track.offset_point(vehicle.s, vehicle.d);
  const double phi = track.heading(vehicle.s) + vehicle.psi;
  const double cphi = std::cos(phi), sphi = std::sin(phi);
  const double ct = std::cos(cam.pitch), st = std::sin(cam.pitch);

  constexpr double kSampleDs = 0.25;
  constexpr double kBehind = 5.0;
  constexpr double kAhead = 70.0;
  constexpr double kMinU = 0.5;

  struct Projected {
    bool ok = false;
    double x = 0.0, y = 0.0, half_width = 0.0;
  };
  auto project = [&](double s, double lateral) {
    const Vec2 p = track.offset_point(s, lateral);
    const double dx = p.x - c.x, dy = p.y - c.y;
    const double u = cphi * dx + sphi * dy;
    const double v = -sphi * dx + cphi * dy;
    Projected out;
    if (u < kMinU) return out;
    const double depth = u * ct + cam.height * st;
    out.x = cam.cx - cam.focal * v / depth;
    out.y = cam.cy + cam.focal * (cam.height * ct - u * st) / depth;
    out.half_width = std::max(0.5, 0.5 * opts.line_width * cam.focal / depth);
    out.ok = true;
    return out;
  };

  auto draw_segment = [&](const Projected& p1, const Projected& p2) {
    const int x_lo = std::max(0, static_cast<int>(std::floor(std::min(p1.x, p2.x) -
                                                             std::max(p1.half_width, p2.half_width))));
    const int x_hi = std::min(kMaskWidth - 1,
                              static_cast<int>(std::ceil(std::max(p1.x, p2.x) +
                                                         std::max(p1.half_width, p2.half_width))));
    const int y_lo = std::max(0, static_cast<int>(std::floor(std::min(p1.y, p2.y) -
                                                             std::max(p1.half_width, p2.half_width))));
    const int y_hi = std::min(kMaskHeight - 1,
                              static_cast<int>(std::ceil(std::max(p1.y, p2.y) +
                                                         std::max(p1.half_width, p2.half_width))));
    if (x_lo > x_hi || y_lo > y_hi) return;
    const double ex = p2.x - p1.x, ey = p2.y - p1.y;
    const double len2 = ex * ex + ey * ey;
    for (int py = y_lo; py <= y_hi; ++py) {
      for (int px = x_lo; px <= x_hi; ++px) {
        const double rx = px - p1.x, ry = py - p1.y;
        const double tt = len2 > 1e-12 ? std::clamp((rx * ex + ry * ey) / len2, 0.0, 1.0) : 0.0;
        const double qx = rx - tt * ex, qy = ry - tt * ey;
        const double w = p1.half_width + tt * (p2.half_width - p1.half_width);
        if (qx * qx + qy * qy <= w * w) mask.at(px, py) = 1.0f;
      }
    }
  };

  for (const double lateral : {track.lane_width() / 2.0, -track.lane_width() / 2.0}) {
    Projected prev;
    for (double ds = -kBehind; ds <= kAhead; ds += kSampleDs) {
      const Projected cur = project(vehicle.s + ds, lateral);
      if (prev.ok && cur.ok) draw_segment(prev, cur);
      prev = cur;
    }
  }

  std::mt19937_64 rng(mix_seed(opts.seed, static_cast<std::uint64_t>(frame_idx)));
  if (opts.dropout_rate > 0.0) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (auto& v : mask.data)
      if (v > 0.0f && unif(rng) < opts.dropout_rate) v = 0.0f;
  }
  if (opts.pixel_noise_sd > 0.0) {
    std::normal_distribution<double> gauss(0.0, opts.pixel_noise_sd);
    for (auto& v : mask.data)
      v = std::clamp(v + static_cast<float>(gauss(rng)), 0.0f, 1.0f);
  }
  for (const auto& occ : opts.occluders) {
    if (frame_idx < occ.frame_begin || frame_idx >= occ.frame_end) continue;
    const int x0 = std::clamp(occ.x0, 0, kMaskWidth);
    const int x1 = std::clamp(occ.x1, 0, kMaskWidth);
    const int y0 = std::clamp(occ.y0, 0, kMaskHeight);
    const int y1 = std::clamp(occ.y1, 0, kMaskHeight);
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x) mask.at(x, y) = 0.0f;
  }
  return mask;
}

GroundTruth ground_truth(const Track& track, const VehicleState& vehicle, double lookahead_u) {
  return {track.kappa(vehicle.s + lookahead_u), -vehicle.d};
}

VehicleState step_vehicle(const VehicleState& state, double steering, double dt,
                          const Track& track) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_vehicle: dt must be > 0");
  const double kappa_c = track.kappa(state.s);
  const double denom = std::max(1.0 - state.d * kappa_c, 0.1);
  const double s_dot = state.v * std::cos(state.psi) / denom;
  VehicleState next = state;
  next.s += s_dot * dt;
  next.d += state.v * std::sin(state.psi) * dt;
  next.psi += (state.v * std::tan(steering) / kWheelbase - kappa_c * s_dot) * dt;
  return next;
}

double controller(double kappa_hat, double delta_hat_m, double v, double k_d, double clamp_rad) {
  if (!(v > 0.0)) throw std::invalid_argument("controller: v must be > 0");
  const double steering = std::atan(kWheelbase * kappa_hat) + std::atan(k_d * delta_hat_m / v);
  return std::clamp(steering, -clamp_rad, clamp_rad);
}

namespace {

void check_run_params(const RunParams& params) {
  if (!(params.speed_kmh > 0.0))
    throw std::invalid_argument("run: speed must be > 0");
  if (params.speed_kmh > kMaxSpeedKmh)
    throw std::invalid_argument("run: speed exceeds the 70 km/h cap");
  if (!(params.frame_rate > 0.0)) throw std::invalid_argument("run: frame rate must be > 0");
}

// Forward distance viewed by the RoI center row; used by the oracle
// controller input and the pixel->meter conversion checks.
double roi_lookahead_u(const CameraModel& cam) {
  const double row = (kRoiRowBegin + kRoiRowEnd) / 2.0;
  const double ct = std::cos(cam.pitch), st = std::sin(cam.pitch);
  const double dy = row - cam.cy;
  return cam.height * (cam.focal * ct - dy * st) / (dy * ct + cam.focal * st);
}

// Lateral position (vehicle frame, positive left) of the lane center at
// forward arc distance u; the error-free version of the RoI measurement.
double lane_center_lateral(const Track& track, const VehicleState& vehicle, double u) {
  const Vec2 c = track.offset_point(vehicle.s, vehicle.d);
  const double phi = track.heading(vehicle.s) + vehicle.psi;
  const Vec2 p = track.position(vehicle.s + u);
  const double dx = p.x - c.x, dy = p.y - c.y;
  return -std::sin(phi) * dx + std::cos(phi) * dy;
}

class MaskDumper {
 public:
  MaskDumper(const std::string& dir, double frame_rate) : dir_(dir) {
    if (dir_.empty()) return;
    std::filesystem::create_directories(dir_);
    gt_.open(dir_ + "/gt.csv");
    if (!gt_) throw std::runtime_error("cannot write " + dir_ + "/gt.csv");
    gt_ << "frame_idx,kappa_gt,delta_gt,s,d,psi,frame_rate\n";
    frame_rate_ = frame_rate;
  }

  void dump(long idx, const GrayMask& mask, const GroundTruth& gt, const VehicleState& vs) {
    if (dir_.empty()) return;
    char name[64];
    std::snprintf(name, sizeof(name), "/frame_%06ld.pgm", idx);
    write_pgm(mask, dir_ + name);
    char row[256];
    std::snprintf(row, sizeof(row), "%ld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", idx, gt.kappa_gt,
                  gt.delta_gt, vs.s, vs.d, vs.psi, frame_rate_);
    gt_ << row;
  }

 private:
  std::string dir_;
  std::ofstream gt_;
  double frame_rate_ = 0.0;
};

}  // namespace

RunRecord run_static(const Track& track, const CameraModel& cam, const RenderOptions& opts,
                     const PipelineConfig& cfg, long n_frames, const RunParams& params) {
  check_run_params(params);
  const double v = params.speed_kmh / 3.6;
  const double dt = 1.0 / params.frame_rate;
  PipelineSession session(homography_from_camera(cam), cfg);
  MaskDumper dumper(params.dump_masks_dir, params.frame_rate);

  RunRecord record;
  for (long i = 0;; ++i) {
    if (n_frames > 0 && i >= n_frames) break;
    const VehicleState vs{i * v * dt, 0.0, 0.0, v};
    if (vs.s > track.length()) break;
    if (dt * i > params.duration_s) {
      record.outcome = RunOutcome::duration_reached;
      break;
    }
    const GrayMask mask = render_mask(track, vs, cam, opts, i);
    const GroundTruth gt = ground_truth(track, vs, cfg.u_s);
    SimFrame frame;
    frame.result = session.process_frame(mask);
    frame.kappa_gt = gt.kappa_gt;
    frame.delta_gt = gt.delta_gt;
    frame.s = vs.s;
    frame.d = vs.d;
    frame.psi = vs.psi;
    record.frames.push_back(std::move(frame));
    record.final_state = vs;
    dumper.dump(i, mask, gt, vs);
  }
  return record;
}

RunRecord run_dynamic(const Track& track, const CameraModel& cam, const RenderOptions& opts,
                      const PipelineConfig& cfg, const RunParams& params) {
  check_run_params(params);
  const double v = params.speed_kmh / 3.6;
  const double dt = 1.0 / params.frame_rate;
  PipelineSession session(homography_from_camera(cam), cfg);
  MaskDumper dumper(params.dump_masks_dir, params.frame_rate);
  const double u_roi = roi_lookahead_u(cam);

  RunRecord record;
  VehicleState vs{0.0, 0.0, 0.0, v};
  double delta_ctrl = 0.0;  // holds the last available estimate
  for (long i = 0;; ++i) {
    if (vs.s >= track.length()) break;
    if (dt * i > params.duration_s) {
      record.outcome = RunOutcome::duration_reached;
      break;
    }
    const GrayMask mask = render_mask(track, vs, cam, opts, i);
    const GroundTruth gt = ground_truth(track, vs, cfg.u_s);
    SimFrame frame;
    frame.result = session.process_frame(mask);
    frame.kappa_gt = gt.kappa_gt;
    frame.delta_gt = gt.delta_gt;
    frame.s = vs.s;
    frame.d = vs.d;
    frame.psi = vs.psi;
    dumper.dump(i, mask, gt, vs);

    double kappa_ctrl = 0.0;
    if (params.oracle_perception) {
      // Perfect perception: curvature at the vehicle and the lookahead
      // lateral measurement with the road-bend sag removed, so the ideal
      // loop holds the lane center instead of cutting corners.
      kappa_ctrl = track.kappa(vs.s);
      const double sag = 0.5 * kappa_ctrl * u_roi * u_roi;
      delta_ctrl = cfg.alpha * (lane_center_lateral(track, vs, u_roi) - sag);
    } else {
      if (frame.result.kappa_hat) kappa_ctrl = *frame.result.kappa_hat;
      if (frame.result.delta_m) delta_ctrl = *frame.result.delta_m;
    }
    record.frames.push_back(std::move(frame));

    const double steering = controller(kappa_ctrl, delta_ctrl, v);
    vs = step_vehicle(vs, steering, dt, track);
    record.final_state = vs;
    record.max_abs_d = std::max(record.max_abs_d, std::abs(vs.d));
    if (std::abs(vs.d) >= track.lane_width()) {
      record.outcome = RunOutcome::off_lane;
      log(LogLevel::warn, "run_dynamic: off lane at s=%.1f m (d=%.2f m), frame %ld", vs.s, vs.d,
          i);
      break;
    }
  }
  return record;
}

TrackSpec benchmark_track_spec() {
  // 3919 m total: straights, R = 100..500 m arcs and S transitions.
  TrackSpec spec;
  spec.segments = {
      {400.0, 0.0},     {450.0, 0.002},    {300.0, 0.0},     {500.0, -0.005},
      {250.0, 0.0},     {350.0, 0.01},     {300.0, 0.0},     {400.0, -1.0 / 300.0},
      {269.0, 1.0 / 150.0}, {300.0, -0.002}, {400.0, 0.0},
  };
  spec.blend_length = 30.0;
  spec.lane_width = 3.5;
  return spec;
}

}  // namespace lanepath
