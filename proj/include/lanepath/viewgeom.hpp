// Perspective mapping between camera view and top-down view, homography
// calibration from a pinhole ground-plane camera, DLT estimation.
#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <utility>

namespace lanepath {

struct PixelPoint {
  double x = 0.0;
  double y = 0.0;
};

// Ground-plane point in the vehicle frame: u meters forward of the camera
// ground point, v meters lateral, positive to the vehicle's left.
struct TdvPoint {
  double u = 0.0;
  double v = 0.0;
};

// 3x3 projective map, defined up to scale. Stored normalized with
// m(2,2) = 1 whenever that entry is nonzero.
struct Homography {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();

  Homography inverse() const;
  bool valid() const;
};

Homography normalized(const Eigen::Matrix3d& m);

// Pinhole camera looking at the ground plane. Image is 640x480.
struct CameraModel {
  double height = 1.2;  // meters above ground
  double pitch = 0.04;  // radians downward
  double focal = 500.0; // pixels
  double cx = 320.0;
  double cy = 240.0;
};

// Image->ground homography of the camera (the PM direction). Throws
// std::invalid_argument for a degenerate camera (pitch <= 0, focal <= 0,
// height <= 0).
Homography homography_from_camera(const CameraModel& cam);

// Image row to which the ground plane at infinity projects.
double horizon_row(const CameraModel& cam);

// Camera-view -> top-down-view. nullopt when the pixel lies on the line
// mapped to infinity (at/above the horizon); callers drop such points.
std::optional<TdvPoint> pm(const Homography& h, PixelPoint p);

// Top-down-view -> camera-view, the inverse map of pm under the same h.
std::optional<PixelPoint> ipm(const Homography& h, TdvPoint q);

// Normalized DLT from >= 4 correspondences (image -> ground). Exact on 4
// non-degenerate pairs. Throws std::invalid_argument on fewer than 4 pairs
// and std::runtime_error on a degenerate configuration (e.g. 3 collinear
// source points).
Homography fit_homography(std::span<const std::pair<PixelPoint, TdvPoint>> pairs);

// Lateral ground meters spanned by one pixel column at image point p.
double ground_meters_per_pixel(const Homography& h, PixelPoint p);

// Calibration file: JSON with either a "camera" object (CameraModel fields)
// or a "matrix" array of 9 row-major numbers.
struct Calibration {
  std::optional<CameraModel> camera;
  Homography h;
};

Calibration load_calibration(const std::string& path);
void save_calibration(const Calibration& calib, const std::string& path);

}  // namespace lanepath
