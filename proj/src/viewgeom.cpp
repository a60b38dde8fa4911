#include "lanepath/viewgeom.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace lanepath {

namespace {

constexpr double kInfinityEps = 1e-9;

// Relative test for "w ~ 0 after transform": compares against the scale of
// the terms feeding the homogeneous coordinate, so exact-horizon pixels are
// caught while points merely close to it map to large finite coordinates.
bool at_infinity(const Eigen::Matrix3d& m, double x, double y, double w) {
  const double scale =
      std::abs(m(2, 0) * x) + std::abs(m(2, 1) * y) + std::abs(m(2, 2));
  return std::abs(w) <= kInfinityEps * std::max(scale, 1e-300);
}

}  // namespace

Homography normalized(const Eigen::Matrix3d& m) {
  Homography h;
  h.m = m;
  if (std::abs(m(2, 2)) > 1e-14) h.m /= m(2, 2);
  return h;
}

bool Homography::valid() const {
  return m.allFinite() && std::abs(m.determinant()) > 1e-14;
}

Homography Homography::inverse() const {
  return normalized(m.inverse());
}

Homography homography_from_camera(const CameraModel& cam) {
  if (cam.pitch <= 0.0 || cam.pitch >= M_PI / 2.0)
    throw std::invalid_argument("camera pitch must be in (0, pi/2)");
  if (cam.focal <= 0.0 || cam.height <= 0.0)
    throw std::invalid_argument("camera focal and height must be positive");
  const double st = std::sin(cam.pitch);
  const double ct = std::cos(cam.pitch);
  // Ground (u, v, 1) -> image (x*w, y*w, w) for a camera at height h above
  // the ground point, pitched down, x right / y down / z forward:
  //   x = cx - f v / (u ct + h st)
  //   y = cy + f (h ct - u st) / (u ct + h st)
  Eigen::Matrix3d ground_to_image;
  ground_to_image << cam.cx * ct, -cam.focal, cam.cx * cam.height * st,
      cam.cy * ct - cam.focal * st, 0.0, cam.cy * cam.height * st + cam.focal * cam.height * ct,
      ct, 0.0, cam.height * st;
  return normalized(ground_to_image.inverse());
}

double horizon_row(const CameraModel& cam) {
  return cam.cy - cam.focal * std::tan(cam.pitch);
}

std::optional<TdvPoint> pm(const Homography& h, PixelPoint p) {
  const Eigen::Vector3d q = h.m * Eigen::Vector3d(p.x, p.y, 1.0);
  if (at_infinity(h.m, p.x, p.y, q.z())) return std::nullopt;
  return TdvPoint{q.x() / q.z(), q.y() / q.z()};
}

std::optional<PixelPoint> ipm(const Homography& h, TdvPoint q) {
  const Homography inv = h.inverse();
  const Eigen::Vector3d p = inv.m * Eigen::Vector3d(q.u, q.v, 1.0);
  if (at_infinity(inv.m, q.u, q.v, p.z())) return std::nullopt;
  return PixelPoint{p.x() / p.z(), p.y() / p.z()};
}

Homography fit_homography(std::span<const std::pair<PixelPoint, TdvPoint>> pairs) {
  if (pairs.size() < 4)
    throw std::invalid_argument("fit_homography: at least 4 correspondences required");

  // Hartley normalization of both point sets.
  auto normalize = [](const std::vector<Eigen::Vector2d>& pts) {
    Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
    for (const auto& p : pts) centroid += p;
    centroid /= static_cast<double>(pts.size());
    double mean_dist = 0.0;
    for (const auto& p : pts) mean_dist += (p - centroid).norm();
    mean_dist /= static_cast<double>(pts.size());
    const double scale = mean_dist > 1e-300 ? std::sqrt(2.0) / mean_dist : 1.0;
    Eigen::Matrix3d t;
    t << scale, 0, -scale * centroid.x(), 0, scale, -scale * centroid.y(), 0, 0, 1;
    return t;
  };

  std::vector<Eigen::Vector2d> src, dst;
  src.reserve(pairs.size());
  dst.reserve(pairs.size());
  for (const auto& [p, q] : pairs) {
    src.emplace_back(p.x, p.y);
    dst.emplace_back(q.u, q.v);
  }
  const Eigen::Matrix3d ts = normalize(src);
  const Eigen::Matrix3d td = normalize(dst);

  Eigen::MatrixXd a(2 * pairs.size(), 9);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Eigen::Vector3d s = ts * Eigen::Vector3d(src[i].x(), src[i].y(), 1.0);
    const Eigen::Vector3d d = td * Eigen::Vector3d(dst[i].x(), dst[i].y(), 1.0);
    const double x = s.x() / s.z(), y = s.y() / s.z();
    const double u = d.x() / d.z(), v = d.y() / d.z();
    a.row(2 * i) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
    a.row(2 * i + 1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // A homography needs an 8-dimensional row space; a second vanishing
  // singular value means the configuration does not pin the map down.
  if (sv(7) <= 1e-10 * sv(0))
    throw std::runtime_error("fit_homography: degenerate configuration");

  Eigen::Matrix3d hn;
  const Eigen::VectorXd v9 = svd.matrixV().col(8);
  hn << v9(0), v9(1), v9(2), v9(3), v9(4), v9(5), v9(6), v9(7), v9(8);
  const Eigen::Matrix3d h = td.inverse() * hn * ts;
  Homography out = normalized(h);
  if (!out.valid()) throw std::runtime_error("fit_homography: singular solution");
  return out;
}

double ground_meters_per_pixel(const Homography& h, PixelPoint p) {
  const auto a = pm(h, {p.x - 0.5, p.y});
  const auto b = pm(h, {p.x + 0.5, p.y});
  if (!a || !b) throw std::runtime_error("ground_meters_per_pixel: point maps to infinity");
  return std::hypot(b->u - a->u, b->v - a->v);
}

Calibration load_calibration(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open calibration file: " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("calibration parse error in " + path + ": " + e.what());
  }
  Calibration calib;
  if (j.contains("camera")) {
    const auto& c = j["camera"];
    CameraModel cam;
    cam.height = c.value("height", cam.height);
    cam.pitch = c.value("pitch", cam.pitch);
    cam.focal = c.value("focal", cam.focal);
    cam.cx = c.value("cx", cam.cx);
    cam.cy = c.value("cy", cam.cy);
    calib.camera = cam;
    calib.h = homography_from_camera(cam);
  } else if (j.contains("matrix")) {
    const auto& m = j["matrix"];
    if (!m.is_array() || m.size() != 9)
      throw std::runtime_error(path + ": \"matrix\" must hold 9 row-major numbers");
    Eigen::Matrix3d h;
    for (int i = 0; i < 9; ++i) h(i / 3, i % 3) = m[i].get<double>();
    calib.h = normalized(h);
    if (!calib.h.valid()) throw std::runtime_error(path + ": matrix is singular");
  } else {
    throw std::runtime_error(path + ": expected a \"camera\" object or a \"matrix\" array");
  }
  return calib;
}

void save_calibration(const Calibration& calib, const std::string& path) {
  nlohmann::json j;
  if (calib.camera) {
    j["camera"] = {{"height", calib.camera->height},
                   {"pitch", calib.camera->pitch},
                   {"focal", calib.camera->focal},
                   {"cx", calib.camera->cx},
                   {"cy", calib.camera->cy}};
  } else {
    std::vector<double> m(9);
    for (int i = 0; i < 9; ++i) m[i] = calib.h.m(i / 3, i % 3);
    j["matrix"] = m;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write calibration file: " + path);
  f << j.dump(2) << "\n";
}

}  // namespace lanepath
