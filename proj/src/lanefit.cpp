#include "lanepath/lanefit.hpp"

#include <cmath>
#include <stdexcept>

namespace lanepath {

namespace {

struct SideAccum {
  Eigen::Matrix3d g = Eigen::Matrix3d::Zero();
  Eigen::Vector3d r = Eigen::Vector3d::Zero();
};

SideAccum accumulate(std::span<const TdvPoint> pts, double u_mid, double u_half) {
  SideAccum acc;
  for (const auto& p : pts) {
    const double t = (p.u - u_mid) / u_half;
    const Eigen::Vector3d phi(t * t, t, 1.0);
    acc.g.noalias() += phi * phi.transpose();
    acc.r.noalias() += phi * p.v;
  }
  return acc;
}

bool spread_ok(std::span<const TdvPoint> pts, int min_points, double min_span) {
  if (static_cast<int>(pts.size()) < min_points) return false;
  double lo = pts[0].u, hi = pts[0].u;
  for (const auto& p : pts) {
    lo = std::min(lo, p.u);
    hi = std::max(hi, p.u);
  }
  return hi - lo >= min_span;
}

}  // namespace

FitResult fit_parallel(std::span<const TdvPoint> left, std::span<const TdvPoint> right,
                       const std::optional<RlsState>& prior, const FitOptions& opt) {
  FitResult out;
  if (prior) out.state = *prior;

  if (!prior &&
      (!spread_ok(left, opt.min_points, opt.min_span_u) ||
       !spread_ok(right, opt.min_points, opt.min_span_u))) {
    out.error = FitError::insufficient_data;
    return out;
  }

  const double u_mid = prior ? prior->u_mid : opt.u_mid;
  const double u_half = prior ? prior->u_half : opt.u_half;

  const SideAccum now_l = accumulate(left, u_mid, u_half);
  const SideAccum now_r = accumulate(right, u_mid, u_half);

  RlsState next;
  next.u_mid = u_mid;
  next.u_half = u_half;
  if (prior) {
    next.g_left = opt.forgetting * prior->g_left + now_l.g;
    next.g_right = opt.forgetting * prior->g_right + now_r.g;
    next.r_left = opt.forgetting * prior->r_left + now_l.r;
    next.r_right = opt.forgetting * prior->r_right + now_r.r;
  } else {
    next.g_left = now_l.g;
    next.g_right = now_r.g;
    next.r_left = now_l.r;
    next.r_right = now_r.r;
  }

  // Joint system over (A, B, C_left, C_right) in the scaled basis; the
  // quadratic and linear rows sum both families, intercepts stay per side.
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  Eigen::Vector4d rhs;
  const Eigen::Matrix3d& gl = next.g_left;
  const Eigen::Matrix3d& gr = next.g_right;
  m(0, 0) = gl(0, 0) + gr(0, 0);
  m(0, 1) = gl(0, 1) + gr(0, 1);
  m(0, 2) = gl(0, 2);
  m(0, 3) = gr(0, 2);
  m(1, 1) = gl(1, 1) + gr(1, 1);
  m(1, 2) = gl(1, 2);
  m(1, 3) = gr(1, 2);
  m(2, 2) = gl(2, 2);
  m(3, 3) = gr(2, 2);
  m(1, 0) = m(0, 1);
  m(2, 0) = m(0, 2);
  m(3, 0) = m(0, 3);
  m(2, 1) = m(1, 2);
  m(3, 1) = m(1, 3);
  m += opt.ridge * Eigen::Matrix4d::Identity();
  rhs << next.r_left(0) + next.r_right(0), next.r_left(1) + next.r_right(1), next.r_left(2),
      next.r_right(2);

  const Eigen::JacobiSVD<Eigen::Matrix4d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (!(sv(3) > 0.0) || sv(0) / sv(3) > opt.cond_limit) {
    out.error = FitError::ill_conditioned;
    return out;
  }
  const Eigen::Vector4d x = svd.solve(rhs);

  // Back to the raw u basis: f(u) = A t^2 + B t + C with t = (u-m)/h.
  LaneModel model;
  model.a = x(0) / (u_half * u_half);
  model.b = x(1) / u_half - 2.0 * x(0) * u_mid / (u_half * u_half);
  const double c_common = x(0) * u_mid * u_mid / (u_half * u_half) - x(1) * u_mid / u_half;
  model.c_left = c_common + x(2);
  model.c_right = c_common + x(3);
  model.n_points_used = static_cast<int>(left.size() + right.size());

  double sq = 0.0;
  for (const auto& p : left) {
    const double e = model.left().eval(p.u) - p.v;
    sq += e * e;
  }
  for (const auto& p : right) {
    const double e = model.right().eval(p.u) - p.v;
    sq += e * e;
  }
  model.residual_rms = model.n_points_used > 0 ? std::sqrt(sq / model.n_points_used) : 0.0;

  out.model = model;
  out.state = next;
  return out;
}

Quadratic middle_line(const LaneModel& model) {
  return {model.a, model.b, (model.c_left + model.c_right) / 2.0};
}

Quadratic path_polynomial(const Quadratic& middle, double u_s, double u_f, bool anchored) {
  if (!(u_f > u_s)) throw std::invalid_argument("path_polynomial: degenerate interval");
  const double y_s = anchored ? 0.0 : middle.eval(u_s);
  const double y_f = middle.eval(u_f);
  const double t_s = middle.deriv(u_s);
  const double du = u_f - u_s;
  // f(u_s) = y_s, f(u_f) = y_f, f'(u_s) = t_s pin the quadratic:
  const double a = (y_f - y_s - t_s * du) / (du * du);
  const double b = t_s - 2.0 * a * u_s;
  const double c = y_s - (a * u_s + b) * u_s;
  return {a, b, c};
}

double curvature(const Quadratic& f, double u_s, CurvatureFormula formula) {
  const double fp = f.deriv(u_s);
  const double fpp = 2.0 * f.a;
  if (formula == CurvatureFormula::paper_literal)
    return fpp / std::pow(1.0 + fp, 1.5);
  return fpp / std::pow(1.0 + fp * fp, 1.5);
}

double world_curvature(double kappa0, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("world_curvature: beta must be > 0");
  return beta * kappa0;
}

}  // namespace lanepath
