// Parallelism-constrained quadratic lane fitting with exponentially
// forgotten normal equations, path polynomial, curvature.
#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>

#include "lanepath/viewgeom.hpp"

namespace lanepath {

// f(u) = a*u^2 + b*u + c; u forward meters, f lateral meters (positive left).
struct Quadratic {
  double a = 0.0;  // 1/m
  double b = 0.0;  // dimensionless
  double c = 0.0;  // m

  double eval(double u) const { return (a * u + b) * u + c; }
  double deriv(double u) const { return 2.0 * a * u + b; }
};

// Shared (a,b) encode parallelism; c_left > c_right for a sane lane.
struct LaneModel {
  double a = 0.0;
  double b = 0.0;
  double c_left = 0.0;
  double c_right = 0.0;
  int n_points_used = 0;
  double residual_rms = 0.0;

  Quadratic left() const { return {a, b, c_left}; }
  Quadratic right() const { return {a, b, c_right}; }
};

// Accumulated per-line-family normal equations in a scaled basis
// t = (u - u_mid) / u_half, which keeps the solve well conditioned. The
// basis is fixed when the state is created and must not change across
// frames of one session.
struct RlsState {
  Eigen::Matrix3d g_left = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d g_right = Eigen::Matrix3d::Zero();
  Eigen::Vector3d r_left = Eigen::Vector3d::Zero();
  Eigen::Vector3d r_right = Eigen::Vector3d::Zero();
  double u_mid = 17.5;
  double u_half = 12.5;
};

struct FitOptions {
  double forgetting = 0.9;   // gamma applied to the previous state
  double ridge = 1e-10;      // lambda_r added to the assembled diagonal
  int min_points = 3;        // per side, when no prior state exists
  double min_span_u = 5.0;   // meters, per side, when no prior state exists
  double cond_limit = 1e12;
  double u_mid = 17.5;       // basis center/scale for fresh states
  double u_half = 12.5;
};

enum class FitError {
  insufficient_data,  // no prior state and too few / too narrow points
  ill_conditioned,
};

struct FitResult {
  std::optional<LaneModel> model;
  RlsState state;  // input state passed through unchanged on failure
  std::optional<FitError> error;
};

// Joint least squares of v ~ a u^2 + b u + c_side over both sides. With a
// prior state the current normal equations are blended as
// G <- gamma * G_prev + G_now before solving.
FitResult fit_parallel(std::span<const TdvPoint> left, std::span<const TdvPoint> right,
                       const std::optional<RlsState>& prior, const FitOptions& opt);

// (a, b, (c_left + c_right) / 2).
Quadratic middle_line(const LaneModel& model);

// The unique quadratic through f(u_s) = m(u_s), f(u_f) = m(u_f),
// f'(u_s) = m'(u_s). When all three conditions come from the quadratic m
// this reproduces m itself; anchored mode replaces f(u_s) with 0 (the
// host's lateral position) for a merge-in path. Throws
// std::invalid_argument when u_f <= u_s.
Quadratic path_polynomial(const Quadratic& middle, double u_s, double u_f,
                          bool anchored = false);

enum class CurvatureFormula {
  standard,       // f'' / (1 + f'^2)^(3/2)
  paper_literal,  // f'' / (1 + f')^(3/2), kept for comparison runs
};

double curvature(const Quadratic& f, double u_s,
                 CurvatureFormula formula = CurvatureFormula::standard);

// kappa = beta * kappa0; beta = 1 in calibrated-metric TDV.
double world_curvature(double kappa0, double beta);

}  // namespace lanepath
