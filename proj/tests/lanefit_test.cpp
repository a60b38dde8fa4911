#include <doctest.h>

#include <stdexcept>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "lanepath/lanefit.hpp"

using namespace lanepath;

TEST_SUITE_BEGIN("lanefit");

namespace {

std::vector<TdvPoint> sample_quadratic(double a, double b, double c, double u0, double u1,
                                       double step) {
  std::vector<TdvPoint> pts;
  for (double u = u0; u <= u1 + 1e-9; u += step) pts.push_back({u, (a * u + b) * u + c});
  return pts;
}

// Independent least-squares quadratic fit (Vandermonde QR), used as the
// oracle for curvature-of-a-fitted-arc checks.
Quadratic polyfit_oracle(const std::vector<TdvPoint>& pts) {
  Eigen::MatrixXd a(pts.size(), 3);
  Eigen::VectorXd rhs(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    a(i, 0) = pts[i].u * pts[i].u;
    a(i, 1) = pts[i].u;
    a(i, 2) = 1.0;
    rhs(i) = pts[i].v;
  }
  const Eigen::Vector3d x = a.colPivHouseholderQr().solve(rhs);
  return {x(0), x(1), x(2)};
}

std::vector<TdvPoint> circle_arc(double radius, double u0, double u1, double step) {
  std::vector<TdvPoint> pts;
  for (double u = u0; u <= u1 + 1e-9; u += step)
    pts.push_back({u, radius - std::sqrt(radius * radius - u * u)});
  return pts;
}

}  // namespace

TEST_CASE("fit_parallel exact recovery on noiseless data") {
  const auto left = sample_quadratic(0.002, 0.01, 1.75, 5.0, 30.0, 1.0);
  const auto right = sample_quadratic(0.002, 0.01, -1.75, 5.0, 30.0, 1.0);
  const FitResult fit = fit_parallel(left, right, std::nullopt, {});
  REQUIRE(fit.model.has_value());
  CHECK(std::abs(fit.model->a - 0.002) < 1e-9);
  CHECK(std::abs(fit.model->b - 0.01) < 1e-9);
  CHECK(std::abs(fit.model->c_left - 1.75) < 1e-9);
  CHECK(std::abs(fit.model->c_right + 1.75) < 1e-9);
  CHECK(fit.model->residual_rms < 1e-9);
  CHECK(fit.model->n_points_used == static_cast<int>(left.size() + right.size()));
}

TEST_CASE("fit_parallel straight road") {
  const auto left = sample_quadratic(0.0, 0.0, 1.75, 5.0, 30.0, 2.5);
  const auto right = sample_quadratic(0.0, 0.0, -1.75, 5.0, 30.0, 2.5);
  const FitResult fit = fit_parallel(left, right, std::nullopt, {});
  REQUIRE(fit.model.has_value());
  CHECK(std::abs(fit.model->a) < 1e-9);
  CHECK(std::abs(fit.model->b) < 1e-9);
  CHECK(std::abs(fit.model->c_left - 1.75) < 1e-9);
  CHECK(std::abs(fit.model->c_right + 1.75) < 1e-9);
}

TEST_CASE("fit_parallel insufficient data without a prior") {
  const auto left = sample_quadratic(0.0, 0.0, 1.75, 5.0, 30.0, 1.0);
  const std::vector<TdvPoint> two = {{5.0, -1.75}, {30.0, -1.75}};
  FitResult fit = fit_parallel(left, two, std::nullopt, {});
  CHECK_FALSE(fit.model.has_value());
  CHECK(fit.error == FitError::insufficient_data);

  // Enough points but a span under 5 m.
  const auto narrow = sample_quadratic(0.0, 0.0, -1.75, 10.0, 13.0, 0.5);
  fit = fit_parallel(left, narrow, std::nullopt, {});
  CHECK(fit.error == FitError::insufficient_data);
}

TEST_CASE("fit_parallel blends a prior state") {
  const auto left_a = sample_quadratic(0.001, 0.0, 1.8, 5.0, 30.0, 1.0);
  const auto right_a = sample_quadratic(0.001, 0.0, -1.7, 5.0, 30.0, 1.0);
  const FitResult first = fit_parallel(left_a, right_a, std::nullopt, {});
  REQUIRE(first.model.has_value());

  // Second frame: left side lost, right line shifted.
  const auto right_b = sample_quadratic(0.001, 0.0, -1.5, 5.0, 30.0, 1.0);
  FitOptions opt;
  const FitResult second = fit_parallel({}, right_b, first.state, opt);
  REQUIRE(second.model.has_value());

  // Closed-form expectation from explicitly blended normal equations in the
  // same scaled basis.
  const double um = first.state.u_mid, uh = first.state.u_half;
  Eigen::Matrix3d gl = Eigen::Matrix3d::Zero(), gr = Eigen::Matrix3d::Zero();
  Eigen::Vector3d rl = Eigen::Vector3d::Zero(), rr = Eigen::Vector3d::Zero();
  auto accumulate = [&](const std::vector<TdvPoint>& pts, Eigen::Matrix3d& g,
                        Eigen::Vector3d& r, double w) {
    for (const auto& p : pts) {
      const double t = (p.u - um) / uh;
      const Eigen::Vector3d phi(t * t, t, 1.0);
      g += w * phi * phi.transpose();
      r += w * phi * p.v;
    }
  };
  accumulate(left_a, gl, rl, opt.forgetting);
  accumulate(right_a, gr, rr, opt.forgetting);
  accumulate(right_b, gr, rr, 1.0);
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m(0, 0) = gl(0, 0) + gr(0, 0);
  m(0, 1) = m(1, 0) = gl(0, 1) + gr(0, 1);
  m(0, 2) = m(2, 0) = gl(0, 2);
  m(0, 3) = m(3, 0) = gr(0, 2);
  m(1, 1) = gl(1, 1) + gr(1, 1);
  m(1, 2) = m(2, 1) = gl(1, 2);
  m(1, 3) = m(3, 1) = gr(1, 2);
  m(2, 2) = gl(2, 2);
  m(3, 3) = gr(2, 2);
  m += opt.ridge * Eigen::Matrix4d::Identity();
  const Eigen::Vector4d rhs(rl(0) + rr(0), rl(1) + rr(1), rl(2), rr(2));
  const Eigen::Vector4d x = m.ldlt().solve(rhs);
  const double exp_a = x(0) / (uh * uh);
  const double exp_b = x(1) / uh - 2.0 * x(0) * um / (uh * uh);
  const double exp_cc = x(0) * um * um / (uh * uh) - x(1) * um / uh;

  CHECK(std::abs(second.model->a - exp_a) < 1e-9);
  CHECK(std::abs(second.model->b - exp_b) < 1e-9);
  CHECK(std::abs(second.model->c_left - (exp_cc + x(2))) < 1e-9);
  CHECK(std::abs(second.model->c_right - (exp_cc + x(3))) < 1e-9);
  // The right intercept moved toward the new evidence, the left held.
  CHECK(second.model->c_right > first.model->c_right);
  CHECK(std::abs(second.model->c_left - first.model->c_left) < 0.05);
}

TEST_CASE("fit_parallel lateral translation equivariance") {
  const double shift = 0.8;
  const auto left = sample_quadratic(0.003, -0.02, 1.75, 5.0, 30.0, 1.0);
  const auto right = sample_quadratic(0.003, -0.02, -1.75, 5.0, 30.0, 1.0);
  auto left_t = left;
  auto right_t = right;
  for (auto& p : left_t) p.v += shift;
  for (auto& p : right_t) p.v += shift;
  const FitResult base = fit_parallel(left, right, std::nullopt, {});
  const FitResult moved = fit_parallel(left_t, right_t, std::nullopt, {});
  REQUIRE(base.model.has_value());
  REQUIRE(moved.model.has_value());
  CHECK(std::abs(moved.model->a - base.model->a) < 1e-9);
  CHECK(std::abs(moved.model->b - base.model->b) < 1e-9);
  CHECK(std::abs(moved.model->c_left - base.model->c_left - shift) < 1e-9);
  CHECK(std::abs(moved.model->c_right - base.model->c_right - shift) < 1e-9);
}

TEST_CASE("middle_line midpoint") {
  LaneModel m;
  m.a = 0.002;
  m.b = 0.01;
  m.c_left = 1.75;
  m.c_right = -1.75;
  Quadratic mid = middle_line(m);
  CHECK(mid.a == 0.002);
  CHECK(mid.b == 0.01);
  CHECK(mid.c == doctest::Approx(0.0));

  m.c_left = 2.0;
  m.c_right = -1.5;
  mid = middle_line(m);
  CHECK(mid.c == doctest::Approx(0.25));
}

TEST_CASE("path_polynomial reproduces the middle line") {
  const Quadratic middle{0.002, 0.01, 0.25};
  const Quadratic path = path_polynomial(middle, 5.0, 30.0);
  CHECK(std::abs(path.a - middle.a) < 1e-12);
  CHECK(std::abs(path.b - middle.b) < 1e-12);
  CHECK(std::abs(path.c - middle.c) < 1e-12);

  CHECK_THROWS_AS(path_polynomial(middle, 5.0, 5.0), std::invalid_argument);
}

TEST_CASE("path_polynomial anchored mode") {
  // Middle line c = 0.25, a = b = 0; hand solve of the 2x2 system gives
  // a_f = 4e-4, b_f = -4e-3, c_f = 0.01.
  const Quadratic middle{0.0, 0.0, 0.25};
  const Quadratic f = path_polynomial(middle, 5.0, 30.0, true);
  CHECK(f.eval(5.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(f.eval(30.0) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(f.deriv(5.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(f.a == doctest::Approx(4e-4).epsilon(1e-9));
  CHECK(f.b == doctest::Approx(-4e-3).epsilon(1e-9));
  CHECK(f.c == doctest::Approx(0.01).epsilon(1e-9));
}

TEST_CASE("curvature formula and sign") {
  CHECK(curvature({0.0, 0.3, 1.0}, 7.0) == 0.0);
  CHECK(curvature({0.5, 0.0, 0.0}, 0.0) == doctest::Approx(1.0));
  // Left-bending road (a > 0, v positive left) has positive curvature.
  CHECK(curvature({0.002, 0.0, 0.0}, 5.0) > 0.0);

  // Exact denominator at nonzero slope.
  const Quadratic f{0.01, 0.2, 0.0};
  const double fp = f.deriv(3.0);
  CHECK(curvature(f, 3.0) ==
        doctest::Approx(0.02 / std::pow(1.0 + fp * fp, 1.5)).epsilon(1e-12));
  CHECK(curvature(f, 3.0, CurvatureFormula::paper_literal) ==
        doctest::Approx(0.02 / std::pow(1.0 + fp, 1.5)).epsilon(1e-12));
}

TEST_CASE("curvature of a fitted circle arc") {
  const Quadratic f = polyfit_oracle(circle_arc(100.0, 0.0, 30.0, 0.5));
  const double kappa0 = curvature(f, 0.0);
  CHECK(kappa0 >= 0.0098);
  CHECK(kappa0 <= 0.0102);

  // Error shrinks monotonically as the fit window tightens.
  double prev_err = 1e9;
  for (const double window : {40.0, 30.0, 20.0}) {
    const Quadratic fit = polyfit_oracle(circle_arc(100.0, 0.0, window, 0.5));
    const double err = std::abs(curvature(fit, 0.0) - 0.01);
    CHECK(err < prev_err);
    prev_err = err;
  }
}

TEST_CASE("world_curvature scale factor") {
  CHECK(world_curvature(0.001, 12.0) == doctest::Approx(0.012));
  CHECK(world_curvature(0.0042, 1.0) == 0.0042);
  CHECK(world_curvature(0.0, 7.0) == 0.0);
  CHECK_THROWS_AS(world_curvature(0.001, 0.0), std::invalid_argument);
}

TEST_SUITE_END();
