#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "lanepath/evalkit.hpp"

using namespace lanepath;

TEST_SUITE_BEGIN("evalkit");

TEST_CASE("mae examples") {
  const std::vector<double> est = {1.0, 2.0, 3.0};
  const std::vector<double> truth = {1.0, 1.0, 1.0};
  const std::vector<std::uint8_t> all = {1, 1, 1};
  CHECK(mae(est, est, all) == 0.0);

  const std::vector<std::uint8_t> partial = {1, 1, 0};
  CHECK(mae(est, truth, partial) == doctest::Approx(0.5));

  const std::vector<std::uint8_t> none = {0, 0, 0};
  CHECK_THROWS_AS(mae(est, truth, none), std::runtime_error);
  CHECK_THROWS_AS(mae(est, truth, std::vector<std::uint8_t>{1, 1}), std::invalid_argument);
}

TEST_CASE("mae permutation invariance and scaling") {
  std::mt19937 rng(19);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<double> est(20), truth(20);
  std::vector<std::uint8_t> avail(20, 1);
  for (int i = 0; i < 20; ++i) {
    est[i] = unif(rng);
    truth[i] = unif(rng);
    avail[i] = rng() % 4 != 0;
  }
  avail[0] = 1;
  const double base = mae(est, truth, avail);

  std::vector<std::size_t> perm(20);
  for (std::size_t i = 0; i < 20; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<double> est_p(20), truth_p(20);
  std::vector<std::uint8_t> avail_p(20);
  for (std::size_t i = 0; i < 20; ++i) {
    est_p[i] = est[perm[i]];
    truth_p[i] = truth[perm[i]];
    avail_p[i] = avail[perm[i]];
  }
  CHECK(mae(est_p, truth_p, avail_p) == doctest::Approx(base).epsilon(1e-12));

  std::vector<double> est_s = est, truth_s = truth;
  for (auto& v : est_s) v *= -3.0;
  for (auto& v : truth_s) v *= -3.0;
  CHECK(mae(est_s, truth_s, avail) == doctest::Approx(3.0 * base).epsilon(1e-12));
}

TEST_CASE("avail_pct") {
  CHECK(avail_pct(std::vector<std::uint8_t>{1, 1, 0, 0}) == doctest::Approx(50.0));
  CHECK(avail_pct(std::vector<std::uint8_t>(7, 1)) == doctest::Approx(100.0));
  std::vector<std::uint8_t> avail(200, 1);
  for (int i = 0; i < 9; ++i) avail[i * 20] = 0;
  CHECK(avail_pct(avail) == doctest::Approx(95.5));
  CHECK_THROWS_AS(avail_pct({}), std::invalid_argument);
}

TEST_CASE("avail_pct of concatenated runs is the length-weighted mean") {
  const std::vector<std::uint8_t> a = {1, 0, 1, 1};
  const std::vector<std::uint8_t> b = {0, 0, 1, 1, 1, 1};
  std::vector<std::uint8_t> both = a;
  both.insert(both.end(), b.begin(), b.end());
  const double weighted =
      (avail_pct(a) * a.size() + avail_pct(b) * b.size()) / (a.size() + b.size());
  CHECK(avail_pct(both) == doctest::Approx(weighted).epsilon(1e-12));
}

namespace {

RunRecord synthetic_run(int n) {
  std::mt19937 rng(29);
  std::uniform_real_distribution<double> unif(-0.01, 0.01);
  RunRecord run;
  for (int i = 0; i < n; ++i) {
    SimFrame f;
    f.result.frame_idx = i;
    f.result.kappa_hat = 0.005 + unif(rng);
    f.result.kappa_avail = true;
    f.kappa_gt = 0.005;
    f.delta_gt = 0.1 * std::sin(0.2 * i);
    if (i % 7 != 3) {
      f.result.delta_m = f.delta_gt + unif(rng);
      f.result.delta_avail = true;
    }
    run.frames.push_back(f);
  }
  return run;
}

}  // namespace

TEST_CASE("evaluate excludes unavailable frames") {
  const RunRecord run = synthetic_run(21);
  const EvalReport report = evaluate(run, "static");
  CHECK(report.n_frames == 21);
  CHECK(report.kappa_avail_pct == doctest::Approx(100.0));
  CHECK(report.delta_avail_pct == doctest::Approx(100.0 * 18.0 / 21.0));

  double sum = 0.0;
  int n = 0;
  for (const auto& f : run.frames) {
    if (!f.result.delta_avail) continue;
    sum += std::abs(*f.result.delta_m - f.delta_gt);
    ++n;
  }
  CHECK(report.delta_mae == doctest::Approx(sum / n).epsilon(1e-12));
}

TEST_CASE("export_report round trips") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "lanepath_evalkit_test";
  fs::remove_all(dir);

  const RunRecord run = synthetic_run(22);
  const EvalReport report = evaluate(run, "static");
  export_report(report, run, dir.string(), 11, false);

  // Blocked series: 22 frames / block 11 -> 2 full blocks.
  std::ifstream blocked(dir / "series_blocked.csv");
  REQUIRE(blocked.good());
  std::string line;
  std::getline(blocked, line);  // header
  int rows = 0;
  while (std::getline(blocked, line)) {
    ++rows;
    CHECK(line.back() == '1');  // both blocks are full
  }
  CHECK(rows == 2);

  // frames.csv re-parsed reproduces the MAE exactly.
  std::ifstream frames(dir / "frames.csv");
  REQUIRE(frames.good());
  std::getline(frames, line);
  std::vector<double> delta_est, delta_gt;
  std::vector<std::uint8_t> delta_avail;
  while (std::getline(frames, line)) {
    std::stringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    REQUIRE(cells.size() == 6);
    delta_est.push_back(std::stod(cells[3]));
    delta_gt.push_back(std::stod(cells[4]));
    delta_avail.push_back(cells[5] == "1");
  }
  CHECK(delta_est.size() == 22);
  CHECK(mae(delta_est, delta_gt, delta_avail) == report.delta_mae);

  // Summary fields survive the JSON round trip exactly.
  std::ifstream summary(dir / "run_summary.json");
  REQUIRE(summary.good());
  nlohmann::json j;
  summary >> j;
  CHECK(j["kappa_smae"].get<double>() == report.kappa_mae);
  CHECK(j["delta_smae"].get<double>() == report.delta_mae);
  CHECK(j["delta_avail_pct"].get<double>() == report.delta_avail_pct);
  CHECK(j["mode"] == "static");
  CHECK(j["partial"] == false);
  fs::remove_all(dir);
}

TEST_CASE("comparison table shapes rows by quantity and columns by config") {
  EvalReport a = evaluate(synthetic_run(20), "dynamic");
  EvalReport b = a;
  b.kappa_mae *= 1.5;
  const std::string table = comparison_table({{"unet-pp", a}, {"dsunet-pp", b}});
  CHECK(table.find("unet-pp") != std::string::npos);
  CHECK(table.find("dsunet-pp") != std::string::npos);
  CHECK(table.find("kappa dMAE") != std::string::npos);
  CHECK(table.find("delta dMAE") != std::string::npos);
  CHECK(table.find("Avail") != std::string::npos);
}

TEST_SUITE_END();
