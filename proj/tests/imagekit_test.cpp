#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "lanepath/imagekit.hpp"

using namespace lanepath;

TEST_SUITE_BEGIN("imagekit");

TEST_CASE("binarize thresholding") {
  GrayMask uniform(8, 4, 0.6f);
  const BinaryMask ones = binarize(uniform, 0.5);
  for (auto v : ones.data) CHECK(v == 1);

  GrayMask zeros(8, 4, 0.0f);
  for (auto v : binarize(zeros, 0.3).data) CHECK(v == 0);

  // Checkerboard of {0.3, 0.7} against the per-pixel comparison oracle.
  GrayMask checker(6, 6);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 6; ++x) checker.at(x, y) = (x + y) % 2 ? 0.7f : 0.3f;
  const BinaryMask out = binarize(checker, 0.5);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 6; ++x) CHECK(out.at(x, y) == (checker.at(x, y) >= 0.5f ? 1 : 0));

  CHECK_THROWS_AS(binarize(zeros, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(binarize(zeros, 1.0), std::invalid_argument);
}

TEST_CASE("binarize is idempotent on binary values") {
  std::mt19937 rng(7);
  GrayMask m(32, 16);
  for (auto& v : m.data) v = rng() % 2 ? 1.0f : 0.0f;
  const BinaryMask once = binarize(m, 0.5);
  GrayMask again(32, 16);
  for (std::size_t i = 0; i < once.data.size(); ++i) again.data[i] = once.data[i];
  const BinaryMask twice = binarize(again, 0.5);
  CHECK(once.data == twice.data);
}

namespace {

BinaryMask empty_mask() { return BinaryMask(kMaskWidth, kMaskHeight); }

}  // namespace

TEST_CASE("roi_centroids single column and empty band") {
  BinaryMask m = empty_mask();
  for (int y = kRoiRowBegin; y <= kRoiRowEnd; ++y) m.at(100, y) = 1;
  // 9 band rows -> 9 pixels; n_min=1 isolates the centroid arithmetic.
  const RoICentroids c = roi_centroids(m, 1);
  REQUIRE(c.x_left.has_value());
  CHECK(*c.x_left == doctest::Approx(100.0));
  CHECK_FALSE(c.x_right.has_value());
  CHECK(c.n_left == 9);

  const RoICentroids none = roi_centroids(empty_mask());
  CHECK_FALSE(none.x_left.has_value());
  CHECK_FALSE(none.x_right.has_value());
}

TEST_CASE("roi_centroids availability threshold") {
  BinaryMask m = empty_mask();
  for (int y = kRoiRowBegin; y <= kRoiRowEnd; ++y) m.at(100, y) = 1;
  // 9 pixels sit below the default n_min of 10.
  CHECK_FALSE(roi_centroids(m).x_left.has_value());
  m.at(101, kRoiRowBegin) = 1;
  CHECK(roi_centroids(m).x_left.has_value());
}

TEST_CASE("roi_centroids mean of two columns") {
  BinaryMask m = empty_mask();
  for (int y = kRoiRowBegin; y <= kRoiRowEnd; ++y) {
    m.at(90, y) = 1;
    m.at(110, y) = 1;
  }
  const RoICentroids c = roi_centroids(m);
  REQUIRE(c.x_left.has_value());
  CHECK(*c.x_left == doctest::Approx(100.0));
}

TEST_CASE("roi_centroids ignores pixels outside the band and half ranges") {
  BinaryMask m = empty_mask();
  for (int y = kRoiRowBegin; y <= kRoiRowEnd; ++y) {
    for (int x = 140; x < 160; ++x) m.at(x, y) = 1;
    for (int x = 500; x < 520; ++x) m.at(x, y) = 1;
  }
  const RoICentroids base = roi_centroids(m);
  BinaryMask noisy = m;
  for (int y = 0; y < 100; ++y)
    for (int x = 0; x < kMaskWidth; ++x) noisy.at(x, y) = 1;
  const RoICentroids same = roi_centroids(noisy);
  CHECK(*base.x_left == *same.x_left);
  CHECK(*base.x_right == *same.x_right);
  CHECK(*base.x_left >= 0.0);
  CHECK(*base.x_left <= 320.0);
  CHECK(*base.x_right >= 321.0);
  CHECK(*base.x_right <= 639.0);

  CHECK_THROWS_AS(roi_centroids(BinaryMask(100, 100)), std::invalid_argument);
}

TEST_CASE("lateral_offset formula and sign convention") {
  RoICentroids c;
  c.x_left = 280.0;
  c.x_right = 360.0;
  auto est = lateral_offset(c, 0.6);
  REQUIRE(est.has_value());
  CHECK(est->delta0 == doctest::Approx(0.0));
  CHECK(est->delta == doctest::Approx(0.0));
  CHECK(est->lane_width == doctest::Approx(80.0));

  c.x_left = 300.0;
  c.x_right = 380.0;
  est = lateral_offset(c, 0.6);
  REQUIRE(est.has_value());
  CHECK(est->delta0 == doctest::Approx(-20.0));
  CHECK(est->delta == doctest::Approx(-12.0));
  CHECK(est->lane_width == doctest::Approx(80.0));

  // Lane center left of image center -> positive.
  c.x_left = 200.0;
  c.x_right = 380.0;
  est = lateral_offset(c, 0.6);
  CHECK(est->delta0 > 0.0);

  // Delta scales linearly in alpha.
  const auto twice = lateral_offset(c, 1.2);
  CHECK(twice->delta == doctest::Approx(2.0 * est->delta));

  c.x_right.reset();
  CHECK_FALSE(lateral_offset(c, 0.6).has_value());
}

TEST_CASE("seg_metrics examples") {
  BinaryMask gt(4, 2);
  gt.at(0, 0) = 1;
  gt.at(1, 0) = 1;
  const SegScores perfect = seg_metrics(gt, gt);
  CHECK(perfect.accuracy == doctest::Approx(1.0));
  CHECK(perfect.precision == doctest::Approx(1.0));
  CHECK(perfect.recall == doctest::Approx(1.0));
  CHECK(perfect.f1 == doctest::Approx(1.0));

  BinaryMask half_fg(4, 2);
  for (int x = 0; x < 4; ++x) half_fg.at(x, 0) = 1;
  const SegScores degenerate = seg_metrics(BinaryMask(4, 2), half_fg);
  CHECK(degenerate.accuracy == doctest::Approx(0.5));
  CHECK(degenerate.precision == 0.0);
  CHECK(degenerate.recall == 0.0);
  CHECK(degenerate.f1 == 0.0);

  // Hand-counted 2x2 case: tp=1, fp=1, fn=0, tn=2.
  BinaryMask pred(2, 2), truth(2, 2);
  pred.at(0, 0) = 1;
  pred.at(1, 0) = 1;
  truth.at(0, 0) = 1;
  const SegScores s = seg_metrics(pred, truth);
  CHECK(s.tp == 1);
  CHECK(s.fp == 1);
  CHECK(s.fn == 0);
  CHECK(s.tn == 2);
  CHECK(s.accuracy == doctest::Approx(0.75));
  CHECK(s.precision == doctest::Approx(0.5));
  CHECK(s.recall == doctest::Approx(1.0));
  CHECK(s.f1 == doctest::Approx(2.0 / 3.0));

  CHECK_THROWS_AS(seg_metrics(BinaryMask(2, 2), BinaryMask(3, 2)), std::invalid_argument);
}

TEST_CASE("seg_metrics properties") {
  std::mt19937 rng(11);
  BinaryMask a(16, 8), b(16, 8);
  for (auto& v : a.data) v = rng() % 3 == 0;
  for (auto& v : b.data) v = rng() % 3 == 0;
  const SegScores ab = seg_metrics(a, b);
  const SegScores ba = seg_metrics(b, a);
  CHECK(ab.tp + ab.tn + ab.fp + ab.fn == 16 * 8);
  CHECK(ab.accuracy == doctest::Approx(static_cast<double>(ab.tp + ab.tn) / (16 * 8)));
  // Swapping prediction and truth swaps precision and recall.
  CHECK(ab.precision == doctest::Approx(ba.recall));
  CHECK(ab.recall == doctest::Approx(ba.precision));
}

TEST_CASE("weighted_ce hand values") {
  const double scores[] = {0.0, 0.0};
  const std::uint8_t labels[] = {1, 0};
  CHECK(weighted_ce(scores, labels) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  const double confident[] = {100.0, -100.0};
  CHECK(weighted_ce(confident, labels) < 1e-10);

  const double neg_scores[] = {1.0, -2.0, 0.5};
  const std::uint8_t neg_labels[] = {0, 0, 0};
  CHECK(weighted_ce(neg_scores, neg_labels) == 0.0);

  CHECK_THROWS_AS(weighted_ce({}, {}), std::invalid_argument);
}

TEST_CASE("weighted_ce nonnegative and balanced-batch identity") {
  std::mt19937 rng(3);
  std::normal_distribution<double> gauss(0.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> scores(8);
    std::vector<std::uint8_t> labels(8);
    for (int i = 0; i < 8; ++i) {
      scores[i] = gauss(rng);
      labels[i] = rng() % 2;
    }
    CHECK(weighted_ce(scores, labels) >= 0.0);
  }

  // P = N = 1: both weights are 1/2.
  const double x1 = 0.7, x2 = -1.3;
  const double scores[] = {x1, x2};
  const std::uint8_t labels[] = {1, 0};
  const double sig1 = 1.0 / (1.0 + std::exp(-x1));
  const double sig2 = 1.0 / (1.0 + std::exp(-x2));
  const double expected = -0.5 * std::log(sig1) - 0.5 * std::log(1.0 - sig2);
  CHECK(weighted_ce(scores, labels) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("pgm round trip is bit exact at 8-bit quantization") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "lanepath_imagekit_test";
  fs::create_directories(dir);
  const std::string path = (dir / "mask.pgm").string();

  std::mt19937 rng(5);
  std::uniform_real_distribution<float> unif(0.0f, 1.0f);
  GrayMask m(64, 48);
  for (auto& v : m.data) v = unif(rng);
  write_pgm(m, path);
  const GrayMask back = read_pgm(path);
  REQUIRE(back.width == m.width);
  REQUIRE(back.height == m.height);
  for (std::size_t i = 0; i < m.data.size(); ++i) {
    const float quantized = std::lround(m.data[i] * 255.0f) / 255.0f;
    CHECK(back.data[i] == quantized);
  }

  // File -> mask -> file is byte identical.
  const std::string path2 = (dir / "mask2.pgm").string();
  write_pgm(back, path2);
  std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
  const std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  const std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(b1 == b2);

  BinaryMask bin(16, 16);
  bin.at(3, 4) = 1;
  const std::string bpath = (dir / "bin.pgm").string();
  write_pgm(bin, bpath);
  CHECK(read_binary_pgm(bpath).data == bin.data);
  fs::remove_all(dir);
}

TEST_SUITE_END();
