// Mask representation, binarization, RoI lateral-offset estimation,
// pixel-wise segmentation metrics, weighted cross-entropy.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lanepath {

inline constexpr int kMaskWidth = 640;
inline constexpr int kMaskHeight = 480;

// RoI band used for lane centering: rows 336..344 inclusive,
// left half x in [0,320], right half x in [321,639].
inline constexpr int kRoiRowBegin = 336;
inline constexpr int kRoiRowEnd = 344;
inline constexpr int kRoiSplitX = 320;

// Probability image in [0,1]. Row-major, origin top-left, y grows downward.
struct GrayMask {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  GrayMask() = default;
  GrayMask(int w, int h, float fill = 0.0f)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  float at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  float& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  std::size_t size() const { return data.size(); }
};

// Per-pixel {0,1} mask with the same layout as GrayMask.
struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  BinaryMask() = default;
  BinaryMask(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  std::size_t size() const { return data.size(); }
};

// Centroid x of foreground pixels in each RoI half; a side is absent when
// its foreground count is below the n_min availability threshold.
struct RoICentroids {
  std::optional<double> x_left;
  std::optional<double> x_right;
  int n_left = 0;
  int n_right = 0;
};

// delta0 = 320 - (xl + xr)/2, delta = alpha * delta0, both in pixels.
// delta > 0 means the lane center lies left of the image center
// (vehicle displaced right).
struct OffsetEstimate {
  double delta0 = 0.0;
  double delta = 0.0;
  double lane_width = 0.0;
  double alpha = 0.0;
};

struct SegScores {
  std::int64_t tp = 0;
  std::int64_t tn = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// pixel = 1 iff probability >= threshold; threshold must be in (0,1).
BinaryMask binarize(const GrayMask& mask, double threshold);

// Mask must be 640x480. A side with fewer than n_min foreground pixels in
// the band is reported absent.
RoICentroids roi_centroids(const BinaryMask& mask, int n_min = 10);

// nullopt when either centroid is absent (Delta unavailable this frame).
std::optional<OffsetEstimate> lateral_offset(const RoICentroids& c, double alpha);

// Zero-denominator convention: precision/recall/f1 fall back to 0.
SegScores seg_metrics(const BinaryMask& pred, const BinaryMask& gt);

// L = -N/(P+N) sum_{y=1} log(sigmoid(x)) - P/(P+N) sum_{y=0} log(1-sigmoid(x)).
// Sigmoid outputs are clamped to [1e-12, 1-1e-12] before the log. Throws on
// an empty batch; a single-class batch yields 0 and logs a warning.
double weighted_ce(std::span<const double> scores, std::span<const std::uint8_t> labels);

// --- image file formats ---

// Binary PGM (P5), maxval 255, probability = value / 255.
void write_pgm(const GrayMask& mask, const std::string& path);
GrayMask read_pgm(const std::string& path);

// Binary masks are stored with 0 -> 0 and 1 -> 255; loading accepts only
// those two values.
void write_pgm(const BinaryMask& mask, const std::string& path);
BinaryMask read_binary_pgm(const std::string& path);

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // interleaved r,g,b

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0) {}
  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    auto i = (static_cast<std::size_t>(y) * width + x) * 3;
    data[i] = r;
    data[i + 1] = g;
    data[i + 2] = b;
  }
};

// Binary PPM (P6), maxval 255.
void write_ppm(const RgbImage& img, const std::string& path);

}  // namespace lanepath
