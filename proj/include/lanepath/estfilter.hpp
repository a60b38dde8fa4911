// Temporal smoothing: 5-frame mask averaging, 1-D Kalman filtering of
// curvature over a sliding window, block averaging for plot series.
#pragma once

#include <deque>
#include <span>
#include <vector>

#include "lanepath/imagekit.hpp"

namespace lanepath {

// FIFO of the most recent masks; push returns the pixel-wise mean.
class MaskBuffer {
 public:
  explicit MaskBuffer(int capacity = 5);

  // Throws std::invalid_argument when dimensions differ from buffered masks.
  GrayMask push_and_average(const GrayMask& mask);

  int size() const { return static_cast<int>(frames_.size()); }
  int capacity() const { return capacity_; }
  void clear() { frames_.clear(); }

 private:
  int capacity_;
  std::deque<GrayMask> frames_;
};

struct KalmanParams {
  double q = 0.0001;  // process-noise variance
  double r = 0.01;    // measurement-noise variance
};

// FIFO of the most recent curvature measurements.
class CurvatureWindow {
 public:
  explicit CurvatureWindow(int capacity = 15);

  void push(double kappa);
  bool empty() const { return values_.empty(); }
  int size() const { return static_cast<int>(values_.size()); }
  int capacity() const { return capacity_; }
  const std::deque<double>& values() const { return values_; }
  void clear() { values_.clear(); }

 private:
  int capacity_;
  std::deque<double> values_;
};

// Scalar random-walk filter (x_k = x_{k-1} + w, z_k = x_k + v) run over the
// window in order: x0 = first measurement, P0 = r; then per step
// P += q, K = P/(P+r), x += K (z - x), P = (1-K) P. Returns the final
// posterior mean. Throws std::invalid_argument on an empty window.
double kalman_estimate(const CurvatureWindow& window, const KalmanParams& params);

// Means of consecutive blocks; a trailing partial block keeps the mean of
// its members (exporters mark it).
std::vector<double> block_average(std::span<const double> series, int block = 11);

}  // namespace lanepath
