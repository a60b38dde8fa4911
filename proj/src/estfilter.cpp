#include "lanepath/estfilter.hpp"

#include <stdexcept>

namespace lanepath {

MaskBuffer::MaskBuffer(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw std::invalid_argument("MaskBuffer: capacity must be >= 1");
}

GrayMask MaskBuffer::push_and_average(const GrayMask& mask) {
  if (!frames_.empty() &&
      (mask.width != frames_.front().width || mask.height != frames_.front().height))
    throw std::invalid_argument("MaskBuffer: dimension mismatch");
  frames_.push_back(mask);
  if (static_cast<int>(frames_.size()) > capacity_) frames_.pop_front();

  GrayMask mean(mask.width, mask.height, 0.0f);
  const float inv = 1.0f / static_cast<float>(frames_.size());
  for (const auto& frame : frames_) {
    const float* src = frame.data.data();
    float* dst = mean.data.data();
    for (std::size_t i = 0; i < mean.data.size(); ++i) dst[i] += src[i];
  }
  for (auto& v : mean.data) v *= inv;
  return mean;
}

CurvatureWindow::CurvatureWindow(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw std::invalid_argument("CurvatureWindow: capacity must be >= 1");
}

void CurvatureWindow::push(double kappa) {
  values_.push_back(kappa);
  if (static_cast<int>(values_.size()) > capacity_) values_.pop_front();
}

double kalman_estimate(const CurvatureWindow& window, const KalmanParams& params) {
  if (window.empty()) throw std::invalid_argument("kalman_estimate: empty window");
  if (!(params.r > 0.0) || params.q < 0.0)
    throw std::invalid_argument("kalman_estimate: need r > 0 and q >= 0");
  const auto& z = window.values();
  double x = z.front();
  double p = params.r;
  for (std::size_t k = 1; k < z.size(); ++k) {
    p += params.q;
    const double gain = p / (p + params.r);
    x += gain * (z[k] - x);
    p *= 1.0 - gain;
  }
  return x;
}

std::vector<double> block_average(std::span<const double> series, int block) {
  if (block < 1) throw std::invalid_argument("block_average: block must be >= 1");
  std::vector<double> out;
  out.reserve((series.size() + block - 1) / block);
  for (std::size_t i = 0; i < series.size(); i += block) {
    const std::size_t end = std::min(series.size(), i + block);
    double sum = 0.0;
    for (std::size_t j = i; j < end; ++j) sum += series[j];
    out.push_back(sum / static_cast<double>(end - i));
  }
  return out;
}

}  // namespace lanepath
