#include "lanepath/imagekit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "lanepath/log.hpp"

namespace lanepath {

BinaryMask binarize(const GrayMask& mask, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw std::invalid_argument("binarize: threshold must be in (0,1)");
  BinaryMask out(mask.width, mask.height);
  const float t = static_cast<float>(threshold);
  for (std::size_t i = 0; i < mask.data.size(); ++i)
    out.data[i] = mask.data[i] >= t ? 1 : 0;
  return out;
}

RoICentroids roi_centroids(const BinaryMask& mask, int n_min) {
  if (mask.width != kMaskWidth || mask.height != kMaskHeight)
    throw std::invalid_argument("roi_centroids: mask must be 640x480");
  std::int64_t sum_left = 0, sum_right = 0;
  int n_left = 0, n_right = 0;
  for (int y = kRoiRowBegin; y <= kRoiRowEnd; ++y) {
    const std::uint8_t* row = &mask.data[static_cast<std::size_t>(y) * mask.width];
    for (int x = 0; x <= kRoiSplitX; ++x) {
      if (row[x]) {
        sum_left += x;
        ++n_left;
      }
    }
    for (int x = kRoiSplitX + 1; x < mask.width; ++x) {
      if (row[x]) {
        sum_right += x;
        ++n_right;
      }
    }
  }
  RoICentroids c;
  c.n_left = n_left;
  c.n_right = n_right;
  if (n_left >= n_min) c.x_left = static_cast<double>(sum_left) / n_left;
  if (n_right >= n_min) c.x_right = static_cast<double>(sum_right) / n_right;
  return c;
}

std::optional<OffsetEstimate> lateral_offset(const RoICentroids& c, double alpha) {
  if (!c.x_left || !c.x_right) return std::nullopt;
  OffsetEstimate est;
  est.alpha = alpha;
  est.delta0 = 320.0 - (*c.x_left + *c.x_right) / 2.0;
  est.delta = alpha * est.delta0;
  est.lane_width = *c.x_right - *c.x_left;
  return est;
}

SegScores seg_metrics(const BinaryMask& pred, const BinaryMask& gt) {
  if (pred.width != gt.width || pred.height != gt.height)
    throw std::invalid_argument("seg_metrics: dimension mismatch");
  SegScores s;
  for (std::size_t i = 0; i < pred.data.size(); ++i) {
    const bool p = pred.data[i] != 0;
    const bool g = gt.data[i] != 0;
    if (p && g)
      ++s.tp;
    else if (p && !g)
      ++s.fp;
    else if (!p && g)
      ++s.fn;
    else
      ++s.tn;
  }
  const double total = static_cast<double>(s.tp + s.tn + s.fp + s.fn);
  s.accuracy = total > 0 ? (s.tp + s.tn) / total : 0.0;
  s.precision = (s.tp + s.fp) > 0 ? static_cast<double>(s.tp) / (s.tp + s.fp) : 0.0;
  s.recall = (s.tp + s.fn) > 0 ? static_cast<double>(s.tp) / (s.tp + s.fn) : 0.0;
  s.f1 = (s.precision + s.recall) > 0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
                                      : 0.0;
  return s;
}

double weighted_ce(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.empty()) throw std::invalid_argument("weighted_ce: empty batch");
  if (scores.size() != labels.size())
    throw std::invalid_argument("weighted_ce: scores/labels size mismatch");
  std::size_t p = 0;
  for (auto y : labels)
    if (y) ++p;
  const std::size_t n = labels.size() - p;
  if (p == 0 || n == 0)
    log(LogLevel::warn, "weighted_ce: single-class batch (P=%zu, N=%zu), loss is 0", p, n);

  constexpr double kClamp = 1e-12;
  double pos_sum = 0.0, neg_sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    double sig = 1.0 / (1.0 + std::exp(-scores[i]));
    sig = std::clamp(sig, kClamp, 1.0 - kClamp);
    if (labels[i])
      pos_sum += std::log(sig);
    else
      neg_sum += std::log(1.0 - sig);
  }
  const double total = static_cast<double>(p + n);
  return -(static_cast<double>(n) / total) * pos_sum - (static_cast<double>(p) / total) * neg_sum;
}

// --- PGM / PPM ---

namespace {

void write_pnm(const std::string& path, const char* magic, int width, int height,
               const std::uint8_t* bytes, std::size_t n) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << magic << "\n" << width << " " << height << "\n255\n";
  f.write(reinterpret_cast<const char*>(bytes), static_cast<std::streamsize>(n));
  if (!f) throw std::runtime_error("write failed: " + path);
}

int next_pnm_token(std::istream& in) {
  // Skips whitespace and '#' comments, returns a nonnegative integer.
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (!std::isspace(c)) {
      break;
    }
    c = in.get();
  }
  if (c == EOF || !std::isdigit(c)) throw std::runtime_error("malformed PNM header");
  int value = 0;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    c = in.get();
  }
  return value;
}

std::vector<std::uint8_t> read_pnm(const std::string& path, const char* magic,
                                   int& width, int& height, int channels) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  char m0 = 0, m1 = 0;
  f.get(m0);
  f.get(m1);
  if (m0 != magic[0] || m1 != magic[1])
    throw std::runtime_error(path + ": not a " + std::string(magic) + " file");
  width = next_pnm_token(f);
  height = next_pnm_token(f);
  const int maxval = next_pnm_token(f);
  if (maxval != 255) throw std::runtime_error(path + ": only maxval 255 is supported");
  // Exactly one whitespace byte separates the header from the raster; the
  // token reader has already consumed it.
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(width) * height * channels);
  f.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (f.gcount() != static_cast<std::streamsize>(bytes.size()))
    throw std::runtime_error(path + ": truncated raster");
  return bytes;
}

}  // namespace

void write_pgm(const GrayMask& mask, const std::string& path) {
  std::vector<std::uint8_t> bytes(mask.data.size());
  for (std::size_t i = 0; i < mask.data.size(); ++i) {
    const long v = std::lround(static_cast<double>(mask.data[i]) * 255.0);
    bytes[i] = static_cast<std::uint8_t>(std::clamp(v, 0L, 255L));
  }
  write_pnm(path, "P5", mask.width, mask.height, bytes.data(), bytes.size());
}

GrayMask read_pgm(const std::string& path) {
  int w = 0, h = 0;
  const auto bytes = read_pnm(path, "P5", w, h, 1);
  GrayMask mask(w, h);
  for (std::size_t i = 0; i < bytes.size(); ++i)
    mask.data[i] = static_cast<float>(bytes[i]) / 255.0f;
  return mask;
}

void write_pgm(const BinaryMask& mask, const std::string& path) {
  std::vector<std::uint8_t> bytes(mask.data.size());
  for (std::size_t i = 0; i < mask.data.size(); ++i) bytes[i] = mask.data[i] ? 255 : 0;
  write_pnm(path, "P5", mask.width, mask.height, bytes.data(), bytes.size());
}

BinaryMask read_binary_pgm(const std::string& path) {
  int w = 0, h = 0;
  const auto bytes = read_pnm(path, "P5", w, h, 1);
  BinaryMask mask(w, h);
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    if (bytes[i] != 0 && bytes[i] != 255)
      throw std::runtime_error(path + ": not a binary mask (value not 0/255)");
    mask.data[i] = bytes[i] ? 1 : 0;
  }
  return mask;
}

void write_ppm(const RgbImage& img, const std::string& path) {
  write_pnm(path, "P6", img.width, img.height, img.data.data(), img.data.size());
}

}  // namespace lanepath
