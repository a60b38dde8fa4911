#include "lanepath/clusterer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_map>

namespace lanepath {

std::vector<Dot> extract_dots(const BinaryMask& mask) {
  std::vector<Dot> dots;
  for (int y = 0; y < mask.height; ++y) {
    const std::uint8_t* row = &mask.data[static_cast<std::size_t>(y) * mask.width];
    int x = 0;
    while (x < mask.width) {
      if (!row[x]) {
        ++x;
        continue;
      }
      const int start = x;
      while (x < mask.width && row[x]) ++x;
      const int len = x - start;
      dots.push_back({(start + x - 1) / 2.0, y, len});
    }
  }
  return dots;
}

namespace {

// eps-cell grid over dot coordinates; a point's neighbors all live in the
// 3x3 cell block around it.
class DotGrid {
 public:
  DotGrid(const std::vector<Dot>& dots, double eps) : dots_(dots), eps_(eps) {
    cells_.reserve(dots.size());
    for (std::size_t i = 0; i < dots.size(); ++i)
      cells_[key(dots[i].x, static_cast<double>(dots[i].y))].push_back(static_cast<int>(i));
  }

  // Indices within eps (inclusive, self included), ascending.
  void query(int idx, std::vector<int>& out, DbscanStats* stats) const {
    out.clear();
    const double px = dots_[idx].x;
    const double py = static_cast<double>(dots_[idx].y);
    const double eps2 = eps_ * eps_;
    const auto cx = static_cast<std::int64_t>(std::floor(px / eps_));
    const auto cy = static_cast<std::int64_t>(std::floor(py / eps_));
    for (std::int64_t dy = -1; dy <= 1; ++dy) {
      for (std::int64_t dx = -1; dx <= 1; ++dx) {
        const auto it = cells_.find(pack(cx + dx, cy + dy));
        if (it == cells_.end()) continue;
        for (int j : it->second) {
          if (stats) ++stats->distance_checks;
          const double ddx = dots_[j].x - px;
          const double ddy = static_cast<double>(dots_[j].y) - py;
          if (ddx * ddx + ddy * ddy <= eps2) out.push_back(j);
        }
      }
    }
    std::sort(out.begin(), out.end());
  }

 private:
  static std::int64_t pack(std::int64_t cx, std::int64_t cy) {
    return (cx << 32) ^ (cy & 0xffffffff);
  }
  std::int64_t key(double x, double y) const {
    return pack(static_cast<std::int64_t>(std::floor(x / eps_)),
                static_cast<std::int64_t>(std::floor(y / eps_)));
  }

  const std::vector<Dot>& dots_;
  double eps_;
  std::unordered_map<std::int64_t, std::vector<int>> cells_;
};

}  // namespace

Clustering dbscan(const std::vector<Dot>& dots, double eps, int min_pts, DbscanStats* stats) {
  if (!(eps > 0.0)) throw std::invalid_argument("dbscan: eps must be > 0");
  if (min_pts < 1) throw std::invalid_argument("dbscan: min_pts must be >= 1");

  constexpr int kUndefined = -2;
  Clustering result;
  result.labels.assign(dots.size(), kUndefined);

  const DotGrid grid(dots, eps);
  std::vector<int> neighbors, expansion;
  std::vector<int> frontier;
  int cluster = 0;

  for (std::size_t i = 0; i < dots.size(); ++i) {
    if (result.labels[i] != kUndefined) continue;
    if (stats) ++stats->region_queries;
    grid.query(static_cast<int>(i), neighbors, stats);
    if (static_cast<int>(neighbors.size()) < min_pts) {
      result.labels[i] = Clustering::kNoise;
      continue;
    }
    result.labels[i] = cluster;
    frontier.assign(neighbors.begin(), neighbors.end());
    for (std::size_t f = 0; f < frontier.size(); ++f) {
      const int j = frontier[f];
      if (result.labels[j] == Clustering::kNoise) result.labels[j] = cluster;  // border point
      if (result.labels[j] != kUndefined) continue;
      result.labels[j] = cluster;
      if (stats) ++stats->region_queries;
      grid.query(j, expansion, stats);
      if (static_cast<int>(expansion.size()) >= min_pts)
        frontier.insert(frontier.end(), expansion.begin(), expansion.end());
    }
    ++cluster;
  }
  result.n_clusters = cluster;
  return result;
}

LaneSideDots select_lane_clusters(const Clustering& clustering, const std::vector<Dot>& dots,
                                  const Homography& h, int min_cluster_size) {
  // Side classification uses the lateral position at the cluster's near end
  // (dots within 3 m of its closest point): on a bend the far end of the
  // opposite line drifts across v = 0, the near end does not.
  struct Candidate {
    std::vector<TdvPoint> tdv;
    int total = 0;  // all dots in the cluster, mapped or not
    double u_min = std::numeric_limits<double>::infinity();
    double v_near = 0.0;
  };
  std::vector<Candidate> candidates(static_cast<std::size_t>(clustering.n_clusters));
  for (std::size_t i = 0; i < dots.size(); ++i) {
    const int label = clustering.labels[i];
    if (label < 0) continue;
    auto& cand = candidates[label];
    ++cand.total;
    const auto q = pm(h, {dots[i].x, static_cast<double>(dots[i].y)});
    if (!q || q->u <= 0.0) continue;  // above the horizon or behind the camera
    cand.tdv.push_back(*q);
    cand.u_min = std::min(cand.u_min, q->u);
  }

  constexpr double kNearWindow = 3.0;  // m
  int best_left = -1, best_right = -1;
  double best_left_v = std::numeric_limits<double>::infinity();
  double best_right_v = std::numeric_limits<double>::infinity();
  for (int c = 0; c < clustering.n_clusters; ++c) {
    auto& cand = candidates[c];
    if (cand.total < min_cluster_size || cand.tdv.empty()) continue;
    double v_sum = 0.0;
    int n = 0;
    for (const auto& q : cand.tdv) {
      if (q.u > cand.u_min + kNearWindow) continue;
      v_sum += q.v;
      ++n;
    }
    cand.v_near = v_sum / n;
    if (cand.v_near > 0.0 && cand.v_near < best_left_v) {
      best_left_v = cand.v_near;
      best_left = c;
    } else if (cand.v_near < 0.0 && -cand.v_near < best_right_v) {
      best_right_v = -cand.v_near;
      best_right = c;
    }
  }

  // Fragments of one line (an occluder can split it) sit at the same
  // lateral position; absorb candidates within the merge tolerance of the
  // winner. Well below half a lane width, so the adjacent lane never joins.
  constexpr double kMergeTolerance = 0.6;  // m
  std::vector<std::uint8_t> to_left(candidates.size(), 0), to_right(candidates.size(), 0);
  for (int c = 0; c < clustering.n_clusters; ++c) {
    const auto& cand = candidates[c];
    if (cand.total < min_cluster_size || cand.tdv.empty()) continue;
    if (best_left >= 0 && cand.v_near > 0.0 &&
        std::abs(cand.v_near - best_left_v) <= kMergeTolerance)
      to_left[c] = 1;
    else if (best_right >= 0 && cand.v_near < 0.0 &&
             std::abs(-cand.v_near - best_right_v) <= kMergeTolerance)
      to_right[c] = 1;
  }

  LaneSideDots sides;
  sides.left_found = best_left >= 0;
  sides.right_found = best_right >= 0;
  for (std::size_t i = 0; i < dots.size(); ++i) {
    const int label = clustering.labels[i];
    if (label < 0) continue;
    if (to_left[label])
      sides.left.push_back(dots[i]);
    else if (to_right[label])
      sides.right.push_back(dots[i]);
  }
  return sides;
}

}  // namespace lanepath
