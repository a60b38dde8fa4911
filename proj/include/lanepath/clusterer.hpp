// Lane-line dot extraction from binary masks and DBSCAN clustering.
#pragma once

#include <cstddef>
#include <vector>

#include "lanepath/imagekit.hpp"
#include "lanepath/viewgeom.hpp"

namespace lanepath {

// Centroid of one maximal horizontal run of foreground pixels.
struct Dot {
  double x = 0.0;     // sub-pixel run centroid
  int y = 0;          // image row
  int run_width = 1;  // run length in pixels
};

struct Clustering {
  static constexpr int kNoise = -1;
  std::vector<int> labels;  // per dot: cluster id 0..n_clusters-1, or kNoise
  int n_clusters = 0;
};

struct DbscanStats {
  std::size_t region_queries = 0;
  std::size_t distance_checks = 0;
};

// One dot per maximal run per row: (centroid x, row, run length).
std::vector<Dot> extract_dots(const BinaryMask& mask);

// Standard DBSCAN on (x,y) with Euclidean distance. The eps-neighborhood is
// inclusive and counts the point itself. Deterministic: clusters are
// numbered by the lowest-index core point that seeds them. Uses an eps-cell
// grid index, so work stays linear for bounded-density inputs; stats, when
// given, reports the number of candidate distance evaluations.
Clustering dbscan(const std::vector<Dot>& dots, double eps, int min_pts,
                  DbscanStats* stats = nullptr);

struct LaneSideDots {
  std::vector<Dot> left;
  std::vector<Dot> right;
  bool left_found = false;   // false signals NoLaneFound on that side;
  bool right_found = false;  // the caller reuses the previous lane state
};

// Maps each cluster to TDV through h and keeps, per side of the vehicle
// (near-end lateral v > 0 left, v < 0 right), the candidate nearest the
// vehicle axis; fragments within 0.6 m of the winner's lateral position
// merge into it. The side test uses the lateral position at the cluster's
// near end, which stays on its side of v = 0 on bends where the whole-
// cluster mean does not. Clusters smaller than min_cluster_size are
// discarded as speckle.
LaneSideDots select_lane_clusters(const Clustering& clustering, const std::vector<Dot>& dots,
                                  const Homography& h, int min_cluster_size = 12);

}  // namespace lanepath
