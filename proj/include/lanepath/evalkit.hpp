// sMAE/dMAE/availability computation and run export (frames.csv,
// run_summary.json, series_blocked.csv).
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lanepath/simworld.hpp"

namespace lanepath {

struct EvalReport {
  std::string mode;  // "static" or "dynamic"
  double kappa_mae = 0.0;      // 1/m
  double delta_mae = 0.0;      // m
  double kappa_avail_pct = 0.0;
  double delta_avail_pct = 0.0;
  long n_frames = 0;
};

// Mean |est - truth| over frames with avail = true. Throws
// std::invalid_argument on length mismatch and std::runtime_error when no
// frame is available.
double mae(std::span<const double> estimates, std::span<const double> truths,
           std::span<const std::uint8_t> avail);

// 100 * count(true) / length. Throws std::invalid_argument on empty input.
double avail_pct(std::span<const std::uint8_t> avail);

// MAEs and availability over a run. kappa uses the Kalman-filtered
// estimate unless use_raw_kappa is set.
EvalReport evaluate(const RunRecord& run, const std::string& mode,
                    bool use_raw_kappa = false);

// Writes run_summary.json, frames.csv (frame_idx, kappa_hat, kappa_gt,
// delta_m, delta_gt, delta_avail) and series_blocked.csv (block-averaged
// series, trailing partial block marked). Throws std::runtime_error on I/O
// failure.
void export_report(const EvalReport& report, const RunRecord& run,
                   const std::string& out_dir, int block = 11, bool partial = false);

// Table-3-shaped text: rows kappa / delta MAE and availability, one column
// per configuration.
std::string comparison_table(const std::vector<std::pair<std::string, EvalReport>>& entries);

}  // namespace lanepath
