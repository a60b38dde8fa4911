#include "lanepath/evalkit.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "lanepath/estfilter.hpp"

namespace lanepath {

double mae(std::span<const double> estimates, std::span<const double> truths,
           std::span<const std::uint8_t> avail) {
  if (estimates.size() != truths.size() || estimates.size() != avail.size())
    throw std::invalid_argument("mae: length mismatch");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    if (!avail[i]) continue;
    sum += std::abs(estimates[i] - truths[i]);
    ++n;
  }
  if (n == 0) throw std::runtime_error("mae: no available frames");
  return sum / static_cast<double>(n);
}

double avail_pct(std::span<const std::uint8_t> avail) {
  if (avail.empty()) throw std::invalid_argument("avail_pct: empty input");
  std::size_t n = 0;
  for (const auto a : avail)
    if (a) ++n;
  return 100.0 * static_cast<double>(n) / static_cast<double>(avail.size());
}

EvalReport evaluate(const RunRecord& run, const std::string& mode, bool use_raw_kappa) {
  EvalReport report;
  report.mode = mode;
  report.n_frames = static_cast<long>(run.frames.size());
  if (run.frames.empty()) return report;

  std::vector<double> kappa_est, kappa_gt, delta_est, delta_gt;
  std::vector<std::uint8_t> kappa_avail, delta_avail;
  for (const auto& f : run.frames) {
    const auto& kappa = use_raw_kappa ? f.result.kappa_raw : f.result.kappa_hat;
    kappa_est.push_back(kappa.value_or(0.0));
    kappa_gt.push_back(f.kappa_gt);
    kappa_avail.push_back(kappa.has_value() ? 1 : 0);
    delta_est.push_back(f.result.delta_m.value_or(0.0));
    delta_gt.push_back(f.delta_gt);
    delta_avail.push_back(f.result.delta_avail ? 1 : 0);
  }
  report.kappa_avail_pct = avail_pct(kappa_avail);
  report.delta_avail_pct = avail_pct(delta_avail);
  report.kappa_mae = report.kappa_avail_pct > 0.0 ? mae(kappa_est, kappa_gt, kappa_avail)
                                                  : std::nan("");
  report.delta_mae = report.delta_avail_pct > 0.0 ? mae(delta_est, delta_gt, delta_avail)
                                                  : std::nan("");
  return report;
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void export_report(const EvalReport& report, const RunRecord& run, const std::string& out_dir,
                   int block, bool partial) {
  std::filesystem::create_directories(out_dir);
  const bool dynamic = report.mode == "dynamic";

  {
    nlohmann::json j;
    j["mode"] = report.mode;
    j["n_frames"] = report.n_frames;
    j[dynamic ? "kappa_dmae" : "kappa_smae"] = report.kappa_mae;
    j[dynamic ? "delta_dmae" : "delta_smae"] = report.delta_mae;
    j["kappa_avail_pct"] = report.kappa_avail_pct;
    j["delta_avail_pct"] = report.delta_avail_pct;
    j["outcome"] = run.outcome == RunOutcome::completed         ? "completed"
                   : run.outcome == RunOutcome::off_lane        ? "off_lane"
                                                                : "duration_reached";
    j["max_abs_d"] = run.max_abs_d;
    j["partial"] = partial;
    std::ofstream f(out_dir + "/run_summary.json");
    if (!f) throw std::runtime_error("cannot write " + out_dir + "/run_summary.json");
    f << j.dump(2) << "\n";
    if (!f) throw std::runtime_error("write failed: " + out_dir + "/run_summary.json");
  }

  std::vector<double> kappa_hat, kappa_gt, delta_m, delta_gt;
  {
    std::ofstream f(out_dir + "/frames.csv");
    if (!f) throw std::runtime_error("cannot write " + out_dir + "/frames.csv");
    f << "frame_idx,kappa_hat,kappa_gt,delta_m,delta_gt,delta_avail\n";
    for (const auto& frame : run.frames) {
      const double kh = frame.result.kappa_hat.value_or(std::nan(""));
      const double dm = frame.result.delta_m.value_or(std::nan(""));
      f << frame.result.frame_idx << ',' << fmt_double(kh) << ',' << fmt_double(frame.kappa_gt)
        << ',' << fmt_double(dm) << ',' << fmt_double(frame.delta_gt) << ','
        << (frame.result.delta_avail ? 1 : 0) << '\n';
      kappa_hat.push_back(kh);
      kappa_gt.push_back(frame.kappa_gt);
      delta_m.push_back(dm);
      delta_gt.push_back(frame.delta_gt);
    }
    if (!f) throw std::runtime_error("write failed: " + out_dir + "/frames.csv");
  }

  {
    const auto bk_kh = block_average(kappa_hat, block);
    const auto bk_kg = block_average(kappa_gt, block);
    const auto bk_dm = block_average(delta_m, block);
    const auto bk_dg = block_average(delta_gt, block);
    std::ofstream f(out_dir + "/series_blocked.csv");
    if (!f) throw std::runtime_error("cannot write " + out_dir + "/series_blocked.csv");
    f << "block_idx,kappa_hat,kappa_gt,delta_m,delta_gt,full_block\n";
    const std::size_t n_full = run.frames.size() / static_cast<std::size_t>(block);
    for (std::size_t i = 0; i < bk_kh.size(); ++i) {
      f << i << ',' << fmt_double(bk_kh[i]) << ',' << fmt_double(bk_kg[i]) << ','
        << fmt_double(bk_dm[i]) << ',' << fmt_double(bk_dg[i]) << ','
        << (i < n_full ? 1 : 0) << '\n';
    }
    if (!f) throw std::runtime_error("write failed: " + out_dir + "/series_blocked.csv");
  }
}

std::string comparison_table(const std::vector<std::pair<std::string, EvalReport>>& entries) {
  std::string out;
  char buf[160];
  auto row = [&](const char* label, auto getter) {
    std::snprintf(buf, sizeof(buf), "%-14s", label);
    out += buf;
    for (const auto& [name, report] : entries) {
      std::snprintf(buf, sizeof(buf), " | %12.6g", getter(report));
      out += buf;
    }
    out += '\n';
  };
  std::snprintf(buf, sizeof(buf), "%-14s", "");
  out += buf;
  for (const auto& [name, report] : entries) {
    std::snprintf(buf, sizeof(buf), " | %12s", name.c_str());
    out += buf;
  }
  out += '\n';
  const bool dynamic = !entries.empty() && entries.front().second.mode == "dynamic";
  row(dynamic ? "kappa dMAE" : "kappa sMAE", [](const EvalReport& r) { return r.kappa_mae; });
  row(dynamic ? "delta dMAE" : "delta sMAE", [](const EvalReport& r) { return r.delta_mae; });
  row("kappa Avail %", [](const EvalReport& r) { return r.kappa_avail_pct; });
  row("delta Avail %", [](const EvalReport& r) { return r.delta_avail_pct; });
  return out;
}

}  // namespace lanepath
