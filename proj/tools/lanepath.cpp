// lanepath CLI: simulate | replay | fit | analyze-arch | export-plots.
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lanepath/config.hpp"
#include "lanepath/evalkit.hpp"
#include "lanepath/log.hpp"
#include "lanepath/netarch.hpp"
#include "lanepath/pipeline.hpp"
#include "lanepath/simworld.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lanepath;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRunFailure = 1;
constexpr int kExitConfigError = 2;

// Published Fig.-1-style reference budgets used by --sweep-resolutions.
constexpr double kRefUnetParams = 31.04e6;
constexpr double kRefDsunetParams = 6.01e6;
constexpr double kRefUnetMacs = 62.51e9;
constexpr double kRefDsunetMacs = 9.56e9;

std::vector<std::pair<std::string, std::string>> parse_dotted_overrides(
    const std::vector<std::string>& extras) {
  std::vector<std::pair<std::string, std::string>> overrides;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    std::string tok = extras[i];
    if (tok.rfind("--", 0) != 0)
      throw ConfigError("", "unexpected argument: " + tok);
    tok = tok.substr(2);
    const auto eq = tok.find('=');
    if (eq != std::string::npos) {
      overrides.emplace_back(tok.substr(0, eq), tok.substr(eq + 1));
    } else {
      if (i + 1 >= extras.size()) throw ConfigError(tok, "missing value");
      overrides.emplace_back(tok, extras[++i]);
    }
  }
  return overrides;
}

RunConfig load_config(const std::string& config_path, const std::vector<std::string>& extras) {
  RunConfig cfg = config_path.empty() ? parse_config_text("") : parse_config(config_path);
  const auto overrides = parse_dotted_overrides(extras);
  if (!overrides.empty()) cfg = apply_overrides(cfg, overrides);
  return cfg;
}

void write_effective_config(const RunConfig& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  std::ofstream f(out_dir + "/effective_config.json");
  f << effective_config_text(cfg);
}

RunParams run_params_from(const RunConfig& cfg) {
  RunParams params;
  params.speed_kmh = cfg.eval.speed_kmh;
  params.frame_rate = cfg.eval.frame_rate;
  params.duration_s = cfg.eval.duration_s;
  return params;
}

int finish_run(const RunConfig& cfg, const RunRecord& record, const std::string& mode,
               const std::string& out_dir) {
  const EvalReport report = evaluate(record, mode, cfg.eval.use_raw_kappa);
  const bool failed = record.outcome == RunOutcome::off_lane;
  export_report(report, record, out_dir, cfg.eval.block, failed);
  std::printf("%s: %zu frames, kappa MAE %.6g 1/m (avail %.2f%%), delta MAE %.6g m (avail %.2f%%)\n",
              mode.c_str(), record.frames.size(), report.kappa_mae, report.kappa_avail_pct,
              report.delta_mae, report.delta_avail_pct);
  if (failed) {
    std::fprintf(stderr, "run failed: vehicle left the lane at s=%.1f m (max |d| %.2f m)\n",
                 record.final_state.s, record.max_abs_d);
    return kExitRunFailure;
  }
  std::printf("outcome: %s, max |d| %.3f m\n",
              record.outcome == RunOutcome::completed ? "completed" : "duration reached",
              record.max_abs_d);
  return kExitOk;
}

int cmd_simulate(const RunConfig& cfg, const std::string& out_dir, bool dump_masks, bool oracle,
                 const std::string& sweep) {
  write_effective_config(cfg, out_dir);
  if (sweep.empty()) {
    const Track track = build_track(cfg.track);
    RunParams params = run_params_from(cfg);
    params.oracle_perception = oracle;
    if (dump_masks) params.dump_masks_dir = out_dir + "/masks";
    const RunRecord record = run_dynamic(track, cfg.camera, cfg.render, cfg.pipeline, params);
    return finish_run(cfg, record, "dynamic", out_dir);
  }

  // --sweep key=v1,v2,... fans out one run per value on worker threads.
  const auto eq = sweep.find('=');
  if (eq == std::string::npos)
    throw ConfigError("sweep", "expected key=v1,v2,...");
  const std::string key = sweep.substr(0, eq);
  std::vector<std::string> values;
  std::stringstream ss(sweep.substr(eq + 1));
  std::string v;
  while (std::getline(ss, v, ',')) values.push_back(v);
  if (values.empty()) throw ConfigError("sweep", "no values given");

  std::vector<RunConfig> cfgs;
  for (const auto& value : values) cfgs.push_back(apply_overrides(cfg, {{key, value}}));

  std::vector<RunRecord> records(values.size());
  std::vector<std::string> errors(values.size());
  std::vector<std::thread> workers;
  for (std::size_t i = 0; i < values.size(); ++i) {
    workers.emplace_back([&, i] {
      try {
        const Track track = build_track(cfgs[i].track);
        records[i] = run_dynamic(track, cfgs[i].camera, cfgs[i].render, cfgs[i].pipeline,
                                 run_params_from(cfgs[i]));
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    });
  }
  for (auto& w : workers) w.join();

  int exit_code = kExitOk;
  std::vector<std::pair<std::string, EvalReport>> reports;
  std::string safe_key = key;
  std::replace(safe_key.begin(), safe_key.end(), '.', '_');
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!errors[i].empty()) {
      std::fprintf(stderr, "%s=%s failed: %s\n", key.c_str(), values[i].c_str(),
                   errors[i].c_str());
      exit_code = kExitRunFailure;
      continue;
    }
    const std::string sub = out_dir + "/sweep_" + safe_key + "_" + values[i];
    const EvalReport report = evaluate(records[i], "dynamic", cfg.eval.use_raw_kappa);
    export_report(report, records[i], sub, cfg.eval.block,
                  records[i].outcome == RunOutcome::off_lane);
    if (records[i].outcome == RunOutcome::off_lane) exit_code = kExitRunFailure;
    reports.emplace_back(key + "=" + values[i], report);
  }
  std::printf("%s", comparison_table(reports).c_str());
  return exit_code;
}

int cmd_replay(const RunConfig& cfg, const std::string& out_dir, const std::string& masks_dir,
               bool dump_masks) {
  write_effective_config(cfg, out_dir);
  if (masks_dir.empty()) {
    const Track track = build_track(cfg.track);
    RunParams params = run_params_from(cfg);
    if (dump_masks) params.dump_masks_dir = out_dir + "/masks";
    const RunRecord record =
        run_static(track, cfg.camera, cfg.render, cfg.pipeline, cfg.eval.n_frames, params);
    return finish_run(cfg, record, "static", out_dir);
  }

  // Replay recorded masks; ground truth comes from gt.csv when present.
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(masks_dir))
    if (entry.path().extension() == ".pgm") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ConfigError("masks", "no .pgm files in " + masks_dir);

  struct Gt {
    double kappa = std::nan("");
    double delta = std::nan("");
  };
  std::vector<Gt> gt(files.size());
  const fs::path gt_path = fs::path(masks_dir) / "gt.csv";
  if (fs::exists(gt_path)) {
    std::ifstream f(gt_path);
    std::string line;
    std::getline(f, line);  // header
    while (std::getline(f, line)) {
      std::stringstream row(line);
      std::string cell;
      std::vector<std::string> cells;
      while (std::getline(row, cell, ',')) cells.push_back(cell);
      if (cells.size() < 3) continue;
      const auto idx = static_cast<std::size_t>(std::stol(cells[0]));
      if (idx < gt.size()) gt[idx] = {std::stod(cells[1]), std::stod(cells[2])};
    }
  }

  PipelineSession session(homography_from_camera(cfg.camera), cfg.pipeline);
  RunRecord record;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (cfg.eval.n_frames > 0 && static_cast<long>(i) >= cfg.eval.n_frames) break;
    SimFrame frame;
    frame.result = session.process_frame(read_pgm(files[i].string()));
    frame.kappa_gt = gt[i].kappa;
    frame.delta_gt = gt[i].delta;
    record.frames.push_back(std::move(frame));
  }
  return finish_run(cfg, record, "static", out_dir);
}

int cmd_fit(const RunConfig& cfg, const std::string& out_dir, const std::string& mask_path,
            const std::string& calib_path) {
  write_effective_config(cfg, out_dir);
  Homography h = calib_path.empty() ? homography_from_camera(cfg.camera)
                                    : load_calibration(calib_path).h;
  PipelineConfig pipeline_cfg = cfg.pipeline;
  pipeline_cfg.render_overlay = true;
  PipelineSession session(h, pipeline_cfg);
  const FrameResult result = session.process_frame(read_pgm(mask_path));

  json j;
  j["frame_idx"] = result.frame_idx;
  j["kappa_avail"] = result.kappa_avail;
  j["delta_avail"] = result.delta_avail;
  if (result.kappa_raw) j["kappa_raw"] = *result.kappa_raw;
  if (result.kappa_hat) j["kappa_hat"] = *result.kappa_hat;
  if (result.delta_px) j["delta_px"] = *result.delta_px;
  if (result.delta_m) j["delta_m"] = *result.delta_m;
  if (result.lane_model) {
    j["lane_model"] = {{"a", result.lane_model->a},
                       {"b", result.lane_model->b},
                       {"c_left", result.lane_model->c_left},
                       {"c_right", result.lane_model->c_right},
                       {"n_points_used", result.lane_model->n_points_used},
                       {"residual_rms", result.lane_model->residual_rms}};
  }
  std::ofstream(out_dir + "/frame_result.json") << j.dump(2) << "\n";
  std::printf("%s\n", j.dump(2).c_str());
  if (result.overlay) {
    write_ppm(*result.overlay, out_dir + "/overlay.ppm");
    std::printf("overlay written to %s/overlay.ppm\n", out_dir.c_str());
  }
  return kExitOk;
}

void write_layer_csv(const CostReport& report, const std::string& path) {
  std::ofstream f(path);
  f << "name,kind,out_ch,out_w,out_h,params,macs\n";
  for (const auto& l : report.per_layer)
    f << l.name << ',' << layer_kind_name(l.kind) << ',' << l.out_ch << ',' << l.out_w << ','
      << l.out_h << ',' << l.params << ',' << l.macs << '\n';
}

int cmd_analyze_arch(const RunConfig& cfg, const std::string& out_dir, bool sweep_resolutions) {
  fs::create_directories(out_dir);
  const NetGraph unet = unet_graph();
  const NetGraph dsunet = dsunet_graph();
  const CostReport unet_cost = count_macs(unet, cfg.arch.input_w, cfg.arch.input_h);
  const CostReport dsunet_cost = count_macs(dsunet, cfg.arch.input_w, cfg.arch.input_h);

  write_layer_csv(unet_cost, out_dir + "/unet_layers.csv");
  write_layer_csv(dsunet_cost, out_dir + "/dsunet_layers.csv");

  json j;
  j["input_w"] = cfg.arch.input_w;
  j["input_h"] = cfg.arch.input_h;
  j["unet"] = {{"conv_layers", conv_layer_count(unet)},
               {"params", unet_cost.params},
               {"macs", unet_cost.macs}};
  j["dsunet"] = {{"conv_layers", conv_layer_count(dsunet)},
                 {"params", dsunet_cost.params},
                 {"macs", dsunet_cost.macs}};
  j["param_ratio"] = static_cast<double>(unet_cost.params) / dsunet_cost.params;
  j["mac_ratio"] = static_cast<double>(unet_cost.macs) / dsunet_cost.macs;
  std::ofstream(out_dir + "/arch_summary.json") << j.dump(2) << "\n";

  std::printf("network   conv layers   params (M)    MACs (B) @ %dx%d\n", cfg.arch.input_w,
              cfg.arch.input_h);
  std::printf("UNet      %11d   %10.3f   %9.3f\n", conv_layer_count(unet),
              unet_cost.params / 1e6, unet_cost.macs / 1e9);
  std::printf("DSUNet    %11d   %10.3f   %9.3f\n", conv_layer_count(dsunet),
              dsunet_cost.params / 1e6, dsunet_cost.macs / 1e9);
  std::printf("ratio     %11s   %10.2fx  %8.2fx\n", "",
              static_cast<double>(unet_cost.params) / dsunet_cost.params,
              static_cast<double>(unet_cost.macs) / dsunet_cost.macs);

  if (sweep_resolutions) {
    std::printf("\nresolution sweep vs published budgets (62.51 B / 9.56 B):\n");
    const std::vector<std::pair<int, int>> candidates = {
        {640, 480}, {512, 256}, {480, 272}, {448, 192}, {416, 208}, {400, 208},
        {352, 240}, {336, 240}, {320, 256}, {320, 240}, {288, 288}, {256, 256},
        {256, 192}, {160, 128}};
    for (const auto& [w, h] : candidates) {
      const double mu = static_cast<double>(count_macs(unet, w, h).macs);
      const double md = static_cast<double>(count_macs(dsunet, w, h).macs);
      std::printf("  %4dx%-4d  UNet %7.2f B (%+6.2f%%)  DSUNet %6.3f B (%+6.2f%%)\n", w, h,
                  mu / 1e9, 100.0 * (mu - kRefUnetMacs) / kRefUnetMacs, md / 1e9,
                  100.0 * (md - kRefDsunetMacs) / kRefDsunetMacs);
    }
    std::printf("param budgets: UNet %.3f M (ref %.2f M), DSUNet %.3f M (ref %.2f M)\n",
                unet_cost.params / 1e6, kRefUnetParams / 1e6, dsunet_cost.params / 1e6,
                kRefDsunetParams / 1e6);
  }
  return kExitOk;
}

int cmd_export_plots(const RunConfig& cfg, const std::string& out_dir,
                     const std::string& frames_path) {
  std::ifstream f(frames_path);
  if (!f) throw ConfigError("frames", "cannot open " + frames_path);
  std::string line;
  std::getline(f, line);  // header
  std::vector<double> kappa_hat, kappa_gt, delta_m, delta_gt;
  while (std::getline(f, line)) {
    std::stringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() < 6) continue;
    kappa_hat.push_back(std::stod(cells[1]));
    kappa_gt.push_back(std::stod(cells[2]));
    delta_m.push_back(std::stod(cells[3]));
    delta_gt.push_back(std::stod(cells[4]));
  }
  if (kappa_hat.empty()) throw ConfigError("frames", "no data rows in " + frames_path);

  fs::create_directories(out_dir);
  const int block = cfg.eval.block;
  const auto bk_kh = block_average(kappa_hat, block);
  const auto bk_kg = block_average(kappa_gt, block);
  const auto bk_dm = block_average(delta_m, block);
  const auto bk_dg = block_average(delta_gt, block);
  std::ofstream out(out_dir + "/series_blocked.csv");
  out << "block_idx,kappa_hat,kappa_gt,delta_m,delta_gt,full_block\n";
  const std::size_t n_full = kappa_hat.size() / static_cast<std::size_t>(block);
  char buf[256];
  for (std::size_t i = 0; i < bk_kh.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g,%d\n", i, bk_kh[i], bk_kg[i],
                  bk_dm[i], bk_dg[i], i < n_full ? 1 : 0);
    out << buf;
  }
  std::printf("wrote %s/series_blocked.csv (%zu points, block %d)\n", out_dir.c_str(),
              bk_kh.size(), block);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lane perception post-processing, path prediction and simulation"};
  app.require_subcommand(1);
  app.allow_extras();

  std::string config_path, out_dir = "out";
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--out", out_dir, "output directory (default ./out)");

  auto* simulate = app.add_subcommand("simulate", "closed-loop dynamic run");
  simulate->allow_extras();
  bool dump_masks = false, oracle = false;
  std::string sweep;
  simulate->add_flag("--dump-masks", dump_masks, "write rendered masks and gt.csv");
  simulate->add_flag("--oracle", oracle, "drive on ideal measurements (controller sanity)");
  simulate->add_option("--sweep", sweep, "key=v1,v2,... parameter sweep");

  auto* replay = app.add_subcommand("replay", "static run from masks or internal render");
  replay->allow_extras();
  std::string masks_dir;
  bool replay_dump = false;
  replay->add_option("--masks", masks_dir, "directory of frame_*.pgm (with optional gt.csv)");
  replay->add_flag("--dump-masks", replay_dump, "write rendered masks and gt.csv");

  auto* fit = app.add_subcommand("fit", "single mask -> frame result + overlay");
  fit->allow_extras();
  std::string mask_path, calib_path;
  fit->add_option("--mask", mask_path, "input PGM mask")->required();
  fit->add_option("--calib", calib_path, "calibration file (camera or 3x3 matrix)");

  auto* arch = app.add_subcommand("analyze-arch", "UNet/DSUNet parameter and MAC budgets");
  arch->allow_extras();
  std::string input_hw;
  bool sweep_resolutions = false;
  arch->add_option("--input-hw", input_hw, "WxH, e.g. 400x208");
  arch->add_flag("--sweep-resolutions", sweep_resolutions, "print the budget sweep table");

  auto* plots = app.add_subcommand("export-plots", "block-averaged series from frames.csv");
  plots->allow_extras();
  std::string frames_path;
  int block_override = 0;
  plots->add_option("--frames", frames_path, "frames.csv from a previous run")->required();
  plots->add_option("--block", block_override, "block size (default from config, 11)");

  CLI11_PARSE(app, argc, argv);

  try {
    std::vector<std::string> extras = app.remaining();
    for (auto* sub : {simulate, replay, fit, arch, plots}) {
      if (!sub->parsed()) continue;
      const auto sub_extras = sub->remaining();
      extras.insert(extras.end(), sub_extras.begin(), sub_extras.end());
    }
    RunConfig cfg = load_config(config_path, extras);
    if (!input_hw.empty()) {
      const auto x = input_hw.find('x');
      if (x == std::string::npos) throw ConfigError("input-hw", "expected WxH");
      cfg.arch.input_w = std::stoi(input_hw.substr(0, x));
      cfg.arch.input_h = std::stoi(input_hw.substr(x + 1));
      validate(cfg);
    }
    if (block_override > 0) {
      cfg.eval.block = block_override;
      validate(cfg);
    }

    if (simulate->parsed()) return cmd_simulate(cfg, out_dir, dump_masks, oracle, sweep);
    if (replay->parsed()) return cmd_replay(cfg, out_dir, masks_dir, replay_dump);
    if (fit->parsed()) return cmd_fit(cfg, out_dir, mask_path, calib_path);
    if (arch->parsed()) return cmd_analyze_arch(cfg, out_dir, sweep_resolutions);
    if (plots->parsed()) return cmd_export_plots(cfg, out_dir, frames_path);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRunFailure;
  }
  return kExitOk;
}
