#include "lanepath/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

namespace lanepath {

using nlohmann::json;

namespace {

// Benchmark track is the default so an empty config file runs the standard
// evaluation out of the box.
RunConfig default_config() {
  RunConfig cfg;
  cfg.track = benchmark_track_spec();
  return cfg;
}

template <typename T>
void read_key(const json& j, const std::string& section, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(section + "." + key, std::string("bad value: ") + e.what());
  }
}

void check_keys(const json& j, const std::string& section,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(section, "must be an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed)
      if (key == a) {
        known = true;
        break;
      }
    if (!known) throw ConfigError(section + "." + key, "unknown key");
  }
}

void parse_pipeline(const json& j, PipelineConfig& p) {
  check_keys(j, "pipeline",
              {"threshold", "alpha", "beta", "u_s", "u_f", "forgetting", "ridge",
               "kalman_q", "kalman_r", "n_min", "anchored_path", "mask_window",
               "kalman_window", "render_overlay", "curvature_formula"});
  read_key(j, "pipeline", "threshold", p.threshold);
  read_key(j, "pipeline", "alpha", p.alpha);
  read_key(j, "pipeline", "beta", p.beta);
  read_key(j, "pipeline", "u_s", p.u_s);
  read_key(j, "pipeline", "u_f", p.u_f);
  read_key(j, "pipeline", "forgetting", p.forgetting);
  read_key(j, "pipeline", "ridge", p.ridge);
  read_key(j, "pipeline", "kalman_q", p.kalman_q);
  read_key(j, "pipeline", "kalman_r", p.kalman_r);
  read_key(j, "pipeline", "n_min", p.n_min);
  read_key(j, "pipeline", "anchored_path", p.anchored_path);
  read_key(j, "pipeline", "mask_window", p.mask_window);
  read_key(j, "pipeline", "kalman_window", p.kalman_window);
  read_key(j, "pipeline", "render_overlay", p.render_overlay);
  if (j.contains("curvature_formula")) {
    const auto s = j.at("curvature_formula").get<std::string>();
    if (s == "standard")
      p.curvature_formula = CurvatureFormula::standard;
    else if (s == "paper_literal")
      p.curvature_formula = CurvatureFormula::paper_literal;
    else
      throw ConfigError("pipeline.curvature_formula", "must be standard or paper_literal");
  }
}

void parse_cluster(const json& j, PipelineConfig& p) {
  check_keys(j, "cluster", {"eps", "min_pts", "min_cluster_size"});
  read_key(j, "cluster", "eps", p.eps);
  read_key(j, "cluster", "min_pts", p.min_pts);
  read_key(j, "cluster", "min_cluster_size", p.min_cluster_size);
}

void parse_camera(const json& j, CameraModel& c) {
  check_keys(j, "camera", {"height", "pitch", "focal", "cx", "cy"});
  read_key(j, "camera", "height", c.height);
  read_key(j, "camera", "pitch", c.pitch);
  read_key(j, "camera", "focal", c.focal);
  read_key(j, "camera", "cx", c.cx);
  read_key(j, "camera", "cy", c.cy);
}

void parse_track(const json& j, TrackSpec& t) {
  check_keys(j, "track", {"segments", "blend_length", "lane_width"});
  read_key(j, "track", "blend_length", t.blend_length);
  read_key(j, "track", "lane_width", t.lane_width);
  if (j.contains("segments")) {
    const auto& seg = j.at("segments");
    if (!seg.is_array() || seg.empty())
      throw ConfigError("track.segments", "must be a nonempty array");
    t.segments.clear();
    for (std::size_t i = 0; i < seg.size(); ++i) {
      const auto& e = seg[i];
      TrackSegment s;
      const std::string section = "track.segments[" + std::to_string(i) + "]";
      if (e.is_array() && e.size() == 2) {
        s.length = e[0].get<double>();
        s.curvature = e[1].get<double>();
      } else if (e.is_object()) {
        read_key(e, section, "length", s.length);
        read_key(e, section, "curvature", s.curvature);
      } else {
        throw ConfigError(section, "expected [length, curvature] or an object");
      }
      t.segments.push_back(s);
    }
  }
}

void parse_render(const json& j, RenderOptions& r) {
  check_keys(j, "render",
              {"line_width", "pixel_noise_sd", "dropout_rate", "seed", "occluders"});
  read_key(j, "render", "line_width", r.line_width);
  read_key(j, "render", "pixel_noise_sd", r.pixel_noise_sd);
  read_key(j, "render", "dropout_rate", r.dropout_rate);
  read_key(j, "render", "seed", r.seed);
  if (j.contains("occluders")) {
    const auto& occ = j.at("occluders");
    if (!occ.is_array()) throw ConfigError("render.occluders", "must be an array");
    r.occluders.clear();
    for (std::size_t i = 0; i < occ.size(); ++i) {
      const auto& e = occ[i];
      const std::string section = "render.occluders[" + std::to_string(i) + "]";
      OccluderRect rect;
      read_key(e, section, "frame_begin", rect.frame_begin);
      read_key(e, section, "frame_end", rect.frame_end);
      read_key(e, section, "x0", rect.x0);
      read_key(e, section, "y0", rect.y0);
      read_key(e, section, "x1", rect.x1);
      read_key(e, section, "y1", rect.y1);
      r.occluders.push_back(rect);
    }
  }
}

void parse_eval(const json& j, EvalOptions& e) {
  check_keys(j, "eval",
              {"n_frames", "speed_kmh", "frame_rate", "duration_s", "use_raw_kappa", "block"});
  read_key(j, "eval", "n_frames", e.n_frames);
  read_key(j, "eval", "speed_kmh", e.speed_kmh);
  read_key(j, "eval", "frame_rate", e.frame_rate);
  read_key(j, "eval", "duration_s", e.duration_s);
  read_key(j, "eval", "use_raw_kappa", e.use_raw_kappa);
  read_key(j, "eval", "block", e.block);
}

void parse_arch(const json& j, ArchOptions& a) {
  check_keys(j, "arch", {"input_w", "input_h"});
  read_key(j, "arch", "input_w", a.input_w);
  read_key(j, "arch", "input_h", a.input_h);
}

RunConfig from_json(const json& j) {
  RunConfig cfg = default_config();
  for (const auto& [key, value] : j.items()) {
    if (key == "pipeline")
      parse_pipeline(value, cfg.pipeline);
    else if (key == "cluster")
      parse_cluster(value, cfg.pipeline);
    else if (key == "camera")
      parse_camera(value, cfg.camera);
    else if (key == "track")
      parse_track(value, cfg.track);
    else if (key == "render")
      parse_render(value, cfg.render);
    else if (key == "eval")
      parse_eval(value, cfg.eval);
    else if (key == "arch")
      parse_arch(value, cfg.arch);
    else
      throw ConfigError(key, "unknown section");
  }
  validate(cfg);
  return cfg;
}

json to_json(const RunConfig& cfg) {
  json j;
  const char* formula =
      cfg.pipeline.curvature_formula == CurvatureFormula::standard ? "standard" : "paper_literal";
  j["pipeline"] = {{"threshold", cfg.pipeline.threshold},
                   {"alpha", cfg.pipeline.alpha},
                   {"beta", cfg.pipeline.beta},
                   {"u_s", cfg.pipeline.u_s},
                   {"u_f", cfg.pipeline.u_f},
                   {"forgetting", cfg.pipeline.forgetting},
                   {"ridge", cfg.pipeline.ridge},
                   {"kalman_q", cfg.pipeline.kalman_q},
                   {"kalman_r", cfg.pipeline.kalman_r},
                   {"n_min", cfg.pipeline.n_min},
                   {"anchored_path", cfg.pipeline.anchored_path},
                   {"mask_window", cfg.pipeline.mask_window},
                   {"kalman_window", cfg.pipeline.kalman_window},
                   {"render_overlay", cfg.pipeline.render_overlay},
                   {"curvature_formula", formula}};
  j["cluster"] = {{"eps", cfg.pipeline.eps},
                  {"min_pts", cfg.pipeline.min_pts},
                  {"min_cluster_size", cfg.pipeline.min_cluster_size}};
  j["camera"] = {{"height", cfg.camera.height},
                 {"pitch", cfg.camera.pitch},
                 {"focal", cfg.camera.focal},
                 {"cx", cfg.camera.cx},
                 {"cy", cfg.camera.cy}};
  json segments = json::array();
  for (const auto& s : cfg.track.segments) segments.push_back({s.length, s.curvature});
  j["track"] = {{"segments", segments},
                {"blend_length", cfg.track.blend_length},
                {"lane_width", cfg.track.lane_width}};
  json occluders = json::array();
  for (const auto& o : cfg.render.occluders)
    occluders.push_back({{"frame_begin", o.frame_begin},
                         {"frame_end", o.frame_end},
                         {"x0", o.x0},
                         {"y0", o.y0},
                         {"x1", o.x1},
                         {"y1", o.y1}});
  j["render"] = {{"line_width", cfg.render.line_width},
                 {"pixel_noise_sd", cfg.render.pixel_noise_sd},
                 {"dropout_rate", cfg.render.dropout_rate},
                 {"seed", cfg.render.seed},
                 {"occluders", occluders}};
  j["eval"] = {{"n_frames", cfg.eval.n_frames},
               {"speed_kmh", cfg.eval.speed_kmh},
               {"frame_rate", cfg.eval.frame_rate},
               {"duration_s", cfg.eval.duration_s},
               {"use_raw_kappa", cfg.eval.use_raw_kappa},
               {"block", cfg.eval.block}};
  j["arch"] = {{"input_w", cfg.arch.input_w}, {"input_h", cfg.arch.input_h}};
  return j;
}

}  // namespace

void validate(const RunConfig& cfg) {
  const auto& p = cfg.pipeline;
  auto require = [](bool ok, const char* key, const char* reason) {
    if (!ok) throw ConfigError(key, reason);
  };
  require(p.threshold > 0.0 && p.threshold < 1.0, "pipeline.threshold", "must be in (0,1)");
  require(p.eps > 0.0, "cluster.eps", "must be > 0");
  require(p.min_pts >= 1, "cluster.min_pts", "must be >= 1");
  require(p.min_cluster_size >= 1, "cluster.min_cluster_size", "must be >= 1");
  require(p.beta > 0.0, "pipeline.beta", "must be > 0");
  require(p.u_f > p.u_s, "pipeline.u_f", "must be > u_s");
  require(p.u_s > 0.0, "pipeline.u_s", "must be > 0");
  require(p.forgetting > 0.0 && p.forgetting <= 1.0, "pipeline.forgetting", "must be in (0,1]");
  require(p.ridge >= 0.0, "pipeline.ridge", "must be >= 0");
  require(p.kalman_q >= 0.0, "pipeline.kalman_q", "must be >= 0");
  require(p.kalman_r > 0.0, "pipeline.kalman_r", "must be > 0");
  require(p.n_min >= 1, "pipeline.n_min", "must be >= 1");
  require(p.mask_window >= 1, "pipeline.mask_window", "must be >= 1");
  require(p.kalman_window >= 1, "pipeline.kalman_window", "must be >= 1");

  require(cfg.camera.height > 0.0, "camera.height", "must be > 0");
  require(cfg.camera.pitch > 0.0 && cfg.camera.pitch < 1.5707, "camera.pitch",
          "must be in (0, pi/2)");
  require(cfg.camera.focal > 0.0, "camera.focal", "must be > 0");

  require(!cfg.track.segments.empty(), "track.segments", "must be nonempty");
  for (std::size_t i = 0; i < cfg.track.segments.size(); ++i) {
    const auto& s = cfg.track.segments[i];
    const std::string key = "track.segments[" + std::to_string(i) + "]";
    if (!(s.length > 0.0)) throw ConfigError(key + ".length", "must be > 0");
    if (std::abs(s.curvature) > kMaxTrackCurvature)
      throw ConfigError(key + ".curvature", "|curvature| must be <= 0.07");
  }
  require(cfg.track.blend_length >= 0.0, "track.blend_length", "must be >= 0");
  require(cfg.track.lane_width > 0.0, "track.lane_width", "must be > 0");

  require(cfg.render.line_width > 0.0, "render.line_width", "must be > 0");
  require(cfg.render.pixel_noise_sd >= 0.0, "render.pixel_noise_sd", "must be >= 0");
  require(cfg.render.dropout_rate >= 0.0 && cfg.render.dropout_rate <= 1.0,
          "render.dropout_rate", "must be in [0,1]");

  require(cfg.eval.speed_kmh > 0.0, "eval.speed_kmh", "must be > 0");
  require(cfg.eval.speed_kmh <= kMaxSpeedKmh, "eval.speed_kmh", "must be <= 70");
  require(cfg.eval.frame_rate > 0.0, "eval.frame_rate", "must be > 0");
  require(cfg.eval.duration_s > 0.0, "eval.duration_s", "must be > 0");
  require(cfg.eval.n_frames >= 0, "eval.n_frames", "must be >= 0");
  require(cfg.eval.block >= 1, "eval.block", "must be >= 1");

  require(cfg.arch.input_w > 0 && cfg.arch.input_w % 16 == 0, "arch.input_w",
          "must be a positive multiple of 16");
  require(cfg.arch.input_h > 0 && cfg.arch.input_h % 16 == 0, "arch.input_h",
          "must be a positive multiple of 16");
}

RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = text.empty() ? json::object() : json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("parse error: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("", "config root must be an object");
  return from_json(j);
}

RunConfig parse_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("", "cannot open config file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

std::string effective_config_text(const RunConfig& cfg) {
  return to_json(cfg).dump(2) + "\n";
}

RunConfig apply_overrides(const RunConfig& cfg,
                          const std::vector<std::pair<std::string, std::string>>& overrides) {
  json j = to_json(cfg);
  for (const auto& [key, value] : overrides) {
    json::json_pointer ptr;
    std::stringstream ss(key);
    std::string part;
    while (std::getline(ss, part, '.')) ptr /= part;
    json parsed;
    try {
      parsed = json::parse(value);  // numbers, booleans, arrays
    } catch (const json::parse_error&) {
      parsed = value;  // plain string
    }
    j[ptr] = parsed;
  }
  return from_json(j);
}

}  // namespace lanepath
