// Run configuration: JSON file parsing, validation, defaults, overrides.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "lanepath/pipeline.hpp"
#include "lanepath/simworld.hpp"
#include "lanepath/viewgeom.hpp"

namespace lanepath {

struct EvalOptions {
  long n_frames = 0;        // 0 = until track end
  double speed_kmh = 50.0;
  double frame_rate = 20.0;
  double duration_s = 1e9;
  bool use_raw_kappa = false;
  int block = 11;           // block-average size for exported series
};

struct ArchOptions {
  int input_w = 400;  // documented resolution reproducing the MAC budgets
  int input_h = 208;
};

struct RunConfig {
  PipelineConfig pipeline;
  CameraModel camera;
  TrackSpec track;          // defaults to the benchmark track
  RenderOptions render;
  EvalOptions eval;
  ArchOptions arch;
};

struct ConfigError : std::runtime_error {
  std::string key;
  ConfigError(const std::string& k, const std::string& reason)
      : std::runtime_error(k.empty() ? reason : k + ": " + reason), key(k) {}
};

// Unspecified keys take the documented defaults (alpha = 0.6, q = 0.0001,
// r = 0.01, windows 5/15/11, threshold 0.5, eps = 8, min_pts = 5,
// gamma = 0.9, u_s = 5, u_f = 30). Throws ConfigError with the dotted key
// path on parse or validation failure.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text);

// Effective configuration as JSON text; parse_config_text of it yields an
// identical RunConfig.
std::string effective_config_text(const RunConfig& cfg);

// "--dotted.key value" pairs applied on top of a parsed config.
RunConfig apply_overrides(const RunConfig& cfg,
                          const std::vector<std::pair<std::string, std::string>>& overrides);

void validate(const RunConfig& cfg);  // throws ConfigError

}  // namespace lanepath
