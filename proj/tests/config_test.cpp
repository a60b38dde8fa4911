#include <doctest.h>

#include <stdexcept>

#include <filesystem>
#include <fstream>

#include "lanepath/config.hpp"

using namespace lanepath;

TEST_SUITE_BEGIN("config");

TEST_CASE("empty config yields valid defaults") {
  const RunConfig cfg = parse_config_text("");
  CHECK_NOTHROW(validate(cfg));
  CHECK_FALSE(cfg.track.segments.empty());
}

TEST_CASE("defaults table matches the pinned constants") {
  const RunConfig cfg = parse_config_text("{}");
  CHECK(cfg.pipeline.alpha == 0.6);
  CHECK(cfg.pipeline.kalman_q == 0.0001);
  CHECK(cfg.pipeline.kalman_r == 0.01);
  CHECK(cfg.pipeline.mask_window == 5);
  CHECK(cfg.pipeline.kalman_window == 15);
  CHECK(cfg.eval.block == 11);
  CHECK(cfg.pipeline.threshold == 0.5);
  CHECK(cfg.pipeline.eps == 8.0);
  CHECK(cfg.pipeline.min_pts == 5);
  CHECK(cfg.pipeline.forgetting == 0.9);
  CHECK(cfg.pipeline.u_s == 5.0);
  CHECK(cfg.pipeline.u_f == 30.0);
  CHECK(cfg.pipeline.beta == 1.0);
  CHECK(cfg.pipeline.n_min == 10);
  CHECK(cfg.camera.height == 1.2);
  CHECK(cfg.camera.pitch == 0.04);
  CHECK(cfg.camera.focal == 500.0);
  CHECK(cfg.eval.speed_kmh == 50.0);
  CHECK(cfg.eval.frame_rate == 20.0);
}

TEST_CASE("alpha is a gain, eps must be positive") {
  CHECK_NOTHROW(parse_config_text(R"({"pipeline": {"alpha": 1.5}})"));
  try {
    parse_config_text(R"({"cluster": {"eps": -1.0}})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.key == "cluster.eps");
  }
}

TEST_CASE("validation errors carry dotted key paths") {
  auto key_of = [](const std::string& text) {
    try {
      parse_config_text(text);
    } catch (const ConfigError& e) {
      return e.key;
    }
    return std::string("no-error");
  };
  CHECK(key_of(R"({"pipeline": {"threshold": 1.5}})") == "pipeline.threshold");
  CHECK(key_of(R"({"pipeline": {"u_f": 2.0}})") == "pipeline.u_f");
  CHECK(key_of(R"({"eval": {"speed_kmh": 0.0}})") == "eval.speed_kmh");
  CHECK(key_of(R"({"eval": {"speed_kmh": 90.0}})") == "eval.speed_kmh");
  CHECK(key_of(R"({"track": {"segments": [[100.0, 0.5]]}})") == "track.segments[0].curvature");
  CHECK(key_of(R"({"render": {"dropout_rate": 2.0}})") == "render.dropout_rate");
  CHECK(key_of(R"({"arch": {"input_w": 100}})") == "arch.input_w");
  CHECK(key_of(R"({"pipeline": {"no_such_key": 1}})") == "pipeline.no_such_key");
  CHECK(key_of(R"({"bogus_section": {}})") == "bogus_section");
  CHECK(key_of("{nonsense") == "");
}

TEST_CASE("effective config round trips") {
  RunConfig cfg = parse_config_text("");
  cfg.pipeline.alpha = 0.7;
  cfg.render.occluders.push_back({10, 20, 0, 320, 640, 360});
  cfg.track.segments = {{500.0, 0.0}, {300.0, 0.004}};
  const std::string text = effective_config_text(cfg);
  const RunConfig back = parse_config_text(text);
  CHECK(effective_config_text(back) == text);
  CHECK(back.pipeline.alpha == 0.7);
  CHECK(back.render.occluders.size() == 1);
  CHECK(back.track.segments.size() == 2);
}

TEST_CASE("config file parsing") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "lanepath_config_test";
  fs::create_directories(dir);
  const std::string path = (dir / "config.json").string();
  std::ofstream(path) << R"({"pipeline": {"alpha": 0.8}, "eval": {"speed_kmh": 40}})";
  const RunConfig cfg = parse_config(path);
  CHECK(cfg.pipeline.alpha == 0.8);
  CHECK(cfg.eval.speed_kmh == 40.0);
  CHECK_THROWS_AS(parse_config((dir / "missing.json").string()), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("dotted-key overrides") {
  const RunConfig base = parse_config_text("");
  const RunConfig cfg = apply_overrides(
      base, {{"pipeline.alpha", "0.75"}, {"cluster.eps", "9.5"}, {"render.seed", "42"}});
  CHECK(cfg.pipeline.alpha == 0.75);
  CHECK(cfg.pipeline.eps == 9.5);
  CHECK(cfg.render.seed == 42);
  CHECK_THROWS_AS(apply_overrides(base, {{"cluster.eps", "-2"}}), ConfigError);
  CHECK_THROWS_AS(apply_overrides(base, {{"pipeline.typo", "1"}}), ConfigError);
}

TEST_SUITE_END();
