#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "infpos/config.hpp"
#include "infpos/error.hpp"

using namespace infpos;
using nlohmann::json;

namespace {

std::string error_message(const json& j) {
  try {
    parse_config_json(j);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::config);
    return e.what();
  }
  FAIL("expected a configuration error");
  return {};
}

}  // namespace

TEST_CASE("empty object yields all defaults") {
  const RunConfig c = parse_config_json(json::object());
  CHECK(c.dataset.record_count == 80000);
  CHECK(c.dataset.split.test_fraction == 0.02);
  CHECK(c.train.batch_size == 64);
  CHECK(c.train.epochs == 300);
  CHECK(c.train.schedule.initial == 2e-3);
  CHECK(c.train.schedule.floor == 9e-6);
  CHECK(c.model.width_multiplier == 1.0);
  CHECK(c.scenario.carrier_freq_ghz == 3.5);
  CHECK(c.channel.tap_count == 256);
}

TEST_CASE("overrides are applied and the rest stays at defaults") {
  const json j{{"train", {{"batch_size", 128}, {"epochs", 20}}},
               {"dataset", {{"record_count", 1234}, {"split", {{"seed", 99}}}}},
               {"model", {{"width_multiplier", 0.5}}}};
  const RunConfig c = parse_config_json(j);
  CHECK(c.train.batch_size == 128);
  CHECK(c.train.epochs == 20);
  CHECK(c.train.schedule.initial == 2e-3);
  CHECK(c.dataset.record_count == 1234);
  CHECK(c.dataset.split.seed == 99);
  CHECK(c.dataset.split.test_fraction == 0.02);
  CHECK(c.model.width_multiplier == 0.5);
}

TEST_CASE("unknown keys are fatal and named by path") {
  CHECK(error_message({{"trian", json::object()}}).find("trian") != std::string::npos);
  const std::string nested =
      error_message({{"train", {{"batchsize", 32}}}});
  CHECK(nested.find("train.batchsize") != std::string::npos);
  const std::string deep =
      error_message({{"dataset", {{"split", {{"sed", 1}}}}}});
  CHECK(deep.find("dataset.split.sed") != std::string::npos);
}

TEST_CASE("constraint violations name the offending field") {
  CHECK(error_message({{"train", {{"batch_size", 0}}}}).find("batch_size") !=
        std::string::npos);
  CHECK(error_message({{"model", {{"width_multiplier", -1.0}}}})
            .find("width_multiplier") != std::string::npos);
  CHECK(error_message({{"scenario", {{"clutter_density", 2.0}}}})
            .find("clutter_density") != std::string::npos);
  CHECK(error_message({{"train", {{"schedule", {{"decay", 1.5}}}}}})
            .find("decay") != std::string::npos);
  CHECK(error_message({{"train", {{"batch_size", "lots"}}}}).find("batch_size") !=
        std::string::npos);
  CHECK_THROWS_AS(parse_config_json(json::array()), Error);
}

TEST_CASE("config_to_json echoes every effective value and re-parses") {
  const json j{{"train", {{"batch_size", 16}, {"epochs", 5}}},
               {"channel", {{"rician_k_db", 5.0}}}};
  const RunConfig c = parse_config_json(j);
  const json echo = config_to_json(c);
  CHECK(echo["train"]["batch_size"] == 16);
  CHECK(echo["train"]["schedule"]["initial"] == 2e-3);
  CHECK(echo["channel"]["rician_k_db"] == 5.0);
  CHECK(echo["scenario"]["tx_power_dbm"] == c.scenario.tx_power_dbm);

  // the echo is itself a valid strict config
  const RunConfig back = parse_config_json(echo);
  CHECK(back.train.batch_size == 16);
  CHECK(back.train.epochs == 5);
  CHECK(back.channel.rician_k_db == 5.0);
}

TEST_CASE("parse_config reads files and reports I/O and syntax errors") {
  const std::string path =
      (std::filesystem::temp_directory_path() / "infpos_test_config.json").string();
  {
    std::ofstream os(path);
    os << R"({"train": {"batch_size": 8, "epochs": 2}})";
  }
  const RunConfig c = parse_config(path);
  CHECK(c.train.batch_size == 8);

  {
    std::ofstream os(path);
    os << "{not json";
  }
  try {
    parse_config(path);
    FAIL("expected syntax error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::config);
  }
  std::remove(path.c_str());
  try {
    parse_config(path);
    FAIL("expected io error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::io);
  }
}
