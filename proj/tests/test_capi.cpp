#include "dircast/dircast.h"

#include <doctest.h>

#include <nlohmann/json.hpp>
#include <string>

TEST_CASE("C API: run a config") {
  dc_config* cfg = nullptr;
  REQUIRE(dc_config_parse(R"({"schema_version": 1,
                              "scenario": {"protocol": "Dircast", "n": 5, "relay_count": 10},
                              "seeds": "1..3"})",
                          &cfg) == DC_OK);
  size_t count = 0;
  CHECK(dc_config_execution_count(cfg, &count) == DC_OK);
  CHECK(count == 3);
  CHECK(dc_config_set_seed(cfg, 4) == DC_OK);
  CHECK(dc_config_execution_count(cfg, &count) == DC_OK);
  CHECK(count == 1);
  CHECK(dc_config_set_checks(cfg, "agreement, validity") == DC_OK);

  dc_result* res = nullptr;
  REQUIRE(dc_run(cfg, nullptr, nullptr, &res) == DC_OK);
  CHECK(dc_result_exit_code(res) == DC_EXIT_OK);
  auto report = nlohmann::json::parse(dc_result_json(res));
  CHECK(report.contains("runs"));
  CHECK(std::string(dc_result_summary(res)).find("agreement") != std::string::npos);
  dc_result_free(res);
  dc_config_free(cfg);
}

TEST_CASE("C API: errors are reported through status codes") {
  dc_config* cfg = nullptr;
  CHECK(dc_config_parse("{", &cfg) == DC_ERR_CONFIG);  // malformed JSON is a config error
  CHECK(std::string(dc_last_error()).size() > 0);
  CHECK(dc_config_parse(R"({"schema_version": 1, "bogus": 1})", &cfg) == DC_ERR_CONFIG);
  CHECK(std::string(dc_last_error()).find("bogus") != std::string::npos);
  CHECK(dc_config_load("/nonexistent/config.json", &cfg) == DC_ERR_IO);
  CHECK(dc_config_parse(nullptr, &cfg) == DC_ERR_INVALID_ARGUMENT);
  CHECK(cfg == nullptr);

  REQUIRE(dc_config_parse(R"({"schema_version": 1})", &cfg) == DC_OK);
  CHECK(dc_config_set_checks(cfg, "agreement,telepathy") == DC_ERR_CONFIG);
  CHECK(dc_config_set_seed_range(cfg, "9..1") == DC_ERR_CONFIG);
  CHECK(dc_config_set_seeds(cfg, 9, 1) == DC_ERR_CONFIG);
  dc_result* res = nullptr;
  CHECK(dc_sweep(cfg, nullptr, nullptr, &res) == DC_ERR_CONFIG);  // no sweep section
  CHECK(dc_acceptance("no-such-criterion", 1, nullptr, nullptr, &res) == DC_ERR_CONFIG);
  dc_config_free(cfg);
}

TEST_CASE("C API: version") { CHECK(std::string(dc_version()) == "0.1.0"); }
