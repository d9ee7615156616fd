#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "dipolar/config.hpp"
#include "support.hpp"

using namespace dipolar;

namespace {

const char* kMinimal = R"({
  "schema_version": 1,
  "materials": {"glass": {"index": 1.5}, "au": {"builtin": "gold"}},
  "stack": {
    "layers": [
      {"material": "glass", "thickness_nm": "semi-infinite"},
      {"index": 1.5, "thickness_nm": 300},
      {"material": "au", "thickness_nm": "semi-infinite"}
    ],
    "emitter_layer": 1,
    "emitter_height_nm": 150
  },
  "source": {"wavelength_nm": 637, "orientation": "hed"},
  "task": "budget"
})";

std::string field_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& ex) {
    return ex.field();
  }
  return "<accepted>";
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto at = text.find(from);
  REQUIRE(at != std::string::npos);
  return text.replace(at, from.size(), to);
}

}  // namespace

TEST_CASE("minimal config") {
  const auto c = parse_config(kMinimal);
  CHECK(c.task == Task::budget);
  CHECK(c.orientation == Orientation::horizontal);
  CHECK(c.layers.size() == 3);
  CHECK(c.layers[1].index == complex(1.5, 0.0));
  CHECK(std::isinf(c.layers[0].thickness_nm));
  const auto stack = build_stack(c);
  CHECK(stack.layer(2).material == bundled_gold());
  CHECK(stack.emitter_height() == 150.0);
  CHECK(parse_config(to_json(c)) == c);
}

TEST_CASE("every preset round-trips") {
  for (const auto& name : preset_names()) {
    CAPTURE(name);
    const auto c = preset(name);
    const auto text = to_json(c);
    const auto back = parse_config(text);
    CHECK(back == c);
    CHECK(to_json(back) == text);
    CHECK_NOTHROW(build_stack(c));
    for (const auto& s : c.parameters.series) CHECK_NOTHROW(build_template(c, &s));
  }
}

TEST_CASE("preset contents") {
  const auto fig1a = preset("fig1a");
  CHECK(build_stack(fig1a) == testing::fig1_stack());
  CHECK(fig1a.wavelength_nm == 637.0);
  CHECK(fig1a.task == Task::pattern);

  const auto fig3a = preset("fig3a");
  CHECK(fig3a.wavelength_nm == 900.0);
  const auto membrane = build_stack(fig3a);
  CHECK(membrane.layer(0).material.index(900.0) == complex(3.5, 0.0));
  CHECK(membrane.layer(membrane.emitter_layer()).material.index(900.0) == complex(3.5, 0.0));
  CHECK(membrane.layer(1).thickness_nm == 400.0);
  CHECK(membrane.layer(3).thickness_nm == 400.0);

  const auto fig3b = preset("fig3b");
  CHECK(fig3b.wavelength_nm == 650.0);
  CHECK(fig3b.parameters.channels == std::vector<double>{200.0, 500.0, 1000.0});

  const auto fig1b = preset("fig1b");
  CHECK(fig1b.parameters.values.front() == 450.0);
  CHECK(fig1b.parameters.values.back() == 900.0);
  CHECK(preset("fig2").parameters.values.size() == 21);
}

TEST_CASE("unknown preset lists the valid names") {
  try {
    preset("fig4");
    FAIL("accepted");
  } catch (const ConfigError& ex) {
    const std::string what = ex.what();
    for (const auto& name : preset_names()) CHECK(what.find(name) != std::string::npos);
  }
}

TEST_CASE("errors name the offending field") {
  const std::string base = kMinimal;
  CHECK(field_of(base) == "<accepted>");
  CHECK(field_of(replace(base, "\"emitter_layer\": 1", "\"emitter_layer\": 3")) == "/stack/emitter_layer");
  CHECK(field_of(replace(base, "\"schema_version\": 1", "\"schema_version\": 2")) == "/schema_version");
  CHECK(field_of(replace(base, "\"task\": \"budget\"", "\"task\": \"plot\"")) == "/task");
  CHECK(field_of(replace(base, "\"orientation\": \"hed\"", "\"orientation\": \"up\"")) == "/source/orientation");
  CHECK(field_of(replace(base, "\"wavelength_nm\": 637", "\"wavelength_nm\": -1")) == "/source/wavelength_nm");
  CHECK(field_of(replace(base, "\"material\": \"glass\"", "\"material\": \"quartz\"")) == "/stack/layers/0/material");
  CHECK(field_of(replace(base, "\"thickness_nm\": 300", "\"thickness_nm\": \"thick\"")) ==
        "/stack/layers/1/thickness_nm");
  CHECK(field_of(replace(base, "\"index\": 1.5,", "\"index\": [1.5, -0.1],")) == "/stack/layers/1/index/1");
  CHECK(field_of(replace(base, "\"builtin\": \"gold\"", "\"builtin\": \"silver\"")) == "/materials/au/builtin");
  CHECK(field_of(replace(base, "\"task\": \"budget\"", "\"task\": \"budget\", \"colour\": 1")) == "/colour");
  CHECK(field_of(replace(base, "\"task\": \"budget\"", "\"parameters\": {\"metric\": \"speed\"}")) == "/task");
  CHECK(field_of(replace(base, "\"task\": \"budget\"", "\"task\": \"sweep\", \"parameters\": {\"metric\": \"speed\"}")) ==
        "/parameters/metric");
  CHECK(field_of(replace(base, "\"task\": \"budget\"",
                         "\"task\": \"sweep\", \"parameters\": {\"series\": [{\"label\": \"a\", "
                         "\"materials\": {\"steel\": {\"index\": 2}}}]}")) == "/parameters/series");
  CHECK(field_of("{not json") == "");
}

TEST_CASE("stack invariants surface as config errors") {
  const std::string base = kMinimal;
  // Above the 300 nm emitter layer.
  const auto c = parse_config(replace(base, "\"emitter_height_nm\": 150", "\"emitter_height_nm\": 400"));
  CHECK_THROWS_AS(build_stack(c), ConfigError);
}

TEST_CASE("table materials resolve relative to the config") {
  const auto dir = std::filesystem::temp_directory_path() / "dipolar_config_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "metal.csv") << "wavelength_nm,n,k\n600,0.2,3.0\n700,0.15,4.0\n";
    std::ofstream(dir / "broken.csv") << "600,0.2,3.0\n500,0.15,4.0\n";
  }
  const std::string base = kMinimal;
  const auto text = replace(base, "{\"builtin\": \"gold\"}", "{\"table\": \"metal.csv\"}");
  {
    std::ofstream(dir / "run.json") << text;
  }
  const auto c = load_config(dir / "run.json");
  CHECK(build_stack(c).layer(2).material.index(650.0).real() == doctest::Approx(0.175));

  const auto missing = parse_config(replace(base, "{\"builtin\": \"gold\"}", "{\"table\": \"none.csv\"}"), dir);
  CHECK_THROWS_AS(build_stack(missing), ConfigError);
  const auto broken = parse_config(replace(base, "{\"builtin\": \"gold\"}", "{\"table\": \"broken.csv\"}"), dir);
  try {
    build_stack(broken);
    FAIL("accepted");
  } catch (const ConfigError& ex) {
    CHECK(ex.field() == "/materials/au");
    CHECK(std::string(ex.what()).find("line 2") != std::string::npos);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("task names") {
  for (auto t : {Task::pattern, Task::spectrum, Task::efficiency, Task::budget, Task::sweep, Task::required_angle,
                 Task::ratio_threshold, Task::channel_scan}) {
    CHECK(parse_task(to_string(t)) == t);
  }
  CHECK_FALSE(parse_task("preset").has_value());
}
