#include "dipolar/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "dipolar/errors.hpp"

namespace dipolar {

namespace {

using json = nlohmann::ordered_json;

struct TaskName {
  Task value;
  std::string_view name;
};
constexpr std::array<TaskName, 8> kTaskNames = {{
    {Task::pattern, "pattern"},
    {Task::spectrum, "spectrum"},
    {Task::efficiency, "efficiency"},
    {Task::budget, "budget"},
    {Task::sweep, "sweep"},
    {Task::required_angle, "required-angle"},
    {Task::ratio_threshold, "ratio-threshold"},
    {Task::channel_scan, "channel-scan"},
}};

// Walks a JSON document, remembering where it is so errors can name the field.
class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(path_, what); }

  void require_object(std::initializer_list<std::string_view> allowed) const {
    if (!node_.is_object()) fail("expected an object");
    for (const auto& [key, value] : node_.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        child_path(key);
        throw ConfigError(child_path(key), "unknown field");
      }
    }
  }
  bool has(std::string_view key) const { return node_.is_object() && node_.contains(key); }
  Reader at(std::string_view key) const {
    if (!has(key)) throw ConfigError(child_path(key), "missing required field");
    return {node_.at(std::string(key)), child_path(key)};
  }
  Reader at(std::size_t i) const { return {node_.at(i), path_ + "/" + std::to_string(i)}; }
  std::size_t size() const { return node_.size(); }
  const json& raw() const { return node_; }

  double number() const {
    if (!node_.is_number()) fail("expected a number");
    const double v = node_.get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }
  double positive() const {
    const double v = number();
    if (!(v > 0.0)) fail("must be > 0");
    return v;
  }
  std::size_t index() const {
    if (!node_.is_number_integer() || node_.get<long long>() < 0) fail("expected a non-negative integer");
    return static_cast<std::size_t>(node_.get<long long>());
  }
  int integer() const {
    if (!node_.is_number_integer()) fail("expected an integer");
    return node_.get<int>();
  }
  bool boolean() const {
    if (!node_.is_boolean()) fail("expected true or false");
    return node_.get<bool>();
  }
  std::string string() const {
    if (!node_.is_string()) fail("expected a string");
    return node_.get<std::string>();
  }
  std::vector<double> numbers() const {
    if (!node_.is_array()) fail("expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < node_.size(); ++i) out.push_back(at(i).number());
    return out;
  }
  std::vector<std::size_t> indices() const {
    if (!node_.is_array()) fail("expected an array of layer indices");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < node_.size(); ++i) out.push_back(at(i).index());
    return out;
  }

 private:
  std::string child_path(std::string_view key) const { return path_ + "/" + std::string(key); }
  const json& node_;
  std::string path_;
};

// Either a number or [re, im].
complex read_index(const Reader& r) {
  if (r.raw().is_number()) return {r.number(), 0.0};
  if (r.raw().is_array() && r.size() == 2) {
    const complex n{r.at(0).number(), r.at(1).number()};
    if (n.imag() < 0.0) r.at(1).fail("extinction coefficient must be >= 0 (passive media only)");
    return n;
  }
  r.fail("expected a number or [n, k]");
}

json write_index(complex n) {
  if (n.imag() == 0.0) return n.real();
  return json::array({n.real(), n.imag()});
}

MaterialSpec read_material(const Reader& r) {
  r.require_object({"builtin", "table", "index"});
  const int kinds = static_cast<int>(r.has("builtin")) + static_cast<int>(r.has("table")) +
                    static_cast<int>(r.has("index"));
  if (kinds != 1) r.fail("exactly one of builtin, table, index is required");
  MaterialSpec m;
  if (r.has("builtin")) {
    m.kind = MaterialSpec::Kind::builtin;
    m.name = r.at("builtin").string();
    if (m.name != "gold") r.at("builtin").fail("unknown builtin material '" + m.name + "' (known: gold)");
  } else if (r.has("table")) {
    m.kind = MaterialSpec::Kind::table;
    m.name = r.at("table").string();
  } else {
    m.kind = MaterialSpec::Kind::index;
    m.index = read_index(r.at("index"));
  }
  return m;
}

json write_material(const MaterialSpec& m) {
  switch (m.kind) {
    case MaterialSpec::Kind::builtin: return json{{"builtin", m.name}};
    case MaterialSpec::Kind::table: return json{{"table", m.name}};
    case MaterialSpec::Kind::index: return json{{"index", write_index(m.index)}};
  }
  return {};
}

std::map<std::string, MaterialSpec> read_materials(const Reader& r) {
  if (!r.raw().is_object()) r.fail("expected an object of named materials");
  std::map<std::string, MaterialSpec> out;
  for (const auto& [key, value] : r.raw().items()) out[key] = read_material(r.at(key));
  return out;
}

json write_materials(const std::map<std::string, MaterialSpec>& materials) {
  json out = json::object();
  for (const auto& [k, v] : materials) out[k] = write_material(v);
  return out;
}

Orientation read_orientation(const Reader& r) {
  const auto s = r.string();
  if (s == "ved") return Orientation::vertical;
  if (s == "hed") return Orientation::horizontal;
  if (s == "iso") return Orientation::isotropic;
  r.fail("expected one of ved, hed, iso");
}

TaskParameters read_parameters(const Reader& r) {
  r.require_object({"theta_c_deg", "target", "theta_step_deg", "efficiency_step_deg", "s_max", "s_points",
                    "parameter", "metric", "values", "positions", "channels", "spacer_layer",
                    "low_index_layers", "keep_relative_height", "series", "rel_tol", "max_intervals"});
  TaskParameters p;
  if (r.has("theta_c_deg")) {
    p.theta_c_deg = r.at("theta_c_deg").number();
    if (p.theta_c_deg < 0.0 || p.theta_c_deg > 90.0) r.at("theta_c_deg").fail("must be in [0, 90]");
  }
  if (r.has("target")) {
    p.target = r.at("target").number();
    if (!(p.target > 0.0 && p.target < 1.0)) r.at("target").fail("must be in (0, 1)");
  }
  if (r.has("theta_step_deg")) p.theta_step_deg = r.at("theta_step_deg").positive();
  if (r.has("efficiency_step_deg")) p.efficiency_step_deg = r.at("efficiency_step_deg").positive();
  if (r.has("s_max")) p.s_max = r.at("s_max").positive();
  if (r.has("s_points")) {
    p.s_points = r.at("s_points").integer();
    if (p.s_points < 2) r.at("s_points").fail("must be >= 2");
  }
  if (r.has("parameter")) {
    const auto name = r.at("parameter").string();
    const auto v = parse_sweep_parameter(name);
    if (!v) {
      r.at("parameter").fail("unknown sweep parameter '" + name +
                             "' (known: wavelength, spacer_thickness, emitter_height, "
                             "emitter_layer_thickness, index_ratio, channel_position)");
    }
    p.parameter = *v;
  }
  if (r.has("metric")) {
    const auto name = r.at("metric").string();
    const auto v = parse_metric(name);
    if (!v) {
      r.at("metric").fail("unknown metric '" + name +
                          "' (known: efficiency, required_angle, total, down_allowed, "
                          "down_forbidden, up, loss, spp_estimate)");
    }
    p.metric = *v;
  }
  if (r.has("values")) p.values = r.at("values").numbers();
  if (r.has("positions")) p.positions = r.at("positions").numbers();
  if (r.has("channels")) p.channels = r.at("channels").numbers();
  if (r.has("spacer_layer")) p.spacer_layer = r.at("spacer_layer").index();
  if (r.has("low_index_layers")) p.low_index_layers = r.at("low_index_layers").indices();
  if (r.has("keep_relative_height")) p.keep_relative_height = r.at("keep_relative_height").boolean();
  if (r.has("rel_tol")) {
    p.rel_tol = r.at("rel_tol").positive();
    if (p.rel_tol >= 1e-2) r.at("rel_tol").fail("must be < 1e-2");
  }
  if (r.has("max_intervals")) {
    p.max_intervals = r.at("max_intervals").index();
    if (p.max_intervals < 1) r.at("max_intervals").fail("must be >= 1");
  }
  if (r.has("series")) {
    const auto s = r.at("series");
    if (!s.raw().is_array()) s.fail("expected an array");
    std::set<std::string> labels;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto item = s.at(i);
      item.require_object({"label", "materials"});
      SeriesSpec spec;
      spec.label = item.at("label").string();
      if (spec.label.empty() || spec.label.find_first_of("/\\") != std::string::npos) {
        item.at("label").fail("must be a non-empty file-name fragment");
      }
      if (!labels.insert(spec.label).second) item.at("label").fail("duplicate series label");
      spec.materials = read_materials(item.at("materials"));
      p.series.push_back(std::move(spec));
    }
  }
  return p;
}

json write_parameters(const TaskParameters& p) {
  json out;
  out["theta_c_deg"] = p.theta_c_deg;
  out["target"] = p.target;
  out["theta_step_deg"] = p.theta_step_deg;
  out["efficiency_step_deg"] = p.efficiency_step_deg;
  out["s_max"] = p.s_max;
  out["s_points"] = p.s_points;
  out["parameter"] = std::string(to_string(p.parameter));
  out["metric"] = std::string(to_string(p.metric));
  out["values"] = p.values;
  out["positions"] = p.positions;
  out["channels"] = p.channels;
  if (p.spacer_layer) out["spacer_layer"] = *p.spacer_layer;
  out["low_index_layers"] = p.low_index_layers;
  out["keep_relative_height"] = p.keep_relative_height;
  json series = json::array();
  for (const auto& s : p.series) series.push_back(json{{"label", s.label}, {"materials", write_materials(s.materials)}});
  out["series"] = series;
  out["rel_tol"] = p.rel_tol;
  out["max_intervals"] = p.max_intervals;
  return out;
}

// Lattice values start + i * step, rounded to 1e-9 so they print cleanly.
std::vector<double> range(double start, double stop, double step) {
  std::vector<double> out;
  const auto n = static_cast<int>(std::floor((stop - start) / step + 1e-9));
  for (int i = 0; i <= n; ++i) out.push_back(std::round((start + i * step) * 1e9) / 1e9);
  return out;
}

MaterialSpec idx(double n) { return {MaterialSpec::Kind::index, {}, {n, 0.0}}; }
MaterialSpec gold() {
  MaterialSpec m;
  m.kind = MaterialSpec::Kind::builtin;
  m.name = "gold";
  return m;
}
LayerSpec layer(std::string material, double thickness = kSemiInfinite) {
  return {std::move(material), std::nullopt, thickness};
}

RunConfig fig1_base() {
  RunConfig c;
  c.materials = {{"substrate", idx(2.2)}, {"film", idx(1.5)}, {"spacer", idx(1.0)}, {"gold", gold()}};
  c.layers = {layer("substrate"), layer("film", 350.0), layer("spacer", 200.0), layer("gold")};
  c.emitter_layer = 1;
  c.emitter_height_nm = 200.0;
  c.wavelength_nm = 637.0;
  c.orientation = Orientation::isotropic;
  c.parameters.spacer_layer = 2;
  c.parameters.low_index_layers = {2};
  return c;
}

RunConfig make_preset(std::string_view name) {
  if (name == "fig1a") {
    RunConfig c = fig1_base();
    c.task = Task::pattern;
    c.parameters.theta_c_deg = 55.0;
    c.parameters.theta_step_deg = 0.5;
    c.parameters.efficiency_step_deg = 1.0;
    c.output_prefix = "fig1a";
    return c;
  }
  if (name == "fig1b") {
    RunConfig c = fig1_base();
    c.task = Task::sweep;
    c.parameters.parameter = SweepParameter::wavelength;
    c.parameters.values = range(450.0, 900.0, 10.0);
    c.parameters.theta_c_deg = 55.0;
    c.output_prefix = "fig1b";
    return c;
  }
  if (name == "fig1b-inset") {
    RunConfig c = fig1_base();
    c.task = Task::sweep;
    c.parameters.parameter = SweepParameter::spacer_thickness;
    c.parameters.values = range(10.0, 400.0, 10.0);
    c.parameters.theta_c_deg = 55.0;
    c.parameters.series = {{"n3_1.0", {{"spacer", idx(1.0)}}}, {"n3_1.5", {{"spacer", idx(1.5)}}}};
    c.output_prefix = "fig1b-inset";
    return c;
  }
  if (name == "fig2" || name == "fig2-inset") {
    RunConfig c = fig1_base();
    c.materials["substrate"] = idx(1.8);  // n1/n2 = 1.2
    c.parameters.theta_c_deg = 90.0;
    if (name == "fig2") {
      c.task = Task::sweep;
      c.parameters.parameter = SweepParameter::index_ratio;
      c.parameters.values = range(1.0, 2.0, 0.05);
      c.parameters.series = {{"n2_1.35", {{"substrate", idx(1.62)}, {"film", idx(1.35)}}},
                             {"n2_1.5", {{"substrate", idx(1.8)}, {"film", idx(1.5)}}},
                             {"n2_2.0", {{"substrate", idx(2.4)}, {"film", idx(2.0)}}}};
      c.output_prefix = "fig2";
    } else {
      c.task = Task::ratio_threshold;
      c.parameters.values = range(200.0, 800.0, 100.0);
      c.parameters.target = 0.99;
      c.output_prefix = "fig2-inset";
    }
    return c;
  }
  if (name == "fig3a") {
    RunConfig c;
    c.materials = {{"substrate", idx(3.5)}, {"membrane", idx(3.5)}, {"low", idx(1.0)}, {"gold", gold()}};
    c.layers = {layer("substrate"), layer("low", 400.0), layer("membrane", 200.0), layer("low", 400.0),
                layer("gold")};
    c.emitter_layer = 2;
    c.emitter_height_nm = 100.0;
    c.wavelength_nm = 900.0;
    c.orientation = Orientation::isotropic;
    c.task = Task::sweep;
    c.parameters.parameter = SweepParameter::emitter_layer_thickness;
    c.parameters.metric = Metric::required_angle;
    c.parameters.target = 0.99;
    c.parameters.values = range(50.0, 400.0, 10.0);
    c.parameters.keep_relative_height = true;
    c.parameters.spacer_layer = 3;
    c.parameters.low_index_layers = {1, 3};
    c.parameters.series = {{"n3_1.0", {{"low", idx(1.0)}}}, {"n3_1.5", {{"low", idx(1.5)}}}};
    c.output_prefix = "fig3a";
    return c;
  }
  if (name == "fig3b") {
    RunConfig c;
    c.materials = {{"sapphire", idx(1.77)}, {"silica", idx(1.5)}, {"water", idx(1.35)}, {"gold", gold()}};
    c.layers = {layer("sapphire"), layer("silica", 200.0), layer("water", 200.0), layer("silica", 200.0),
                layer("gold")};
    c.emitter_layer = 2;
    c.emitter_height_nm = 100.0;
    c.wavelength_nm = 650.0;
    c.orientation = Orientation::isotropic;
    c.task = Task::channel_scan;
    c.parameters.theta_c_deg = 90.0;
    c.parameters.channels = {200.0, 500.0, 1000.0};
    c.parameters.positions = range(0.05, 0.95, 0.05);
    c.output_prefix = "fig3b";
    return c;
  }
  std::string known;
  for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("preset", "unknown preset '" + std::string(name) + "' (valid: " + known + ")");
}

}  // namespace

QuadratureOptions TaskParameters::quadrature() const {
  QuadratureOptions o;
  o.rel_tol = rel_tol;
  o.max_intervals = max_intervals;
  return o;
}

std::string_view to_string(Task t) {
  for (const auto& e : kTaskNames) {
    if (e.value == t) return e.name;
  }
  return "?";
}

std::optional<Task> parse_task(std::string_view name) {
  for (const auto& e : kTaskNames) {
    if (e.name == name) return e.value;
  }
  return std::nullopt;
}

std::string_view orientation_name(Orientation o) {
  switch (o) {
    case Orientation::vertical: return "ved";
    case Orientation::horizontal: return "hed";
    case Orientation::isotropic: return "iso";
  }
  return "?";
}

RunConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& ex) {
    throw ConfigError("", std::string("malformed JSON: ") + ex.what());
  }
  const Reader root(doc, "");
  root.require_object({"schema_version", "materials", "stack", "source", "task", "parameters", "outputs"});

  RunConfig c;
  c.base_dir = base_dir;
  c.schema_version = root.at("schema_version").integer();
  if (c.schema_version != kSchemaVersion) {
    root.at("schema_version").fail("unsupported schema version " + std::to_string(c.schema_version) +
                                   " (expected " + std::to_string(kSchemaVersion) + ")");
  }
  if (root.has("materials")) c.materials = read_materials(root.at("materials"));

  const auto stack = root.at("stack");
  stack.require_object({"layers", "emitter_layer", "emitter_height_nm"});
  const auto layers = stack.at("layers");
  if (!layers.raw().is_array() || layers.size() < 2) layers.fail("expected an array of at least two layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto l = layers.at(i);
    l.require_object({"material", "index", "thickness_nm"});
    LayerSpec spec;
    if (l.has("material") == l.has("index")) l.fail("exactly one of material, index is required");
    if (l.has("material")) {
      spec.material = l.at("material").string();
      if (!c.materials.contains(spec.material)) {
        l.at("material").fail("unknown material '" + spec.material + "'");
      }
    } else {
      spec.index = read_index(l.at("index"));
    }
    const auto t = l.at("thickness_nm");
    if (t.raw().is_string()) {
      if (t.string() != "semi-infinite") t.fail("expected a number or \"semi-infinite\"");
      spec.thickness_nm = kSemiInfinite;
    } else {
      spec.thickness_nm = t.positive();
    }
    c.layers.push_back(std::move(spec));
  }
  c.emitter_layer = stack.at("emitter_layer").index();
  if (c.emitter_layer >= c.layers.size()) {
    stack.at("emitter_layer").fail("index " + std::to_string(c.emitter_layer) + " out of range for " +
                                   std::to_string(c.layers.size()) + " layers");
  }
  c.emitter_height_nm = stack.at("emitter_height_nm").number();

  const auto source = root.at("source");
  source.require_object({"wavelength_nm", "orientation"});
  c.wavelength_nm = source.at("wavelength_nm").positive();
  if (source.has("orientation")) c.orientation = read_orientation(source.at("orientation"));

  const auto task_name = root.at("task").string();
  const auto task = parse_task(task_name);
  if (!task) {
    root.at("task").fail("unknown task '" + task_name +
                         "' (known: pattern, spectrum, efficiency, budget, sweep, required-angle, "
                         "ratio-threshold, channel-scan)");
  }
  c.task = *task;
  if (root.has("parameters")) c.parameters = read_parameters(root.at("parameters"));
  for (const auto& s : c.parameters.series) {
    for (const auto& [name, m] : s.materials) {
      if (!c.materials.contains(name)) {
        throw ConfigError("/parameters/series", "series '" + s.label + "' overrides unknown material '" + name + "'");
      }
    }
  }
  if (root.has("outputs")) {
    const auto out = root.at("outputs");
    out.require_object({"prefix"});
    if (out.has("prefix")) c.output_prefix = out.at("prefix").string();
    if (c.output_prefix.empty() || c.output_prefix.find_first_of("/\\") != std::string::npos) {
      out.at("prefix").fail("must be a non-empty file-name fragment");
    }
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.parent_path());
}

std::string to_json(const RunConfig& c) {
  json doc;
  doc["schema_version"] = c.schema_version;
  doc["materials"] = write_materials(c.materials);
  json layers = json::array();
  for (const auto& l : c.layers) {
    json item;
    if (l.index) {
      item["index"] = write_index(*l.index);
    } else {
      item["material"] = l.material;
    }
    if (std::isinf(l.thickness_nm)) {
      item["thickness_nm"] = "semi-infinite";
    } else {
      item["thickness_nm"] = l.thickness_nm;
    }
    layers.push_back(item);
  }
  doc["stack"] = {{"layers", layers}, {"emitter_layer", c.emitter_layer}, {"emitter_height_nm", c.emitter_height_nm}};
  doc["source"] = {{"wavelength_nm", c.wavelength_nm}, {"orientation", std::string(orientation_name(c.orientation))}};
  doc["task"] = std::string(to_string(c.task));
  doc["parameters"] = write_parameters(c.parameters);
  doc["outputs"] = {{"prefix", c.output_prefix}};
  return doc.dump(2) + "\n";
}

Material resolve_material(const MaterialSpec& spec, const std::filesystem::path& base_dir) {
  switch (spec.kind) {
    case MaterialSpec::Kind::builtin: return bundled_gold();
    case MaterialSpec::Kind::table: {
      std::filesystem::path p(spec.name);
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      if (!std::filesystem::exists(p)) throw ConfigError("/materials", "table file not found: " + p.string());
      return load_dispersion_file(p);
    }
    case MaterialSpec::Kind::index: return Material::constant(spec.index);
  }
  throw ConfigError("/materials", "unknown material kind");
}

Stack build_stack(const RunConfig& c, const SeriesSpec* series) {
  std::vector<Layer> layers;
  std::map<std::string, Material> cache;
  for (std::size_t i = 0; i < c.layers.size(); ++i) {
    const auto& l = c.layers[i];
    const std::string field = "/stack/layers/" + std::to_string(i);
    if (l.index) {
      layers.push_back({Material::constant(*l.index), l.thickness_nm});
      continue;
    }
    auto it = cache.find(l.material);
    if (it == cache.end()) {
      const MaterialSpec* spec = nullptr;
      if (series && series->materials.contains(l.material)) spec = &series->materials.at(l.material);
      if (!spec) {
        const auto found = c.materials.find(l.material);
        if (found == c.materials.end()) throw ConfigError(field + "/material", "unknown material '" + l.material + "'");
        spec = &found->second;
      }
      try {
        it = cache.emplace(l.material, resolve_material(*spec, c.base_dir)).first;
      } catch (const ParseError& ex) {
        throw ConfigError("/materials/" + l.material, ex.what());
      } catch (const InvalidArgument& ex) {
        throw ConfigError("/materials/" + l.material, ex.what());
      }
    }
    layers.push_back({it->second, l.thickness_nm});
  }
  try {
    return Stack(std::move(layers), c.emitter_layer, c.emitter_height_nm);
  } catch (const InvalidArgument& ex) {
    throw ConfigError("/stack", ex.what());
  }
}

StackTemplate build_template(const RunConfig& c, const SeriesSpec* series) {
  StackTemplate t{build_stack(c, series), c.wavelength_nm, c.parameters.spacer_layer,
                  c.parameters.low_index_layers, c.parameters.keep_relative_height};
  const std::size_t n = t.base.size();
  if (t.spacer_layer && *t.spacer_layer >= n) {
    throw ConfigError("/parameters/spacer_layer", "layer index out of range");
  }
  for (std::size_t j : t.low_index_layers) {
    if (j >= n) throw ConfigError("/parameters/low_index_layers", "layer index out of range");
  }
  return t;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"fig1a", "fig1b", "fig1b-inset", "fig2",
                                                 "fig2-inset", "fig3a", "fig3b"};
  return names;
}

RunConfig preset(std::string_view name) { return make_preset(name); }

}  // namespace dipolar
