#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dipolar/design.hpp"

namespace dipolar {

/// Thrown for any config problem; field() is a JSON-pointer-like path to the culprit.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

inline constexpr int kSchemaVersion = 1;

struct MaterialSpec {
  enum class Kind { builtin, table, index };
  Kind kind = Kind::index;
  std::string name;   // builtin name or table path
  complex index{1.0, 0.0};

  bool operator==(const MaterialSpec&) const = default;
};

struct LayerSpec {
  /// Named entry of RunConfig::materials, or empty with an inline index.
  std::string material;
  std::optional<complex> index;
  double thickness_nm = kSemiInfinite;

  bool operator==(const LayerSpec&) const = default;
};

/// Material overrides applied on top of the base config, one output file each.
struct SeriesSpec {
  std::string label;
  std::map<std::string, MaterialSpec> materials;

  bool operator==(const SeriesSpec&) const = default;
};

enum class Task {
  pattern,
  spectrum,
  efficiency,
  budget,
  sweep,
  required_angle,
  ratio_threshold,
  channel_scan,
};

std::string_view to_string(Task t);
std::optional<Task> parse_task(std::string_view name);
std::string_view orientation_name(Orientation o);

struct TaskParameters {
  double theta_c_deg = 55.0;
  double target = 0.99;
  double theta_step_deg = 0.5;       // pattern grid
  double efficiency_step_deg = 1.0;  // cumulative efficiency grid
  double s_max = 2.0;                // spectrum grid
  int s_points = 401;
  SweepParameter parameter = SweepParameter::wavelength;
  Metric metric = Metric::efficiency;
  std::vector<double> values;     // sweep values or spacer thicknesses (ratio-threshold)
  std::vector<double> positions;  // channel-scan h/t
  std::vector<double> channels;   // channel-scan thicknesses
  std::optional<std::size_t> spacer_layer;
  std::vector<std::size_t> low_index_layers;
  bool keep_relative_height = false;
  std::vector<SeriesSpec> series;
  double rel_tol = QuadratureOptions{}.rel_tol;
  std::size_t max_intervals = QuadratureOptions{}.max_intervals;

  QuadratureOptions quadrature() const;
  bool operator==(const TaskParameters&) const = default;
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  std::map<std::string, MaterialSpec> materials;
  std::vector<LayerSpec> layers;
  std::size_t emitter_layer = 0;
  double emitter_height_nm = 0.0;
  double wavelength_nm = 637.0;
  Orientation orientation = Orientation::vertical;
  Task task = Task::efficiency;
  TaskParameters parameters;
  std::string output_prefix = "run";
  /// Directory that relative table paths resolve against.
  std::filesystem::path base_dir;

  bool operator==(const RunConfig& o) const {
    return schema_version == o.schema_version && materials == o.materials && layers == o.layers &&
           emitter_layer == o.emitter_layer && emitter_height_nm == o.emitter_height_nm &&
           wavelength_nm == o.wavelength_nm && orientation == o.orientation && task == o.task &&
           parameters == o.parameters && output_prefix == o.output_prefix;
  }
};

/// Throws ConfigError naming the offending field.
RunConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);
std::string to_json(const RunConfig& config);

/// Resolves materials (overrides first) and validates the stack. Throws ConfigError.
Stack build_stack(const RunConfig& config, const SeriesSpec* series = nullptr);
Material resolve_material(const MaterialSpec& spec, const std::filesystem::path& base_dir);
StackTemplate build_template(const RunConfig& config, const SeriesSpec* series = nullptr);

const std::vector<std::string>& preset_names();
/// Throws ConfigError on an unknown name; the message lists the valid ones.
RunConfig preset(std::string_view name);

}  // namespace dipolar
