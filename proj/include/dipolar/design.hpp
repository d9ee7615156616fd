#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dipolar/emission.hpp"

namespace dipolar {

/// A stack plus the knobs the sweeps turn.
struct StackTemplate {
  Stack base;
  double wavelength_nm = 637.0;
  /// Layer whose thickness is the spacer s (usually the one just above the emitter layer).
  std::optional<std::size_t> spacer_layer;
  /// Layers whose index is set to n2 / ratio by an index-ratio sweep.
  std::vector<std::size_t> low_index_layers;
  /// When the emitter-layer thickness changes, scale h with it (h/t fixed).
  bool keep_relative_height = false;

  bool operator==(const StackTemplate&) const = default;
};

enum class SweepParameter {
  wavelength,
  spacer_thickness,
  emitter_height,
  emitter_layer_thickness,
  index_ratio,
  channel_position,
};

enum class Metric {
  efficiency,      // eta(theta_c)
  required_angle,  // degrees for eta >= target
  total,
  down_allowed,
  down_forbidden,
  up,
  loss,
  spp_estimate,
};

std::string_view to_string(SweepParameter p);
std::string_view to_string(Metric m);
std::optional<SweepParameter> parse_sweep_parameter(std::string_view name);
std::optional<Metric> parse_metric(std::string_view name);

struct SweepSpec {
  StackTemplate stack_template;
  SweepParameter parameter = SweepParameter::wavelength;
  std::vector<double> values;
  Metric metric = Metric::efficiency;
  double theta_c_deg = 55.0;
  double target = 0.99;  // for Metric::required_angle
  QuadratureOptions quadrature{};

  bool operator==(const SweepSpec&) const = default;
};

/// One computed cell. A sweep never throws for a single bad point; it records it here.
struct SweepValue {
  enum class Status { ok, not_achievable, error };
  Status status = Status::ok;
  double value = 0.0;
  std::string message;

  bool ok() const noexcept { return status == Status::ok; }
  bool operator==(const SweepValue&) const = default;
};

struct SweepRow {
  double parameter = 0.0;
  std::array<SweepValue, 3> values;  // vertical, horizontal, isotropic

  const SweepValue& operator[](Orientation o) const { return values[static_cast<std::size_t>(o)]; }
  bool operator==(const SweepRow&) const = default;
};

/// Throws InvalidArgument for an empty or out-of-range value list.
void validate(const SweepSpec& spec);

/// Stack and wavelength for one sweep value.
std::pair<Stack, double> instantiate(const StackTemplate& t, SweepParameter parameter, double value);

/// Rows come back in input order whatever the execution mode; both modes give bitwise
/// identical results.
std::vector<SweepRow> sweep(const SweepSpec& spec, Execution execution = Execution::parallel);

/// Smallest theta_c with eta(theta_c) >= target, to 0.1 degree, or nullopt when even 90
/// degrees falls short.
std::optional<double> required_angle(const EmissionModel& model, const PowerTotals& totals,
                                     Orientation orientation, double target);
std::optional<double> required_angle(const Stack& stack, double wavelength_nm,
                                     Orientation orientation, double target);

struct RatioThreshold {
  std::optional<double> ratio;  // nullopt: target not reached anywhere in [1, 3]
  bool monotonic = true;        // false: ratio is the smallest feasible grid point
  std::vector<double> scan_ratio;
  std::vector<double> scan_efficiency;  // criterion efficiency at each grid ratio
};

/// Smallest n2/n3 in [1, 3] meeting the target. The criterion orientation defaults to the
/// worse of VED and HED.
RatioThreshold ratio_threshold(const StackTemplate& t, double target, double theta_c_deg,
                               std::optional<Orientation> criterion = std::nullopt,
                               Execution execution = Execution::parallel,
                               const QuadratureOptions& quadrature = {});

struct ChannelPoint {
  double position = 0.0;  // h/t
  SweepValue isotropic;
};

/// The template with the emitter layer resized to channel_nm and the emitter at its centre.
StackTemplate channel_template(const StackTemplate& t, double channel_nm);

/// Isotropic efficiency across a channel of thickness t (the emitter layer) at theta_c.
std::vector<ChannelPoint> channel_scan(const StackTemplate& t, double channel_nm,
                                       const std::vector<double>& positions,
                                       double theta_c_deg = 90.0,
                                       Execution execution = Execution::parallel,
                                       const QuadratureOptions& quadrature = {});

struct DesignWarning {
  enum class Kind { ordering, emitter_height, spacer_not_minimal };
  Kind kind;
  std::string message;
};

/// Advisory checks: n1 > n2 > n3, h >= lambda/(2 n2), spacer index lowest among dielectrics.
std::vector<DesignWarning> check_design_rules(const Stack& stack, double wavelength_nm);

}  // namespace dipolar
