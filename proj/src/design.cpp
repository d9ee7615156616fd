#include "dipolar/design.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dipolar/errors.hpp"

namespace dipolar {

namespace {

constexpr std::array<Orientation, 3> kOrientations = {Orientation::vertical, Orientation::horizontal,
                                                      Orientation::isotropic};

// Angles are searched on a 0.1 degree lattice, ratios on a 0.005 lattice.
constexpr int kAngleSteps = 900;
constexpr double kAngleStep = 0.1;
constexpr double kRatioLo = 1.0;
constexpr int kRatioCoarse = 40;  // 0.05 grid on [1, 3]
constexpr int kRatioRefine = 10;  // 0.005 subgrid per coarse cell
constexpr double kRatioFine = 0.005;
// Slack on eta comparisons so that quadrature round-off does not flip an exact tie.
constexpr double kTargetSlack = 1e-8;

struct ParameterName {
  SweepParameter value;
  std::string_view name;
};
constexpr std::array<ParameterName, 6> kParameterNames = {{
    {SweepParameter::wavelength, "wavelength"},
    {SweepParameter::spacer_thickness, "spacer_thickness"},
    {SweepParameter::emitter_height, "emitter_height"},
    {SweepParameter::emitter_layer_thickness, "emitter_layer_thickness"},
    {SweepParameter::index_ratio, "index_ratio"},
    {SweepParameter::channel_position, "channel_position"},
}};

struct MetricName {
  Metric value;
  std::string_view name;
};
constexpr std::array<MetricName, 8> kMetricNames = {{
    {Metric::efficiency, "efficiency"},
    {Metric::required_angle, "required_angle"},
    {Metric::total, "total"},
    {Metric::down_allowed, "down_allowed"},
    {Metric::down_forbidden, "down_forbidden"},
    {Metric::up, "up"},
    {Metric::loss, "loss"},
    {Metric::spp_estimate, "spp_estimate"},
}};

double budget_field(const PowerBudget& b, Metric m) {
  switch (m) {
    case Metric::total: return b.total;
    case Metric::down_allowed: return b.down_allowed;
    case Metric::down_forbidden: return b.down_forbidden;
    case Metric::up: return b.up;
    case Metric::loss: return b.loss;
    case Metric::spp_estimate: return b.spp_estimate;
    default: return 0.0;
  }
}

SweepValue failed(const std::exception& ex) {
  return {SweepValue::Status::error, 0.0, ex.what()};
}

SweepRow evaluate_row(const SweepSpec& spec, double value) {
  SweepRow row;
  row.parameter = value;
  try {
    const auto [stack, wavelength] = instantiate(spec.stack_template, spec.parameter, value);
    const EmissionModel model(stack, wavelength, spec.quadrature);
    const PowerTotals totals = model.totals();
    switch (spec.metric) {
      case Metric::efficiency: {
        const auto eta = efficiencies(totals, model.collected(spec.theta_c_deg));
        for (auto o : kOrientations) {
          row.values[static_cast<std::size_t>(o)] = {SweepValue::Status::ok, eta.for_orientation(o), {}};
        }
        break;
      }
      case Metric::required_angle:
        for (auto o : kOrientations) {
          auto& cell = row.values[static_cast<std::size_t>(o)];
          try {
            const auto angle = required_angle(model, totals, o, spec.target);
            if (angle) {
              cell = {SweepValue::Status::ok, *angle, {}};
            } else {
              cell = {SweepValue::Status::not_achievable, 0.0, "target not reached at 90 degrees"};
            }
          } catch (const std::exception& ex) {
            cell = failed(ex);
          }
        }
        break;
      default:
        for (auto o : kOrientations) {
          row.values[static_cast<std::size_t>(o)] = {SweepValue::Status::ok,
                                                     budget_field(totals.budget(o), spec.metric), {}};
        }
        break;
    }
  } catch (const std::exception& ex) {
    for (auto& cell : row.values) cell = failed(ex);
  }
  return row;
}

template <class F>
void for_each_index(std::size_t count, Execution execution, F&& f) {
  if (execution == Execution::serial) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) f(static_cast<std::size_t>(i));
}

double criterion_efficiency(const Efficiencies& eta, std::optional<Orientation> criterion) {
  if (criterion) return eta.for_orientation(*criterion);
  return std::min(eta.vertical, eta.horizontal);
}

}  // namespace

std::string_view to_string(SweepParameter p) {
  for (const auto& e : kParameterNames) {
    if (e.value == p) return e.name;
  }
  return "?";
}

std::string_view to_string(Metric m) {
  for (const auto& e : kMetricNames) {
    if (e.value == m) return e.name;
  }
  return "?";
}

std::optional<SweepParameter> parse_sweep_parameter(std::string_view name) {
  for (const auto& e : kParameterNames) {
    if (e.name == name) return e.value;
  }
  return std::nullopt;
}

std::optional<Metric> parse_metric(std::string_view name) {
  for (const auto& e : kMetricNames) {
    if (e.name == name) return e.value;
  }
  return std::nullopt;
}

void validate(const SweepSpec& spec) {
  if (spec.values.empty()) throw InvalidArgument("sweep value list is empty");
  for (double v : spec.values) {
    if (!std::isfinite(v)) throw InvalidArgument("sweep values must be finite");
    switch (spec.parameter) {
      case SweepParameter::wavelength:
      case SweepParameter::spacer_thickness:
      case SweepParameter::emitter_layer_thickness:
        if (!(v > 0.0)) throw InvalidArgument("sweep " + std::string(to_string(spec.parameter)) + " values must be > 0");
        break;
      case SweepParameter::emitter_height:
        if (v < 0.0) throw InvalidArgument("sweep emitter_height values must be >= 0");
        break;
      case SweepParameter::index_ratio:
        if (v < 1.0) throw InvalidArgument("sweep index_ratio values must be >= 1");
        break;
      case SweepParameter::channel_position:
        if (!(v > 0.0 && v < 1.0)) throw InvalidArgument("sweep channel_position values must be in (0, 1)");
        break;
    }
  }
  if (spec.metric == Metric::required_angle && !(spec.target > 0.0 && spec.target < 1.0)) {
    throw InvalidArgument("required_angle target must be in (0, 1)");
  }
  if (spec.metric == Metric::efficiency && !(spec.theta_c_deg >= 0.0 && spec.theta_c_deg <= 90.0)) {
    throw InvalidArgument("collection angle must be in [0, 90]");
  }
  if (spec.parameter == SweepParameter::spacer_thickness && !spec.stack_template.spacer_layer) {
    throw InvalidArgument("spacer_thickness sweep needs a spacer layer");
  }
  if (spec.parameter == SweepParameter::index_ratio && spec.stack_template.low_index_layers.empty() &&
      !spec.stack_template.spacer_layer) {
    throw InvalidArgument("index_ratio sweep needs low-index layers");
  }
}

std::pair<Stack, double> instantiate(const StackTemplate& t, SweepParameter parameter, double value) {
  const Stack& base = t.base;
  const std::size_t e = base.emitter_layer();
  switch (parameter) {
    case SweepParameter::wavelength:
      return {base, value};
    case SweepParameter::spacer_thickness:
      if (!t.spacer_layer) throw InvalidArgument("template has no spacer layer");
      return {base.with_thickness(*t.spacer_layer, value), t.wavelength_nm};
    case SweepParameter::emitter_height:
      return {base.with_emitter_height(value), t.wavelength_nm};
    case SweepParameter::emitter_layer_thickness: {
      const double old_t = base.layer(e).thickness_nm;
      if (base.layer(e).semi_infinite()) throw InvalidArgument("emitter layer is semi-infinite");
      auto layers = base.layers();
      layers[e].thickness_nm = value;
      const double h = t.keep_relative_height ? base.emitter_height() * value / old_t : base.emitter_height();
      return {Stack(std::move(layers), e, h), t.wavelength_nm};
    }
    case SweepParameter::index_ratio: {
      const double n2 = base.layer(e).material.index(t.wavelength_nm).real();
      auto layers = base.layers();
      std::vector<std::size_t> targets = t.low_index_layers;
      if (targets.empty() && t.spacer_layer) targets.push_back(*t.spacer_layer);
      for (std::size_t j : targets) layers.at(j).material = Material::constant(n2 / value);
      return {Stack(std::move(layers), e, base.emitter_height()), t.wavelength_nm};
    }
    case SweepParameter::channel_position: {
      if (base.layer(e).semi_infinite()) throw InvalidArgument("emitter layer is semi-infinite");
      return {base.with_emitter_height(value * base.layer(e).thickness_nm), t.wavelength_nm};
    }
  }
  throw InvalidArgument("unknown sweep parameter");
}

std::vector<SweepRow> sweep(const SweepSpec& spec, Execution execution) {
  validate(spec);
  std::vector<SweepRow> rows(spec.values.size());
  for_each_index(rows.size(), execution,
                 [&](std::size_t i) { rows[i] = evaluate_row(spec, spec.values[i]); });
  return rows;
}

std::optional<double> required_angle(const EmissionModel& model, const PowerTotals& totals,
                                     Orientation orientation, double target) {
  if (!(target > 0.0 && target < 1.0)) throw InvalidArgument("target efficiency must be in (0, 1)");
  auto meets = [&](int k) {
    const double eta = efficiencies(totals, model.collected(k * kAngleStep)).for_orientation(orientation);
    return eta >= target - kTargetSlack;
  };
  if (!meets(kAngleSteps)) return std::nullopt;
  // Smallest lattice angle meeting the target; eta is cumulative, hence monotone.
  int lo = 0;
  int hi = kAngleSteps;
  if (meets(lo)) return 0.0;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    (meets(mid) ? hi : lo) = mid;
  }
  return hi * kAngleStep;
}

std::optional<double> required_angle(const Stack& stack, double wavelength_nm,
                                     Orientation orientation, double target) {
  const EmissionModel model(stack, wavelength_nm);
  return required_angle(model, model.totals(), orientation, target);
}

RatioThreshold ratio_threshold(const StackTemplate& t, double target, double theta_c_deg,
                               std::optional<Orientation> criterion, Execution execution,
                               const QuadratureOptions& quadrature) {
  if (!(target > 0.0 && target < 1.0)) throw InvalidArgument("target efficiency must be in (0, 1)");
  auto efficiency_at = [&](double ratio) {
    const auto [stack, wavelength] = instantiate(t, SweepParameter::index_ratio, ratio);
    const EmissionModel model(stack, wavelength, quadrature);
    const auto eta = efficiencies(model.totals(), model.collected(theta_c_deg));
    return criterion_efficiency(eta, criterion);
  };
  auto lattice = [](int k) { return kRatioLo + kRatioFine * k; };

  RatioThreshold out;
  out.scan_ratio.resize(kRatioCoarse + 1);
  out.scan_efficiency.resize(kRatioCoarse + 1);
  std::vector<std::string> failures(out.scan_ratio.size());
  for_each_index(out.scan_ratio.size(), execution, [&](std::size_t i) {
    out.scan_ratio[i] = lattice(static_cast<int>(i) * kRatioRefine);
    try {
      out.scan_efficiency[i] = efficiency_at(out.scan_ratio[i]);
    } catch (const std::exception& ex) {
      failures[i] = ex.what();
    }
  });
  for (const auto& f : failures) {
    if (!f.empty()) throw QuadratureError("ratio scan failed: " + f, 0.0, 0.0);
  }

  for (std::size_t i = 1; i < out.scan_efficiency.size(); ++i) {
    if (out.scan_efficiency[i] < out.scan_efficiency[i - 1] - 1e-9) out.monotonic = false;
  }
  const auto first = std::find_if(out.scan_efficiency.begin(), out.scan_efficiency.end(),
                                  [&](double eta) { return eta >= target - kTargetSlack; });
  if (first == out.scan_efficiency.end()) return out;
  const auto index = static_cast<int>(first - out.scan_efficiency.begin());
  if (!out.monotonic || index == 0) {
    out.ratio = out.scan_ratio[static_cast<std::size_t>(index)];
    return out;
  }
  int lo = (index - 1) * kRatioRefine;
  int hi = index * kRatioRefine;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    (efficiency_at(lattice(mid)) >= target - kTargetSlack ? hi : lo) = mid;
  }
  out.ratio = lattice(hi);
  return out;
}

StackTemplate channel_template(const StackTemplate& t, double channel_nm) {
  if (!(channel_nm > 0.0)) throw InvalidArgument("channel thickness must be > 0");
  const std::size_t e = t.base.emitter_layer();
  if (t.base.layer(e).semi_infinite()) throw InvalidArgument("emitter layer is semi-infinite");
  auto layers = t.base.layers();
  layers.at(e).thickness_nm = channel_nm;
  StackTemplate channel = t;
  channel.base = Stack(std::move(layers), e, 0.5 * channel_nm);
  return channel;
}

std::vector<ChannelPoint> channel_scan(const StackTemplate& t, double channel_nm,
                                       const std::vector<double>& positions, double theta_c_deg,
                                       Execution execution, const QuadratureOptions& quadrature) {
  if (!(channel_nm > 0.0)) throw InvalidArgument("channel thickness must be > 0");
  for (double p : positions) {
    if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("channel positions must be in (0, 1)");
    if (p * channel_nm < 1.0 || (1.0 - p) * channel_nm < 1.0) {
      throw InvalidArgument("emitter closer than 1 nm to a channel wall");
    }
  }
  const SweepSpec spec{.stack_template = channel_template(t, channel_nm),
                       .parameter = SweepParameter::channel_position,
                       .values = positions,
                       .metric = Metric::efficiency,
                       .theta_c_deg = theta_c_deg,
                       .quadrature = quadrature};

  std::vector<ChannelPoint> out;
  for (const auto& row : sweep(spec, execution)) {
    out.push_back({row.parameter, row[Orientation::isotropic]});
  }
  return out;
}

std::vector<DesignWarning> check_design_rules(const Stack& stack, double wavelength_nm) {
  std::vector<DesignWarning> out;
  const std::size_t e = stack.emitter_layer();
  auto real_index = [&](std::size_t j) { return stack.layer(j).material.index(wavelength_nm).real(); };
  auto dielectric = [&](std::size_t j) { return stack.layer(j).material.permittivity(wavelength_nm).real() > 0.0; };
  auto fmt = [](double x) {
    std::ostringstream s;
    s << x;
    return s.str();
  };

  const double n1 = real_index(0);
  const double n2 = real_index(e);
  std::optional<std::size_t> spacer;
  if (e + 1 < stack.size() && dielectric(e + 1)) spacer = e + 1;

  if (!(n1 > n2)) {
    out.push_back({DesignWarning::Kind::ordering,
                   "ordering n1 > n2 violated: n1 = " + fmt(n1) + ", n2 = " + fmt(n2)});
  }
  if (spacer && !(n2 > real_index(*spacer))) {
    out.push_back({DesignWarning::Kind::ordering, "ordering n2 > n3 violated: n2 < n3 (n2 = " + fmt(n2) +
                                                      ", n3 = " + fmt(real_index(*spacer)) + ")"});
  }
  const double h = stack.distance_below();
  const double half_wave = wavelength_nm / (2.0 * n2);
  if (h < half_wave) {
    out.push_back({DesignWarning::Kind::emitter_height,
                   "h below lambda/2n2: h = " + fmt(h) + " nm < " + fmt(half_wave) + " nm"});
  }
  if (spacer) {
    double lowest = real_index(*spacer);
    for (std::size_t j = 0; j < stack.size(); ++j) {
      if (dielectric(j)) lowest = std::min(lowest, real_index(j));
    }
    if (real_index(*spacer) > lowest) {
      out.push_back({DesignWarning::Kind::spacer_not_minimal,
                     "spacer index " + fmt(real_index(*spacer)) + " is not the lowest dielectric index (" +
                         fmt(lowest) + ")"});
    }
  }
  return out;
}

}  // namespace dipolar
