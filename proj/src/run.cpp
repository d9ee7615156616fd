#include "dipolar/run.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <system_error>

#include "json.hpp"

#include "dipolar/errors.hpp"

namespace dipolar {

namespace {

using json = nlohmann::ordered_json;

constexpr std::array<Orientation, 3> kOrientations = {Orientation::vertical, Orientation::horizontal,
                                                      Orientation::isotropic};

// Files written by one run; removed again if the run fails.
class Outputs {
 public:
  explicit Outputs(std::filesystem::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, const std::string& content) {
    const auto target = dir_ / name;
    const auto tmp = dir_ / (name + ".tmp");
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw std::filesystem::filesystem_error("cannot write", tmp, std::make_error_code(std::errc::io_error));
      out << content;
      out.close();
      if (!out) {
        std::error_code ignored;
        std::filesystem::remove(tmp, ignored);
        throw std::filesystem::filesystem_error("cannot write", tmp, std::make_error_code(std::errc::io_error));
      }
    }
    std::filesystem::rename(tmp, target);
    files_.push_back(target);
  }

  void rollback() noexcept {
    for (const auto& f : files_) {
      std::error_code ignored;
      std::filesystem::remove(f, ignored);
    }
    files_.clear();
  }

  const std::vector<std::filesystem::path>& files() const { return files_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> files_;
};

std::string cell(const SweepValue& v) {
  switch (v.status) {
    case SweepValue::Status::ok: return format_number(v.value);
    case SweepValue::Status::not_achievable: return "NA";
    case SweepValue::Status::error: return "ERR";
  }
  return "ERR";
}

SweepValue ok(double v) { return {SweepValue::Status::ok, v, {}}; }
SweepValue maybe(const std::optional<double>& v) {
  if (v) return ok(*v);
  return {SweepValue::Status::not_achievable, 0.0, {}};
}

constexpr const char* kSweepHeader = "param,value_ved,value_hed,value_iso\n";

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = kSweepHeader;
  for (const auto& r : rows) {
    out += format_number(r.parameter);
    for (const auto& v : r.values) out += "," + cell(v);
    out += "\n";
  }
  return out;
}

std::size_t count_errors(const std::vector<SweepRow>& rows) {
  std::size_t n = 0;
  for (const auto& r : rows) {
    for (const auto& v : r.values) n += v.status == SweepValue::Status::error ? 1 : 0;
  }
  return n;
}

// 0, step, 2 step, ... up to 90 (included when it lies on the grid).
std::vector<double> angle_grid(double step) {
  std::vector<double> out;
  const auto n = static_cast<int>(std::floor(90.0 / step + 1e-9));
  for (int i = 0; i <= n; ++i) out.push_back(std::min(90.0, i * step));
  return out;
}

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string eta_summary(const Efficiencies& eta, double theta_c) {
  const std::string at = "(" + format_number(theta_c) + ")";
  return "eta_ved" + at + "=" + fixed(eta.vertical) + " eta_hed" + at + "=" + fixed(eta.horizontal) +
         " eta_iso" + at + "=" + fixed(eta.isotropic);
}

struct Job {
  const RunConfig& config;
  Execution execution;
  Outputs& outputs;
  std::vector<std::string> summary;

  std::string file(const SeriesSpec* series, const std::string& suffix) const {
    return config.output_prefix + (series ? "_" + series->label : "") + suffix;
  }
  std::string tag(const SeriesSpec* series) const { return series ? series->label + ": " : ""; }
  QuadratureOptions quadrature() const { return config.parameters.quadrature(); }

  std::vector<Efficiencies> efficiency_grid(const EmissionModel& model, const PowerTotals& totals,
                                            const std::vector<double>& theta) const {
    std::vector<Efficiencies> out;
    for (const auto& c : model.collected(theta)) out.push_back(efficiencies(totals, c));
    return out;
  }

  void write_efficiency(const SeriesSpec* series, const std::vector<double>& theta,
                        const std::vector<Efficiencies>& eta) {
    std::vector<SweepRow> rows;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      rows.push_back({theta[i], {ok(eta[i].vertical), ok(eta[i].horizontal), ok(eta[i].isotropic)}});
    }
    outputs.write(file(series, "_efficiency.csv"), sweep_csv(rows));
  }

  void pattern(const SeriesSpec* series) {
    const EmissionModel model(build_stack(config, series), config.wavelength_nm, quadrature());
    const auto totals = model.totals();
    const auto theta = angle_grid(config.parameters.theta_step_deg);
    const auto pv = far_field_pattern(model, Orientation::vertical, theta, execution);
    const auto ph = far_field_pattern(model, Orientation::horizontal, theta, execution);
    const auto eta = efficiency_grid(model, totals, theta);
    std::string csv = "theta_deg,p_ved,p_hed,eta_ved,eta_hed\n";
    for (std::size_t i = 0; i < theta.size(); ++i) {
      csv += format_number(theta[i]) + "," + format_number(pv.density[i]) + "," + format_number(ph.density[i]) +
             "," + format_number(eta[i].vertical) + "," + format_number(eta[i].horizontal) + "\n";
    }
    outputs.write(file(series, "_pattern.csv"), csv);
    efficiency(series, model, totals);
  }

  void efficiency(const SeriesSpec* series, const EmissionModel& model, const PowerTotals& totals) {
    const auto theta = angle_grid(config.parameters.efficiency_step_deg);
    write_efficiency(series, theta, efficiency_grid(model, totals, theta));
    const double theta_c = config.parameters.theta_c_deg;
    summary.push_back(tag(series) + eta_summary(efficiencies(totals, model.collected(theta_c)), theta_c));
  }

  void efficiency(const SeriesSpec* series) {
    const EmissionModel model(build_stack(config, series), config.wavelength_nm, quadrature());
    efficiency(series, model, model.totals());
  }

  void spectrum(const SeriesSpec* series) {
    const EmissionModel model(build_stack(config, series), config.wavelength_nm, quadrature());
    const int n = config.parameters.s_points;
    std::vector<std::string> lines(static_cast<std::size_t>(n));
    auto line = [&](int i) {
      const double s = config.parameters.s_max * i / (n - 1);
      std::string out = format_number(s);
      try {
        const auto x = model.sample(s);
        for (auto o : kOrientations) out += "," + format_number(x.total.for_orientation(o));
        for (auto o : kOrientations) out += "," + format_number(x.down.for_orientation(o));
      } catch (const PoleError&) {
        out += ",ERR,ERR,ERR,ERR,ERR,ERR";
      }
      lines[static_cast<std::size_t>(i)] = out + "\n";
    };
    if (execution == Execution::serial) {
      for (int i = 0; i < n; ++i) line(i);
    } else {
#pragma omp parallel for schedule(static)
      for (int i = 0; i < n; ++i) line(i);
    }
    std::string csv = "s,total_ved,total_hed,total_iso,down_ved,down_hed,down_iso\n";
    for (const auto& l : lines) csv += l;
    outputs.write(file(series, "_spectrum.csv"), csv);
    summary.push_back(tag(series) + "points=" + std::to_string(n) + " s_max=" + format_number(config.parameters.s_max));
  }

  void budget(const SeriesSpec* series) {
    const EmissionModel model(build_stack(config, series), config.wavelength_nm, quadrature());
    const auto totals = model.totals();
    std::string csv = "orientation,total,down_allowed,down_forbidden,up,loss,spp_estimate\n";
    json doc;
    doc["wavelength_nm"] = config.wavelength_nm;
    for (auto o : kOrientations) {
      const auto b = totals.budget(o);
      const std::string name(orientation_name(o));
      csv += name + "," + format_number(b.total) + "," + format_number(b.down_allowed) + "," +
             format_number(b.down_forbidden) + "," + format_number(b.up) + "," + format_number(b.loss) + "," +
             format_number(b.spp_estimate) + "\n";
      doc[name] = {{"total", b.total},   {"down_allowed", b.down_allowed}, {"down_forbidden", b.down_forbidden},
                   {"up", b.up},         {"loss", b.loss},                 {"spp_estimate", b.spp_estimate}};
    }
    outputs.write(file(series, "_budget.csv"), csv);
    outputs.write(file(series, "_budget.json"), doc.dump(2) + "\n");
    const auto b = totals.budget(config.orientation);
    summary.push_back(tag(series) + std::string(orientation_name(config.orientation)) + " total=" + fixed(b.total) +
                      " down=" + fixed(b.down()) + " up=" + fixed(b.up) + " loss=" + fixed(b.loss) +
                      " spp=" + fixed(b.spp_estimate));
  }

  SweepSpec sweep_spec(const SeriesSpec* series, Metric metric) const {
    const auto& p = config.parameters;
    return SweepSpec{.stack_template = build_template(config, series),
                     .parameter = p.parameter,
                     .values = p.values,
                     .metric = metric,
                     .theta_c_deg = p.theta_c_deg,
                     .target = p.target,
                     .quadrature = p.quadrature()};
  }

  void report_rows(const SeriesSpec* series, const std::vector<SweepRow>& rows) {
    const auto errors = count_errors(rows);
    summary.push_back(tag(series) + "rows=" + std::to_string(rows.size()) + " errors=" + std::to_string(errors));
  }

  void sweep_task(const SeriesSpec* series) {
    const auto rows = sweep(sweep_spec(series, config.parameters.metric), execution);
    outputs.write(file(series, ".csv"), sweep_csv(rows));
    report_rows(series, rows);
  }

  void required_angle_task(const SeriesSpec* series) {
    const double target = config.parameters.target;
    if (!config.parameters.values.empty()) {
      // A list of values turns this into a sweep of the required angle.
      const auto rows = sweep(sweep_spec(series, Metric::required_angle), execution);
      outputs.write(file(series, "_required_angle.csv"), sweep_csv(rows));
      report_rows(series, rows);
      return;
    }
    if (!(target > 0.0 && target < 1.0)) throw ConfigError("/parameters/target", "must be in (0, 1)");
    const EmissionModel model(build_stack(config, series), config.wavelength_nm, quadrature());
    const auto totals = model.totals();
    SweepRow row{target, {}};
    std::string line;
    for (auto o : kOrientations) {
      const auto angle = required_angle(model, totals, o, target);
      row.values[static_cast<std::size_t>(o)] = maybe(angle);
      line += " theta_" + std::string(orientation_name(o)) + "=" + (angle ? fixed(*angle, 1) : std::string("NA"));
    }
    outputs.write(file(series, "_required_angle.csv"), sweep_csv({row}));
    summary.push_back(tag(series) + "target=" + format_number(target) + line);
  }

  void ratio_threshold_task(const SeriesSpec* series) {
    const auto& p = config.parameters;
    const auto base = build_template(config, series);
    if (!base.spacer_layer) throw ConfigError("/parameters/spacer_layer", "ratio-threshold needs a spacer layer");
    if (p.values.empty()) throw ConfigError("/parameters/values", "ratio-threshold needs spacer thicknesses");
    std::vector<SweepRow> rows;
    json doc;
    doc["target"] = p.target;
    doc["theta_c_deg"] = p.theta_c_deg;
    doc["rows"] = json::array();
    std::string line;
    for (double s : p.values) {
      if (!(s > 0.0)) throw ConfigError("/parameters/values", "spacer thicknesses must be > 0");
      StackTemplate t = base;
      t.base = instantiate(base, SweepParameter::spacer_thickness, s).first;
      SweepRow row{s, {}};
      json entry;
      entry["spacer_nm"] = s;
      for (auto o : kOrientations) {
        const auto r = ratio_threshold(t, p.target, p.theta_c_deg, o, execution, p.quadrature());
        row.values[static_cast<std::size_t>(o)] = maybe(r.ratio);
        entry[std::string(orientation_name(o))] = {{"ratio", r.ratio ? json(*r.ratio) : json(nullptr)},
                                                   {"monotonic", r.monotonic}};
      }
      const auto worst = ratio_threshold(t, p.target, p.theta_c_deg, std::nullopt, execution, p.quadrature());
      entry["worst"] = {{"ratio", worst.ratio ? json(*worst.ratio) : json(nullptr)}, {"monotonic", worst.monotonic},
                        {"scan_ratio", worst.scan_ratio}, {"scan_efficiency", worst.scan_efficiency}};
      doc["rows"].push_back(entry);
      rows.push_back(row);
      line += " s" + format_number(s) + "=" + (worst.ratio ? fixed(*worst.ratio, 3) : std::string("NA")) +
              (worst.monotonic ? "" : "*");
    }
    outputs.write(file(series, ".csv"), sweep_csv(rows));
    outputs.write(file(series, ".json"), doc.dump(2) + "\n");
    summary.push_back(tag(series) + "worst-orientation thresholds:" + line);
  }

  void channel_scan_task(const SeriesSpec* series) {
    const auto& p = config.parameters;
    if (p.channels.empty()) throw ConfigError("/parameters/channels", "channel-scan needs channel thicknesses");
    if (p.positions.empty()) throw ConfigError("/parameters/positions", "channel-scan needs positions");
    const auto base = build_template(config, series);
    for (double t : p.channels) {
      for (double h : p.positions) {
        if (!(h > 0.0 && h < 1.0)) throw ConfigError("/parameters/positions", "positions must be in (0, 1)");
        if (h * t < 1.0 || (1.0 - h) * t < 1.0) {
          throw ConfigError("/parameters/positions", "emitter closer than 1 nm to a channel wall");
        }
      }
      const SweepSpec spec{.stack_template = channel_template(base, t),
                           .parameter = SweepParameter::channel_position,
                           .values = p.positions,
                           .metric = Metric::efficiency,
                           .theta_c_deg = p.theta_c_deg,
                           .quadrature = p.quadrature()};
      const auto rows = sweep(spec, execution);
      outputs.write(file(series, "_t" + format_number(t) + ".csv"), sweep_csv(rows));
      double lo = 1.0;
      for (const auto& r : rows) {
        if (r[Orientation::isotropic].ok()) lo = std::min(lo, r[Orientation::isotropic].value);
      }
      summary.push_back(tag(series) + "t=" + format_number(t) + " min_eta_iso=" + fixed(lo) +
                        (count_errors(rows) ? " errors=" + std::to_string(count_errors(rows)) : ""));
    }
  }

  void one(const SeriesSpec* series) {
    switch (config.task) {
      case Task::pattern: return pattern(series);
      case Task::spectrum: return spectrum(series);
      case Task::efficiency: return efficiency(series);
      case Task::budget: return budget(series);
      case Task::sweep: return sweep_task(series);
      case Task::required_angle: return required_angle_task(series);
      case Task::ratio_threshold: return ratio_threshold_task(series);
      case Task::channel_scan: return channel_scan_task(series);
    }
  }
};

}  // namespace

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v == 0.0 ? 0.0 : v);  // no "-0"
  return buf;
}

RunResult run(const RunConfig& config, const std::filesystem::path& out_dir, Execution execution) {
  // Resolve every stack before computing anything, so config errors surface first.
  const Stack base = build_stack(config);
  for (const auto& s : config.parameters.series) build_template(config, &s);

  std::filesystem::create_directories(out_dir);
  Outputs outputs(out_dir);
  Job job{config, execution, outputs, {}};
  try {
    if (config.parameters.series.empty()) {
      job.one(nullptr);
    } else {
      for (const auto& s : config.parameters.series) job.one(&s);
    }
  } catch (...) {
    outputs.rollback();
    throw;
  }

  RunResult result;
  result.files = outputs.files();
  result.summary = std::string(to_string(config.task)) + " " + config.output_prefix + ":";
  for (std::size_t i = 0; i < job.summary.size(); ++i) result.summary += (i ? "; " : " ") + job.summary[i];
  for (const auto& w : check_design_rules(base, config.wavelength_nm)) result.warnings.push_back(w.message);
  return result;
}

int run_and_report(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& out,
                   std::ostream& err, Execution execution) {
  try {
    const auto result = run(config, out_dir, execution);
    for (const auto& w : result.warnings) err << "warning: " << w << "\n";
    out << result.summary << "\n";
    return kExitOk;
  } catch (const ConfigError& ex) {
    err << "config error: " << ex.what() << "\n";
  } catch (const InvalidArgument& ex) {
    err << "config error: " << ex.what() << "\n";
  } catch (const ParseError& ex) {
    err << "config error: " << ex.what() << "\n";
  } catch (const RangeError& ex) {
    err << "config error: " << ex.what() << "\n";
  } catch (const UnsupportedConfiguration& ex) {
    err << "config error: " << ex.what() << "\n";
  } catch (const std::filesystem::filesystem_error& ex) {
    err << "output error: " << ex.what() << "\n";
  } catch (const QuadratureError& ex) {
    err << "numerical failure: " << ex.what() << "\n";
    return kExitNumerical;
  } catch (const PoleError& ex) {
    err << "numerical failure: " << ex.what() << " (s = " << format_number(ex.s()) << ")\n";
    return kExitNumerical;
  } catch (const SingularityError& ex) {
    err << "numerical failure: " << ex.what() << "\n";
    return kExitNumerical;
  }
  return kExitConfig;
}

}  // namespace dipolar
