#include <iostream>

#include "CLI11.hpp"

#include "dipolar/errors.hpp"
#include "dipolar/run.hpp"

namespace {

using namespace dipolar;

int validate_material(const std::filesystem::path& path) {
  try {
    if (!std::filesystem::exists(path)) {
      std::cerr << "config error: " << path.string() << ": file not found\n";
      return kExitConfig;
    }
    const auto m = load_dispersion_file(path);
    const auto [lo, hi] = m.range();
    std::cout << "materials validate " << path.filename().string() << ": ok rows=" << m.samples().size()
              << " range_nm=" << format_number(lo) << ".." << format_number(hi)
              << (m.is_absorptive() ? " absorptive" : " lossless") << "\n";
    return kExitOk;
  } catch (const ParseError& ex) {
    std::cerr << "config error: " << path.string() << ": " << ex.what() << "\n";
  } catch (const InvalidArgument& ex) {
    std::cerr << "config error: " << path.string() << ": " << ex.what() << "\n";
  } catch (const std::runtime_error& ex) {
    std::cerr << "config error: " << path.string() << ": " << ex.what() << "\n";
  }
  return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dipole emission in planar multilayer antennas"};
  app.require_subcommand(1);
  bool serial = false;
  app.add_flag("--serial", serial, "Run the serial reference kernels");

  std::string task_name;
  std::filesystem::path config_path;
  std::filesystem::path out_dir;
  auto* simulate = app.add_subcommand("simulate", "Run one task from a JSON config");
  simulate->add_option("task", task_name, "pattern, spectrum, efficiency, budget, sweep, required-angle, "
                                          "ratio-threshold or channel-scan")->required();
  simulate->add_option("--config", config_path, "Config file")->required();
  simulate->add_option("--out", out_dir, "Output directory")->required();

  std::string preset_name;
  auto* preset_cmd = app.add_subcommand("preset", "Run a named figure preset");
  preset_cmd->add_option("name", preset_name, "fig1a, fig1b, fig1b-inset, fig2, fig2-inset, fig3a or fig3b")
      ->required();
  preset_cmd->add_option("--out", out_dir, "Output directory")->required();
  bool dump = false;
  preset_cmd->add_flag("--print-config", dump, "Print the preset config instead of running it");

  std::filesystem::path table_path;
  auto* materials = app.add_subcommand("materials", "Dispersion table utilities");
  materials->require_subcommand(1);
  auto* validate = materials->add_subcommand("validate", "Check a wavelength_nm,n,k table");
  validate->add_option("path", table_path, "Table file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  const auto execution = serial ? Execution::serial : Execution::parallel;
  if (*validate) return validate_material(table_path);

  RunConfig config;
  try {
    if (*simulate) {
      config = load_config(config_path);
      const auto task = parse_task(task_name);
      if (!task) throw ConfigError("task", "unknown task '" + task_name + "'");
      config.task = *task;
    } else {
      config = preset(preset_name);
      if (dump) {
        std::cout << to_json(config);
        return kExitOk;
      }
    }
  } catch (const ConfigError& ex) {
    std::cerr << "config error: " << ex.what() << "\n";
    return kExitConfig;
  }
  return run_and_report(config, out_dir, std::cout, std::cerr, execution);
}
