// eia: scan, sweep, fit and constants subcommands over the EIA model.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "eia/errors.hpp"
#include "eia/harness.hpp"

namespace fs = std::filesystem;

namespace {

struct Overrides {
  std::string config_path;
  std::optional<double> b_min;
  std::optional<double> b_max;
  std::optional<int> b_points;
  std::optional<int> n_phase;
  std::optional<double> od;
};

void add_model_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "INI config file")->check(CLI::ExistingFile);
  cmd->add_option("--b-min", o.b_min, "scan start (mG)");
  cmd->add_option("--b-max", o.b_max, "scan end (mG)");
  cmd->add_option("--b-points", o.b_points, "scan point count");
  cmd->add_option("--n-phase", o.n_phase, "pump/probe phase sites");
  cmd->add_option("--od", o.od, "optical depth");
}

eia::ExperimentConfig resolve(const Overrides& o) {
  eia::ExperimentConfig c = o.config_path.empty() ? eia::default_config() : eia::load_config(o.config_path);
  if (o.b_min) c.scan.b_min = *o.b_min;
  if (o.b_max) c.scan.b_max = *o.b_max;
  if (o.b_points) c.scan.points = *o.b_points;
  if (o.n_phase) c.n_phase = *o.n_phase;
  if (o.od) c.od = *o.od;
  eia::validate_config(c);
  return c;
}

std::ofstream open_in(const fs::path& dir, const char* name) {
  fs::create_directories(dir);
  std::ofstream out(dir / name);
  if (!out) throw eia::InputError("cannot write " + (dir / name).string());
  return out;
}

int run_scan(const Overrides& o, const fs::path& out_dir, bool slope) {
  const auto config = resolve(o);
  for (const auto& w : eia::soft_warnings(config.field_params(), config.relaxation)) {
    std::cerr << "warning: " << w << '\n';
  }
  const auto result = eia::run_scan(config, config.scan.grid(), {.background_slope = slope});
  auto profile = open_in(out_dir, "profile.csv");
  eia::write_profile_csv(profile, result.profile);
  auto metrics = open_in(out_dir, "metrics.csv");
  eia::write_metrics_csv(metrics, result);
  std::cout << "wrote " << (out_dir / "profile.csv").string() << '\n';
  if (!result.metrics) {
    std::cerr << "error: metrics: " << result.metrics_error << '\n';
    return 2;
  }
  std::cout << eia::metrics_report(*result.metrics);
  return 0;
}

int run_sweep(const Overrides& o, const fs::path& out_dir, bool slope) {
  const auto config = resolve(o);
  const auto record = eia::run_power_sweep(eia::SweepSpec::from_config(config), {.background_slope = slope});
  eia::write_sweep_outputs(record, out_dir);
  eia::write_sweep_csv(std::cout, record);
  int failed = 0;
  for (const auto& row : record.rows) {
    if (row.error.empty()) continue;
    ++failed;
    std::cerr << "warning: " << row.pump_uw << " uW: " << row.error << '\n';
  }
  return failed == static_cast<int>(record.rows.size()) ? 2 : 0;
}

int run_fit(const fs::path& csv, const eia::ExternalOptions& options, const fs::path& out_dir,
            bool write_csv) {
  const auto metrics = eia::fit_external_spectrum(csv, options);
  std::cout << eia::metrics_report(metrics);
  if (write_csv) {
    eia::ScanResult r;
    r.metrics = metrics;
    auto out = open_in(out_dir, "metrics.csv");
    eia::write_metrics_csv(out, r);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  eia::tune_allocator();
  CLI::App app{"Magneto-optical EIA resonance simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", eia::tool_version());

  Overrides scan_o;
  std::string scan_out = "out";
  bool scan_slope = false;
  auto* scan = app.add_subcommand("scan", "single transmission profile vs field");
  add_model_flags(scan, scan_o);
  scan->add_option("--out", scan_out, "output directory");
  scan->add_flag("--background-slope", scan_slope, "fit a linear background");

  Overrides sweep_o;
  std::string sweep_out = "out";
  bool sweep_slope = false;
  auto* sweep = app.add_subcommand("sweep", "resonance metrics vs pump power");
  add_model_flags(sweep, sweep_o);
  sweep->add_option("--out", sweep_out, "output directory");
  sweep->add_flag("--background-slope", sweep_slope, "fit a linear background");

  std::string fit_csv;
  std::string fit_out;
  eia::ExternalOptions ext;
  auto* fit = app.add_subcommand("fit", "fit a measured two-column spectrum");
  fit->add_option("csv", fit_csv, "field,transmission CSV")->required()->check(CLI::ExistingFile);
  fit->add_flag("--column-swap", ext.column_swap, "columns are transmission,field");
  fit->add_flag("--background-slope", ext.fit.background_slope, "fit a linear background");
  fit->add_option("--field-scale", ext.field_scale, "multiplier converting the field column to mG");
  fit->add_option("--reference", ext.reference, "divide raw transmission by this input level");
  fit->add_option("--out", fit_out, "directory for metrics.csv");

  Overrides const_o;
  auto* constants = app.add_subcommand("constants", "dipole elements, branching and Zeeman constants");
  constants->add_option("--config", const_o.config_path, "INI config file")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*scan) return run_scan(scan_o, scan_out, scan_slope);
    if (*sweep) return run_sweep(sweep_o, sweep_out, sweep_slope);
    if (*fit) return run_fit(fit_csv, ext, fit_out, !fit_out.empty());
    if (*constants) {
      std::cout << eia::constants_report(resolve(const_o));
      return 0;
    }
  } catch (const eia::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const eia::InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 1;
  } catch (const eia::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
