#include "eia/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "eia/errors.hpp"
#include "eia/plot.hpp"

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#ifndef EIA_VERSION
#define EIA_VERSION "0.0.0"
#endif

namespace eia {
namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_cell(const std::string& cell, double& out) {
  const std::string t = trim(cell);
  if (t.empty()) return false;
  std::size_t used = 0;
  try {
    out = std::stod(t, &used);
  } catch (const std::exception&) {
    return false;
  }
  return used == t.size() && std::isfinite(out);
}

LinePlot sweep_plot(const RunRecord& record, const std::string& title, const std::string& y_label,
                    double ResonanceMetrics::*field) {
  LineSeries s;
  for (const auto& row : record.rows) {
    s.x.push_back(row.pump_uw);
    s.y.push_back(row.metrics ? (*row.metrics).*field : std::numeric_limits<double>::quiet_NaN());
  }
  return LinePlot{title, "pump power (uW)", y_label, {s}};
}

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  std::ostringstream out;
  out << std::setprecision(9) << value;
  return out.str();
}

std::string tool_version() { return EIA_VERSION; }

void tune_allocator() {
#if defined(__GLIBC__)
  // Each steady-state solve allocates several multi-megabyte matrices; served by
  // mmap they cost a page-fault storm per solve.
  mallopt(M_MMAP_THRESHOLD, 256 << 20);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

ScanResult run_scan(const ExperimentConfig& config, const std::vector<double>& grid,
                    const FitOptions& options) {
  ScanResult result;
  result.profile = scan_field(config, grid, config.n_phase);
  try {
    result.metrics = analyze_resonance(result.profile.b_grid, result.profile.transmission, options,
                                       config.magnetic.zeeman_ground);
  } catch (const NumericalError& err) {
    result.metrics_error = err.what();
  } catch (const InputError& err) {
    result.metrics_error = err.what();
  }
  return result;
}

void write_profile_csv(std::ostream& out, const AbsorptionProfile& profile) {
  out << kProfileHeader << '\n';
  for (std::size_t i = 0; i < profile.size(); ++i) {
    out << format_number(profile.b_grid[i]) << ',' << format_number(profile.alpha[i]) << ','
        << format_number(profile.transmission[i]) << '\n';
  }
}

void write_metrics_csv(std::ostream& out, const ScanResult& result) {
  out << "key,value\n";
  if (!result.metrics) {
    out << "error," << result.metrics_error << '\n';
    return;
  }
  const auto& m = *result.metrics;
  const std::pair<const char*, double> rows[] = {
      {"contrast_c", m.contrast_c},       {"contrast_rel", m.contrast_rel},
      {"fwhm_mg", m.fwhm_mg},             {"fwhm_khz", m.fwhm_khz},
      {"t_back", m.fit.t_back},           {"t_0", m.fit.t_0()},
      {"t_min_raw", m.t_min_raw},         {"amplitude", m.fit.amplitude},
      {"center_mg", m.fit.center},        {"slope_per_mg", m.fit.slope},
      {"residual_rms", m.fit.residual_rms},
  };
  for (const auto& [key, value] : rows) out << key << ',' << format_number(value) << '\n';
  out << "converged," << (m.fit.converged ? "true" : "false") << '\n';
  out << "iterations," << m.fit.iterations << '\n';
}

std::string metrics_report(const ResonanceMetrics& m) {
  std::ostringstream out;
  out << "contrast C      " << format_number(m.contrast_c) << " %\n"
      << "contrast C_rel  " << format_number(m.contrast_rel) << " %\n"
      << "FWHM            " << format_number(m.fwhm_mg) << " mG ("
      << format_number(m.fwhm_khz) << " kHz)\n"
      << "T_back / T_0    " << format_number(m.fit.t_back) << " / " << format_number(m.fit.t_0())
      << " (raw min " << format_number(m.t_min_raw) << ")\n"
      << "center          " << format_number(m.fit.center) << " mG\n"
      << "residual rms    " << format_number(m.fit.residual_rms)
      << (m.fit.converged ? "" : "  (fit did not converge)") << '\n';
  return out.str();
}

SweepSpec SweepSpec::from_config(const ExperimentConfig& config) {
  SweepSpec spec;
  spec.pump_powers = config.sweep_pump_powers;
  spec.probe_power_uw = config.probe_power_uw;
  spec.scan = config.scan;
  spec.base = config;
  return spec;
}

void SweepSpec::validate() const {
  if (pump_powers.empty()) throw ConfigError("sweep.pump_powers must be nonempty", "sweep.pump_powers");
  for (std::size_t i = 0; i < pump_powers.size(); ++i) {
    if (!(pump_powers[i] >= 0.0) || (i > 0 && !(pump_powers[i] > pump_powers[i - 1]))) {
      throw ConfigError("sweep.pump_powers must be nonnegative and strictly increasing",
                        "sweep.pump_powers");
    }
  }
  if (!(probe_power_uw > 0.0)) throw ConfigError("field.probe_power_uw must be > 0", "field.probe_power_uw");
  if (scan.points < 8) throw ConfigError("scan.points must be >= 8 for a sweep", "scan.points");
  if (!(scan.b_max > scan.b_min)) throw ConfigError("scan.b_max must exceed scan.b_min", "scan.b_max");
}

RunRecord run_power_sweep(const SweepSpec& spec, const FitOptions& options) {
  spec.validate();
  RunRecord record;
  record.config = spec.base;
  record.config.sweep_pump_powers = spec.pump_powers;
  record.config.probe_power_uw = spec.probe_power_uw;
  record.config.scan = spec.scan;
  validate_config(record.config);
  record.version = tool_version();
  record.timestamp = utc_timestamp();

  const auto grid = spec.scan.grid();
  for (double power : spec.pump_powers) {
    SweepRow row;
    row.pump_uw = power;
    ExperimentConfig c = record.config;
    c.pump_power_uw = power;
    try {
      ScanResult r = run_scan(c, grid, options);
      row.profile = std::move(r.profile);
      row.metrics = std::move(r.metrics);
      row.error = std::move(r.metrics_error);
    } catch (const NumericalError& err) {
      row.error = err.what();
    }
    record.rows.push_back(std::move(row));
  }
  return record;
}

void write_sweep_csv(std::ostream& out, const RunRecord& record) {
  out << kSweepHeader << '\n';
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& row : record.rows) {
    const bool ok = row.metrics.has_value();
    const ResonanceMetrics m = ok ? *row.metrics : ResonanceMetrics{};
    // Background taken under the dip center, the same convention the contrasts use.
    const double t_back = m.fit.t_back + m.fit.slope * (m.fit.center - m.fit.b_ref);
    out << format_number(row.pump_uw) << ',' << format_number(ok ? m.fwhm_mg : nan) << ','
        << format_number(ok ? m.fwhm_khz : nan) << ',' << format_number(ok ? m.contrast_c : nan)
        << ',' << format_number(ok ? m.contrast_rel : nan) << ','
        << format_number(ok ? t_back : nan) << ','
        << format_number(ok ? t_back - m.fit.amplitude : nan) << '\n';
  }
}

void write_sweep_profiles_csv(std::ostream& out, const RunRecord& record) {
  out << "pump_uW," << kProfileHeader << '\n';
  for (const auto& row : record.rows) {
    const auto& p = row.profile;
    for (std::size_t i = 0; i < p.size(); ++i) {
      out << format_number(row.pump_uw) << ',' << format_number(p.b_grid[i]) << ','
          << format_number(p.alpha[i]) << ',' << format_number(p.transmission[i]) << '\n';
    }
  }
}

void write_run_record(std::ostream& out, const RunRecord& record) {
  out << "; eia " << record.version << '\n';
  out << "; generated " << record.timestamp << '\n';
  for (const auto& row : record.rows) {
    if (!row.error.empty()) out << "; row " << format_number(row.pump_uw) << " uW failed: " << row.error << '\n';
  }
  out << dump_config(record.config);
}

void write_sweep_plots(const RunRecord& record, const std::filesystem::path& dir) {
  open_output(dir / "width.svg")
      << render_svg(sweep_plot(record, "EIA width vs pump power", "FWHM (mG)",
                               &ResonanceMetrics::fwhm_mg));
  open_output(dir / "contrast_c.svg")
      << render_svg(sweep_plot(record, "Contrast C vs pump power", "C (%)",
                               &ResonanceMetrics::contrast_c));
  open_output(dir / "contrast_rel.svg")
      << render_svg(sweep_plot(record, "Relative contrast vs pump power", "C_rel (%)",
                               &ResonanceMetrics::contrast_rel));
}

void write_sweep_outputs(const RunRecord& record, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto sweep = open_output(dir / "sweep.csv");
  write_sweep_csv(sweep, record);
  auto profiles = open_output(dir / "profiles.csv");
  write_sweep_profiles_csv(profiles, record);
  auto rec = open_output(dir / "record.ini");
  write_run_record(rec, record);
  write_sweep_plots(record, dir);
}

ExternalSpectrum read_spectrum_csv(std::istream& in, const ExternalOptions& options) {
  if (!(options.field_scale != 0.0 && std::isfinite(options.field_scale))) {
    throw InputError("field scale must be finite and nonzero");
  }
  std::vector<std::pair<double, double>> points;
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty() || trim(line).front() == '#') continue;
    const auto comma = line.find(',');
    const bool two_cells = comma != std::string::npos && line.find(',', comma + 1) == std::string::npos;
    double a = 0.0;
    double b = 0.0;
    const bool numeric =
        two_cells && parse_cell(line.substr(0, comma), a) && parse_cell(line.substr(comma + 1), b);
    if (!numeric) {
      if (points.empty() && row == 1 && two_cells) continue;  // header
      throw InputError("row " + std::to_string(row) + ": expected two numeric columns, got '" +
                       trim(line) + "'");
    }
    if (options.column_swap) std::swap(a, b);
    if (options.reference > 0.0) b /= options.reference;
    points.emplace_back(a * options.field_scale, b);
  }
  if (points.empty()) throw InputError("spectrum has no data rows");
  std::stable_sort(points.begin(), points.end(),
                   [](const auto& x, const auto& y) { return x.first < y.first; });

  ExternalSpectrum s;
  for (const auto& [b, t] : points) {
    if (!s.b_mg.empty() && b == s.b_mg.back()) throw InputError("duplicate field value " + format_number(b));
    s.b_mg.push_back(b);
    s.transmission.push_back(t);
  }
  return s;
}

ResonanceMetrics fit_external_spectrum(const std::filesystem::path& csv_path,
                                       const ExternalOptions& options) {
  std::ifstream in(csv_path);
  if (!in) throw InputError("cannot read " + csv_path.string());
  const ExternalSpectrum s = read_spectrum_csv(in, options);
  return analyze_resonance(s.b_mg, s.transmission, options.fit);
}

std::string constants_report(const ExperimentConfig& config) {
  std::ostringstream out;
  out << "# dipole elements <Fe=1 me| d_q |Fg=2 mg> (reduced element = 1)\n";
  out << "mg,me,q,d\n";
  for (const auto& g : LevelScheme::ground_sublevels()) {
    for (const auto& e : LevelScheme::excited_sublevels()) {
      const int q = e.m - g.m;
      if (q < -1 || q > 1) continue;
      out << g.m << ',' << e.m << ',' << q << ',' << format_number(dipole_element(g, e, q)) << '\n';
    }
  }
  out << "# branching ratios from Fe=1\n";
  out << "to_fg1," << format_number(branching_ratio(1, 1)) << '\n';
  out << "to_fg2," << format_number(branching_ratio(1, 2)) << '\n';
  out << "# Zeeman constants\n";
  out << "ground_khz_per_mg," << format_number(config.magnetic.zeeman_ground) << '\n';
  out << "excited_khz_per_mg," << format_number(config.magnetic.zeeman_excited) << '\n';
  out << "linewidth_khz," << format_number(config.magnetic.linewidth_khz) << '\n';
  return out.str();
}

}  // namespace eia
