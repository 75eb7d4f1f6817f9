#include "eia/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>

#include "eia/errors.hpp"

namespace eia {
namespace {

namespace pt = boost::property_tree;

std::string format_double(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

double parse_double(const std::string& text, const std::string& key) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + text + "'", key);
  }
  while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) ++used;
  if (used != text.size() || !std::isfinite(v)) {
    throw ConfigError(key + ": expected a finite number, got '" + text + "'", key);
  }
  return v;
}

int parse_int(const std::string& text, const std::string& key) {
  const double v = parse_double(text, key);
  if (v != std::floor(v) || std::abs(v) > 1e9) {
    throw ConfigError(key + ": expected an integer, got '" + text + "'", key);
  }
  return static_cast<int>(v);
}

std::vector<double> parse_list(const std::string& text, const std::string& key) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    out.push_back(parse_double(item.substr(first), key));
  }
  return out;
}

std::string format_list(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += format_double(values[i]);
  }
  return out;
}

// One entry per accepted key: how to read it and how to print it.
struct KeyBinding {
  std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <typename Member>
KeyBinding bind_double(Member member) {
  return {[member](ExperimentConfig& c, const std::string& text, const std::string& key) {
            std::invoke(member, c) = parse_double(text, key);
          },
          [member](const ExperimentConfig& c) {
            return format_double(std::invoke(member, const_cast<ExperimentConfig&>(c)));
          }};
}

const std::vector<std::pair<std::string, std::vector<std::pair<std::string, KeyBinding>>>>&
schema() {
  using C = ExperimentConfig;
  static const std::vector<std::pair<std::string, std::vector<std::pair<std::string, KeyBinding>>>>
      kSchema = {
          {"field",
           {
               {"pump_power_uw", bind_double([](C& c) -> double& { return c.pump_power_uw; })},
               {"probe_power_uw", bind_double([](C& c) -> double& { return c.probe_power_uw; })},
               {"calibration_uw", bind_double([](C& c) -> double& { return c.calibration_uw; })},
               {"pol_angle_pump_deg",
                bind_double([](C& c) -> double& { return c.pol_angle_pump_deg; })},
               {"pol_angle_probe_deg",
                bind_double([](C& c) -> double& { return c.pol_angle_probe_deg; })},
               {"one_photon_detuning",
                bind_double([](C& c) -> double& { return c.one_photon_detuning; })},
           }},
          {"magnetic",
           {
               {"b_transverse",
                bind_double([](C& c) -> double& { return c.magnetic.b_transverse; })},
               {"zeeman_ground",
                bind_double([](C& c) -> double& { return c.magnetic.zeeman_ground; })},
               {"zeeman_excited",
                bind_double([](C& c) -> double& { return c.magnetic.zeeman_excited; })},
               {"linewidth_khz",
                bind_double([](C& c) -> double& { return c.magnetic.linewidth_khz; })},
           }},
          {"relaxation",
           {
               {"gamma", bind_double([](C& c) -> double& { return c.relaxation.gamma; })},
               {"gamma_opt", bind_double([](C& c) -> double& { return c.relaxation.gamma_opt; })},
               {"gamma_e_depol",
                bind_double([](C& c) -> double& { return c.relaxation.gamma_e_depol; })},
               {"gamma_transit",
                bind_double([](C& c) -> double& { return c.relaxation.gamma_transit; })},
               {"branch_to_ground",
                bind_double([](C& c) -> double& { return c.relaxation.branch_to_ground; })},
               {"refill_ground_fraction",
                bind_double([](C& c) -> double& { return c.relaxation.refill_ground_fraction; })},
               {"gamma_diffusion",
                bind_double([](C& c) -> double& { return c.relaxation.gamma_diffusion; })},
           }},
          {"optics",
           {
               {"od", bind_double([](C& c) -> double& { return c.od; })},
               {"n_phase",
                {[](C& c, const std::string& t, const std::string& k) { c.n_phase = parse_int(t, k); },
                 [](const C& c) { return std::to_string(c.n_phase); }}},
           }},
          {"scan",
           {
               {"b_min", bind_double([](C& c) -> double& { return c.scan.b_min; })},
               {"b_max", bind_double([](C& c) -> double& { return c.scan.b_max; })},
               {"points",
                {[](C& c, const std::string& t, const std::string& k) {
                   c.scan.points = parse_int(t, k);
                 },
                 [](const C& c) { return std::to_string(c.scan.points); }}},
           }},
          {"sweep",
           {
               {"pump_powers",
                {[](C& c, const std::string& t, const std::string& k) {
                   c.sweep_pump_powers = parse_list(t, k);
                 },
                 [](const C& c) { return format_list(c.sweep_pump_powers); }}},
           }},
      };
  return kSchema;
}

}  // namespace

std::vector<double> ScanSpec::grid() const {
  if (points < 1) throw InputError("scan needs at least one point");
  if (points == 1) return {b_min};
  std::vector<double> out(points);
  const double step = (b_max - b_min) / (points - 1);
  for (int i = 0; i < points; ++i) out[i] = b_min + step * i;
  // Mirror the upper half so symmetric scans are exactly symmetric.
  if (b_min == -b_max) {
    for (int i = 0; i < points / 2; ++i) out[points - 1 - i] = -out[i];
    if (points % 2 == 1) out[points / 2] = 0.0;
  }
  return out;
}

FieldParams ExperimentConfig::field_params(double spatial_phase) const {
  constexpr double kDeg = std::numbers::pi / 180.0;
  return FieldParams{
      .rabi_pump = power_to_rabi(pump_power_uw, calibration_uw),
      .rabi_probe = power_to_rabi(probe_power_uw, calibration_uw),
      .pol_angle_pump = pol_angle_pump_deg * kDeg,
      .pol_angle_probe = pol_angle_probe_deg * kDeg,
      .spatial_phase = spatial_phase,
      .one_photon_detuning = one_photon_detuning,
  };
}

std::vector<double> default_sweep_powers() {
  std::vector<double> out;
  for (int i = 1; i <= 10; ++i) out.push_back(39.0 * i);
  return out;
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.relaxation.branch_to_ground = branching_ratio(1, 2);
  // Weak excited-state depolarization keeps the dip close to Lorentzian.
  c.relaxation.gamma_e_depol = 1.0;
  c.sweep_pump_powers = default_sweep_powers();
  return c;
}

void validate_config(const ExperimentConfig& c) {
  auto require = [](bool ok, const std::string& key, const std::string& rule) {
    if (!ok) throw ConfigError(key + " " + rule, key);
  };
  require(c.pump_power_uw >= 0.0, "field.pump_power_uw", "must be >= 0");
  require(c.probe_power_uw > 0.0, "field.probe_power_uw", "must be > 0");
  require(c.calibration_uw > 0.0, "field.calibration_uw", "must be > 0");
  require(c.magnetic.linewidth_khz > 0.0, "magnetic.linewidth_khz", "must be > 0");
  require(c.relaxation.gamma > 0.0, "relaxation.gamma", "must be > 0");
  require(c.relaxation.gamma_opt >= 0.5 * c.relaxation.gamma, "relaxation.gamma_opt",
          "must be >= gamma/2");
  require(c.relaxation.gamma_e_depol >= 0.0, "relaxation.gamma_e_depol", "must be >= 0");
  require(c.relaxation.gamma_transit > 0.0, "relaxation.gamma_transit", "must be > 0");
  require(c.relaxation.branch_to_ground >= 0.0 && c.relaxation.branch_to_ground <= 1.0,
          "relaxation.branch_to_ground", "must lie in [0, 1]");
  require(c.relaxation.refill_ground_fraction >= 0.0 && c.relaxation.refill_ground_fraction <= 1.0,
          "relaxation.refill_ground_fraction", "must lie in [0, 1]");
  require(c.relaxation.gamma_diffusion >= 0.0, "relaxation.gamma_diffusion", "must be >= 0");
  require(c.od > 0.0, "optics.od", "must be > 0");
  // B -> -B mirrors the lattice phase by half a period, so only even grids keep alpha even in B.
  require(c.n_phase >= 2 && c.n_phase % 2 == 0, "optics.n_phase", "must be even and >= 2");
  require(c.scan.points >= 1, "scan.points", "must be >= 1");
  require(c.scan.points == 1 || c.scan.b_max > c.scan.b_min, "scan.b_max", "must exceed scan.b_min");
  require(!c.sweep_pump_powers.empty(), "sweep.pump_powers", "must be nonempty");
  for (std::size_t i = 0; i < c.sweep_pump_powers.size(); ++i) {
    require(c.sweep_pump_powers[i] >= 0.0, "sweep.pump_powers", "must be >= 0");
    require(i == 0 || c.sweep_pump_powers[i] > c.sweep_pump_powers[i - 1], "sweep.pump_powers",
            "must be strictly increasing");
  }
}

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& err) {
    std::ostringstream msg;
    msg << "config parse error at line " << err.line() << ": " << err.message();
    throw ConfigError(msg.str());
  }

  ExperimentConfig config = default_config();
  for (const auto& [section, entries] : tree) {
    if (entries.empty()) {
      throw ConfigError("key '" + section + "' must belong to a [section]", section);
    }
    const auto& sections = schema();
    auto sec = std::find_if(sections.begin(), sections.end(),
                            [&](const auto& s) { return s.first == section; });
    if (sec == sections.end()) throw ConfigError("unknown section [" + section + "]", section);
    for (const auto& [key, value] : entries) {
      const std::string path = section + "." + key;
      auto binding = std::find_if(sec->second.begin(), sec->second.end(),
                                  [&](const auto& b) { return b.first == key; });
      if (binding == sec->second.end()) throw ConfigError("unknown key " + path, path);
      binding->second.set(config, value.data(), path);
    }
  }
  validate_config(config);
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string dump_config(const ExperimentConfig& config) {
  std::ostringstream out;
  bool first = true;
  for (const auto& [section, keys] : schema()) {
    if (!first) out << '\n';
    first = false;
    out << '[' << section << "]\n";
    for (const auto& [key, binding] : keys) out << key << " = " << binding.get(config) << '\n';
  }
  return out.str();
}

}  // namespace eia
