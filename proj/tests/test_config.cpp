#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "eia/config.hpp"
#include "eia/errors.hpp"

using namespace eia;

namespace {

std::string key_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "<accepted>";
}

}  // namespace

TEST_CASE("empty config resolves to the reference defaults") {
  const auto c = parse_config("");
  CHECK(c == default_config());
  CHECK(c.relaxation.branch_to_ground == doctest::Approx(5.0 / 6.0));
  CHECK(c.sweep_pump_powers.size() == 10);
  CHECK(c.sweep_pump_powers.back() == 390.0);
  CHECK(c.probe_power_uw == 3.5);
}

TEST_CASE("values override defaults") {
  const auto c = parse_config(
      "; comment\n"
      "[field]\npump_power_uw = 120\n"
      "[relaxation]\ngamma_transit = 0.002\n"
      "[optics]\nn_phase = 6\n"
      "[sweep]\npump_powers = 10, 20, 40\n");
  CHECK(c.pump_power_uw == 120.0);
  CHECK(c.relaxation.gamma_transit == 0.002);
  CHECK(c.n_phase == 6);
  CHECK(c.sweep_pump_powers == std::vector<double>{10.0, 20.0, 40.0});
}

TEST_CASE("domain violations name the key") {
  CHECK(key_of("[relaxation]\ngamma_transit = -1\n") == "relaxation.gamma_transit");
  CHECK(key_of("[relaxation]\ngamma_transit = 0\n") == "relaxation.gamma_transit");
  CHECK(key_of("[relaxation]\nbranch_to_ground = 1.5\n") == "relaxation.branch_to_ground");
  CHECK(key_of("[relaxation]\ngamma_opt = 0.1\n") == "relaxation.gamma_opt");
  CHECK(key_of("[field]\ncalibration_uw = 0\n") == "field.calibration_uw");
  CHECK(key_of("[optics]\nod = -2\n") == "optics.od");
  CHECK(key_of("[optics]\nn_phase = 2.5\n") == "optics.n_phase");
  CHECK(key_of("[optics]\nn_phase = 3\n") == "optics.n_phase");
  CHECK(key_of("[scan]\npoints = 0\n") == "scan.points");
  CHECK(key_of("[scan]\nb_min = 5\nb_max = 1\n") == "scan.b_max");
  CHECK(key_of("[sweep]\npump_powers = 10, 5\n") == "sweep.pump_powers");
  CHECK(key_of("[sweep]\npump_powers =\n") == "sweep.pump_powers");
  CHECK(key_of("[field]\npump_power_uw = abc\n") == "field.pump_power_uw");
  CHECK(key_of("[field]\npump_power_uw = nan\n") == "field.pump_power_uw");
}

TEST_CASE("unknown keys and sections are rejected") {
  CHECK(key_of("[field]\npump_pwr = 1\n") == "field.pump_pwr");
  CHECK(key_of("[lasers]\npump = 1\n") == "lasers");
  CHECK(key_of("stray = 1\n") == "stray");
}

TEST_CASE("syntax errors report the line number") {
  try {
    parse_config("[field]\npump_power_uw = 1\n[broken\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("dump and reload round trip exactly") {
  ExperimentConfig c = default_config();
  c.pump_power_uw = 123.456789012345678;
  c.relaxation.gamma_transit = 1.0 / 3.0 * 1e-3;
  c.pol_angle_probe_deg = 89.9;
  c.scan.points = 17;
  c.sweep_pump_powers = {0.1, 0.2, 1.0 / 7.0 + 1.0};
  CHECK(parse_config(dump_config(c)) == c);
  CHECK(parse_config(dump_config(default_config())) == default_config());
}

TEST_CASE("load_config reads files") {
  const auto path = std::filesystem::temp_directory_path() / "eia_config_test.ini";
  {
    std::ofstream out(path);
    out << "[optics]\nod = 2.5\n";
  }
  CHECK(load_config(path).od == 2.5);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_config(path), ConfigError);
}

TEST_CASE("scan grid") {
  ScanSpec s;
  s.b_min = -10.0;
  s.b_max = 10.0;
  s.points = 21;
  const auto g = s.grid();
  REQUIRE(g.size() == 21);
  CHECK(g.front() == -10.0);
  CHECK(g.back() == 10.0);
  CHECK(g[10] == 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(g[i] == -g[g.size() - 1 - i]);
  s.points = 1;
  CHECK(s.grid() == std::vector<double>{-10.0});
}

TEST_CASE("field parameters from powers and angles") {
  ExperimentConfig c = default_config();
  c.pump_power_uw = 4.0 * c.calibration_uw;
  const auto f = c.field_params(0.25);
  CHECK(f.rabi_pump == doctest::Approx(2.0));
  CHECK(f.pol_angle_pump == doctest::Approx(std::numbers::pi / 4));
  CHECK(f.pol_angle_probe == doctest::Approx(-3 * std::numbers::pi / 4));
  CHECK(f.spatial_phase == 0.25);
}
