#include "tbg/config.hpp"
#include "tbg/errors.hpp"
#include "tbg/fit.hpp"
#include "tbg/output.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

using namespace tbg;

TEST_CASE("key-value parsing") {
  const auto kv = parse_key_values("# comment\nlattice.theta_deg = 2.0\n  scaling.eps = 0.1, 0.2 # trailing\n\n");
  CHECK(kv.at("lattice.theta_deg") == "2.0");
  CHECK(kv.at("scaling.eps") == "0.1, 0.2");
  CHECK_THROWS_AS(parse_key_values("novalue\n"), ConfigError);
  CHECK_THROWS_AS(parse_key_values("nosection = 1\n"), ConfigError);
}

TEST_CASE("config application") {
  RunConfig c = RunConfig::preset_named("desk");
  c.apply({{"lattice.theta_deg", "2"},
           {"wavepacket.epsilon", "0.2"},
           {"wavepacket.sigma_units", "lattice"},
           {"scaling.theta_deg", "1,2"}});
  CHECK(c.lattice.theta == doctest::Approx(2.0 * std::numbers::pi / 180.0));
  CHECK(c.wavepacket.sigma_r == doctest::Approx(12.5));
  CHECK(c.scaling.theta_deg.size() == 2);
  CHECK_THROWS_AS(c.apply({{"lattice.colour", "red"}}), ConfigError);
  CHECK_THROWS_AS(c.apply({{"lattice.a", "abc"}}), ConfigError);
  CHECK_THROWS_AS(RunConfig::preset_named("huge"), ConfigError);
  const RunConfig paper = RunConfig::preset_named("paper");
  CHECK(paper.truncation.reference_radius == doctest::Approx(86.60));
}

TEST_CASE("derived mode ties the continuum model to the lattice") {
  const RunConfig c = RunConfig::preset_named("desk");
  const BmParams bm = c.bm_params();
  CHECK(bm.v == doctest::Approx(1.5 * c.hopping.t0 * c.lattice.delta()));
  const std::string j = c.to_json();
  CHECK(j.find("\"K_m\"") != std::string::npos);
  CHECK(j.find('\n') == std::string::npos);
}

TEST_CASE("grid sizing") {
  const RunConfig c;
  const Grid g = c.grid_for(50.0);
  CHECK(g.n % 2 == 0);
  CHECK(g.box >= 100.0);
  CHECK(g.spacing() == doctest::Approx(c.grid_spacing));
}

TEST_CASE("coefficient patterns share one norm") {
  for (int p = 0; p < 4; ++p) {
    double s = 0.0;
    for (auto z : coefficient_pattern(p)) s += std::norm(z);
    CHECK(s == doctest::Approx(1.0));
  }
  CHECK_THROWS_AS(coefficient_pattern(4), ConfigError);
}

TEST_CASE("line fits") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  std::vector<double> y;
  for (double v : x) y.push_back(2.0 * v + 1.0);
  const LineFit f = fit_line(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercepts[0] == doctest::Approx(1.0));
  CHECK(f.r_squared == doctest::Approx(1.0));

  // power law with two groups of different prefactor
  std::vector<double> xs, ys;
  std::vector<int> gs;
  for (int g = 0; g < 2; ++g)
    for (double v : {1.0, 2.0, 4.0, 8.0}) {
      xs.push_back(v);
      ys.push_back((g + 1) * 3.0 * std::pow(v, 0.92) * (1.0 + 0.01 * std::sin(7 * v + g)));
      gs.push_back(g);
    }
  const LineFit p = fit_loglog(xs, ys, gs);
  CHECK(p.slope == doctest::Approx(0.92).epsilon(0.02));
  CHECK(p.slope_ci95 > 0.0);
  CHECK(p.slope_ci95 < 0.05);
  CHECK(std::exp(p.intercepts[1] - p.intercepts[0]) == doctest::Approx(2.0).epsilon(0.02));
  CHECK_THROWS_AS(fit_loglog({1.0, -1.0}, {1.0, 2.0}), PreconditionError);

  const LineFit e = fit_loglinear({10, 20, 30}, {std::exp(-1.0), std::exp(-2.0), std::exp(-3.0)});
  CHECK(e.slope == doctest::Approx(-0.1));
}

TEST_CASE("csv metadata header and manifest") {
  const auto dir = std::filesystem::temp_directory_path() / "tbg_unit_output";
  std::filesystem::remove_all(dir);
  const std::string meta = metadata_json(RunConfig().to_json(), {{"t", 2.5}});
  {
    CsvWriter w(dir / "x.csv", meta, {"a", "b"});
    w.row({1.0, std::string("q,r")});
    CHECK_THROWS_AS(w.row({1.0}), DimensionMismatchError);
  }
  std::ifstream in(dir / "x.csv");
  std::string first, second, third;
  std::getline(in, first);
  std::getline(in, second);
  std::getline(in, third);
  CHECK(first.rfind("# metadata: {", 0) == 0);
  CHECK(first.find("\"t\":2.5") != std::string::npos);
  CHECK(second == "a,b");
  CHECK(third == "1,\"q,r\"");
  Manifest m("unit", RunConfig().to_json());
  m.add_file(dir / "x.csv", "test");
  m.set("n", 3LL);
  m.write(dir);
  CHECK(std::filesystem::exists(dir / "run.json"));
  CHECK(time_label(4.0) == "4");
  CHECK(time_label(2.5) == "2.5");
}
