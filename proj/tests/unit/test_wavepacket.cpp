#include "tbg/errors.hpp"
#include "tbg/wavepacket.hpp"

#include <doctest.h>

#include <numbers>

using namespace tbg;

namespace {
constexpr double kPi = std::numbers::pi;
LatticeParams paper() { return {2.5, 1.05 * kPi / 180.0, 3.5}; }
}  // namespace

TEST_CASE("matched initial condition") {
  const LatticeParams lp = paper();
  const BmParams bm = BmParams::make(6.6, 0.11, lp);
  auto table = std::make_shared<const SiteTable>(enumerate_sites(lp, 40.0));
  WavepacketSpec spec;
  spec.sigma_r = 6.0;
  const Grid g{104.0, 52};
  const InitialCondition ic = make_initial(spec, bm, g, table);
  CHECK(ic.psi.norm() == doctest::Approx(1.0));
  // the lattice norm is the continuum estimate of the envelope mass
  CHECK(ic.scale == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(comparison_error(ic.psi, ic.envelope) < 1e-12);
  // fit back from the lattice
  const Envelope back = lattice_to_envelope(ic.psi, g);
  CHECK(comparison_error(ic.psi, back) < 1e-4);
}

TEST_CASE("containment is enforced") {
  const BmParams bm = BmParams::make(6.6, 0.11, paper());
  WavepacketSpec spec;
  spec.sigma_r = 10.0;
  CHECK_THROWS_AS(make_envelope(spec, bm, Grid{60.0, 30}, paper().cell_area()), ContainmentError);
  auto table = std::make_shared<const SiteTable>(enumerate_sites(paper(), 80.0));
  const Envelope f = make_envelope(spec, bm, Grid{132.0, 66}, paper().cell_area());
  CHECK_THROWS_AS(sample_envelope(f, table), PreconditionError);
}

TEST_CASE("sigma conventions") {
  CHECK(sigma_from_epsilon(0.1, SigmaUnits::Angstrom, 2.5) == doctest::Approx(10.0));
  CHECK(sigma_from_epsilon(0.1, SigmaUnits::LatticeConstant, 2.5) == doctest::Approx(25.0));
  CHECK_THROWS_AS(sigma_from_epsilon(0.0, SigmaUnits::Angstrom, 2.5), PreconditionError);
  CHECK(parse_packet_kind("band") == PacketKind::BandConcentrated);
  CHECK_THROWS_AS(parse_packet_kind("plane"), ConfigError);
}

TEST_CASE("radially symmetric static state has no angular momentum") {
  const BmParams bm = BmParams::make(6.6, 0.11, paper());
  WavepacketSpec spec;
  spec.sigma_r = 8.0;
  const Envelope f = make_envelope(spec, bm, Grid{112.0, 56}, paper().cell_area());
  CHECK(std::abs(angular_momentum(f)) < 1e-12);
}

TEST_CASE("angular momentum of a vortex") {
  const Grid g{96.0, 96};
  Envelope f = Envelope::zeros(g);
  for (int iy = 0; iy < g.n; ++iy)
    for (int ix = 0; ix < g.n; ++ix) {
      const double x = g.coord(ix), y = g.coord(iy);
      f.comp[2][static_cast<Eigen::Index>(g.index(ix, iy))] =
          std::complex<double>(x, y) * std::exp(-(x * x + y * y) / 40.0);
    }
  CHECK(angular_momentum(f) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("mirror is an involution") {
  const BmParams bm = BmParams::make(6.6, 0.11, paper());
  WavepacketSpec spec;
  spec.kind = PacketKind::BandConcentrated;
  spec.band = 3;
  spec.k = Vec2(0.0, -0.02);
  spec.cutoff = 3;
  spec.sigma_r = 10.0;
  const Envelope f = make_envelope(spec, bm, Grid{132.0, 66}, paper().cell_area());
  const Envelope m = mirror_envelope(f);
  CHECK(m.mass() == doctest::Approx(f.mass()));
  CHECK(angular_momentum(m) == doctest::Approx(-angular_momentum(f)).epsilon(1e-9));
  const Envelope mm = mirror_envelope(m);
  for (int c = 0; c < 4; ++c) CHECK((mm.comp[c] - f.comp[c]).norm() == 0.0);
}

TEST_CASE("disk restriction and tails") {
  const LatticeParams lp = paper();
  auto table = std::make_shared<const SiteTable>(enumerate_sites(lp, 20.0));
  LatticeState psi{table, Eigen::VectorXcd::Ones(static_cast<Eigen::Index>(table->size()))};
  const LatticeState cut = restrict_to_disk(psi, 10.0);
  CHECK(tail_norm(cut, 10.0) == 0.0);
  CHECK(tail_norm(psi, 10.0) > 0.0);
  CHECK(cut.norm() * cut.norm() + tail_norm(psi, 10.0) * tail_norm(psi, 10.0) == doctest::Approx(double(table->size())));
}
