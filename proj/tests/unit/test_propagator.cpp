#include "tbg/errors.hpp"
#include "tbg/propagator.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace tbg;

namespace {

LatticeParams paper() { return {2.5, 1.05 * std::numbers::pi / 180.0, 3.5}; }

struct Fixture {
  std::shared_ptr<const SiteTable> table;
  SparseHermitian h;
  LatticeState psi;
};

Fixture small_system(double radius) {
  auto t = std::make_shared<const SiteTable>(enumerate_sites(paper(), radius));
  SparseHermitian h = assemble(t, HoppingModel{});
  LatticeState psi{t, Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(t->size()))};
  for (std::size_t i = 0; i < t->size(); ++i) {
    const Vec2 x = t->position(i);
    psi.amplitudes[static_cast<Eigen::Index>(i)] = std::exp(-x.squaredNorm() / 8.0) * std::polar(1.0, x.y());
  }
  psi.amplitudes.normalize();
  return {t, std::move(h), std::move(psi)};
}

}  // namespace

TEST_CASE("Bessel sequence matches the standard library") {
  for (double x : {0.5, 7.0, 40.0, -3.0}) {
    const auto j = bessel_j_sequence(x, 80);
    for (int k : {0, 1, 5, 20}) {
      double ref = std::cyl_bessel_j(double(k), std::abs(x));
      if (x < 0 && k % 2) ref = -ref;
      CHECK(j[static_cast<std::size_t>(k)] == doctest::Approx(ref).epsilon(1e-11));
    }
  }
}

TEST_CASE("Chebyshev degree grows like the argument") {
  const int d10 = chebyshev_degree(10.0, 1e-10, 100000);
  const int d100 = chebyshev_degree(100.0, 1e-10, 100000);
  CHECK(d10 > 10);
  CHECK(d100 > 100);
  CHECK(d100 < 200);
  CHECK_THROWS(chebyshev_degree(100.0, 1e-10, 20));
}

TEST_CASE("dense and Chebyshev propagation agree and are unitary") {
  Fixture f = small_system(9.0);
  PropagatorOptions cheb, dense;
  dense.method = PropagationMethod::DensePade;
  const auto a = evolve(f.h, f.psi, 3.0, cheb);
  const auto b = evolve(f.h, f.psi, 3.0, dense);
  CHECK((a.amplitudes - b.amplitudes).norm() < 1e-9);
  CHECK(std::abs(a.norm() - 1.0) < 1e-10);
  CHECK(energy(f.h, a) == doctest::Approx(energy(f.h, f.psi)).epsilon(1e-9));
  // backwards in time undoes the step
  const auto back = evolve(f.h, a, -3.0, cheb);
  CHECK((back.amplitudes - f.psi.amplitudes).norm() < 1e-9);
}

TEST_CASE("snapshots match direct evolution") {
  Fixture f = small_system(8.0);
  PropagatorOptions o;
  o.snapshot_times = {0.0, 0.5, 2.0};
  const auto s = evolve_snapshots(f.h, f.psi, o);
  REQUIRE(s.size() == 3);
  CHECK((s[0].amplitudes - f.psi.amplitudes).norm() == 0.0);
  CHECK((s[2].amplitudes - evolve(f.h, f.psi, 2.0, o).amplitudes).norm() < 1e-9);
  o.snapshot_times = {1.0, 0.5};
  CHECK_THROWS_AS(evolve_snapshots(f.h, f.psi, o), PreconditionError);
}

TEST_CASE("zero extension") {
  Fixture f = small_system(6.0);
  auto big = std::make_shared<const SiteTable>(enumerate_sites(paper(), 9.0));
  const LatticeState e = extend_to(f.psi, big);
  CHECK(e.size() == big->size());
  CHECK(e.norm() == doctest::Approx(f.psi.norm()));
  auto small = std::make_shared<const SiteTable>(enumerate_sites(paper(), 3.0));
  CHECK_THROWS_AS(extend_to(f.psi, small), DimensionMismatchError);
}

TEST_CASE("option validation") {
  PropagatorOptions o;
  o.tol = 0.5;
  CHECK_THROWS_AS(o.validate(), PreconditionError);
  CHECK(parse_method("chebyshev") == PropagationMethod::Chebyshev);
  CHECK_THROWS(parse_method("krylov-ish"));
}
