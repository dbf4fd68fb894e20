#include "tbg/bounds.hpp"
#include "tbg/errors.hpp"
#include "tbg/geometry.hpp"

#include <doctest.h>

#include <algorithm>
#include <numbers>
#include <sstream>

using namespace tbg;

namespace {
constexpr double kPi = std::numbers::pi;
LatticeParams paper() { return {2.5, 1.05 * kPi / 180.0, 3.5}; }
}  // namespace

TEST_CASE("reciprocal bases are dual in both layers") {
  const BilayerBasis b = tbg_basis(paper());
  for (int j : {1, 2}) {
    const Mat2 prod = b.layer(j).A.transpose() * b.layer(j).B;
    CHECK((prod - 2.0 * kPi * Mat2::Identity()).norm() < 1e-12);
    CHECK(b.layer(j).K.norm() == doctest::Approx(4.0 * kPi / 7.5).epsilon(1e-12));
  }
}

TEST_CASE("layers are rotated by -theta/2 and +theta/2") {
  const LatticeParams lp = paper();
  const MonolayerBasis m = monolayer_basis(lp);
  const BilayerBasis b = tbg_basis(lp);
  CHECK((b.layer(1).K - rotation(-lp.theta / 2) * m.K).norm() < 1e-14);
  CHECK((b.layer(2).K - rotation(lp.theta / 2) * m.K).norm() < 1e-14);
}

TEST_CASE("moire data") {
  const LatticeParams lp = paper();
  const MoireData md = moire_data(lp);
  CHECK((md.K_m - (2.0 * md.b_m1 + md.b_m2) / 3.0).norm() < 1e-15);
  // |b_m| = sqrt(3) * 2 |K| sin(theta/2)
  CHECK(md.b_m1.norm() == doctest::Approx(std::sqrt(3.0) * std::abs(lp.delta_k())).epsilon(1e-12));
  CHECK(md.a_m1.dot(md.b_m1) == doctest::Approx(2.0 * kPi));
  CHECK(std::abs(md.a_m1.dot(md.b_m2)) < 1e-9);
  // moire period a / (2 sin(theta/2)) ~ 136.4 A at 1.05 degrees
  CHECK(md.a_m1.norm() == doctest::Approx(136.42).epsilon(1e-3));
  LatticeParams flat = lp;
  flat.theta = 0.0;
  CHECK_THROWS_AS(moire_data(flat), DegenerateAngleError);
}

TEST_CASE("site enumeration") {
  const LatticeParams lp = paper();
  const SiteTable t = enumerate_sites(lp, 30.0);
  CHECK(std::is_sorted(t.sites().begin(), t.sites().end()));
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(t.position(i).norm() <= 30.0 + 1e-12);
  // two sites per monolayer cell and two layers
  const double expected = 4.0 * kPi * 900.0 / lp.cell_area();
  CHECK(std::abs(double(t.size()) - expected) / expected < 0.03);
  const auto row = t.find(t.site(17));
  REQUIRE(row.has_value());
  CHECK(*row == 17);
  CHECK_FALSE(t.find(SiteIndex{1, Sublattice::A, 1000, 0}).has_value());
  CHECK(counting_bound(30.0, lp) >= static_cast<std::int64_t>(t.size()) / 2);

  std::ostringstream csv;
  write_sites_csv(enumerate_sites(lp, 3.0), csv);
  CHECK(csv.str().rfind("layer,sublattice,n1,n2,x,y", 0) == 0);
}

TEST_CASE("invalid lattice parameters") {
  LatticeParams lp = paper();
  lp.a = -1.0;
  CHECK_THROWS_AS(lp.validate(), PreconditionError);
  lp = paper();
  lp.theta = 2.0;
  CHECK_THROWS_AS(lp.validate(), PreconditionError);
}
