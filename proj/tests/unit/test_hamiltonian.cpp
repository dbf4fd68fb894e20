#include "tbg/errors.hpp"
#include "tbg/hamiltonian.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace tbg;

namespace {
constexpr double kPi = std::numbers::pi;
LatticeParams paper() { return {2.5, 1.05 * kPi / 180.0, 3.5}; }

// Radial Simpson quadrature of the kernel against J0.
double transform_by_quadrature(const HoppingModel& m, double xi) {
  const int n = 100000;
  const double h = 60.0 / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double r = i * h;
    const double f = m.kernel(r) * std::cyl_bessel_j(0.0, xi * r) * r;
    s += f * (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0));
  }
  return 2.0 * kPi * s * h / 3.0;
}
}  // namespace

TEST_CASE("interlayer Fourier transform matches quadrature") {
  const HoppingModel m;
  for (double xi : {0.0, 0.5, 4.0 * kPi / 7.5, 2.5})
    CHECK(hopping_fourier(xi, m) == doctest::Approx(transform_by_quadrature(m, xi)).epsilon(1e-8));
  // frozen: w = h_hat(|K|) / |Gamma| for the default model
  const LatticeParams lp = paper();
  CHECK(hopping_fourier(lp.dirac_norm(), m) / lp.cell_area() == doctest::Approx(0.1100000909).epsilon(1e-8));
}

TEST_CASE("assembled operator is Hermitian with nearest-neighbour hops") {
  const HoppingModel m;
  auto t = std::make_shared<const SiteTable>(enumerate_sites(paper(), 9.0));
  const SparseHermitian h = assemble(t, m);
  const Eigen::MatrixXcd d = h.to_dense();
  CHECK((d - d.adjoint()).norm() < 1e-14);
  // every intralayer nonzero is -t0 and each interior site has three of them
  const BilayerBasis b = tbg_basis(paper());
  const SiteIndex a{1, Sublattice::A, 0, 0};
  int neighbours = 0;
  for (int n1 = -2; n1 <= 2; ++n1)
    for (int n2 = -2; n2 <= 2; ++n2) {
      const cplx v = intralayer_element(a, SiteIndex{1, Sublattice::B, n1, n2}, b, m, paper());
      if (v != 0.0) {
        ++neighbours;
        CHECK(v.real() == doctest::Approx(-m.t0));
      }
    }
  CHECK(neighbours == 3);
  CHECK_THROWS_AS(intralayer_element(a, SiteIndex{2, Sublattice::A, 0, 0}, b, m, paper()), PreconditionError);
}

TEST_CASE("matvec agrees with the dense matrix") {
  auto t = std::make_shared<const SiteTable>(enumerate_sites(paper(), 10.0));
  const SparseHermitian h = assemble(t, HoppingModel{});
  Eigen::VectorXcd x = Eigen::VectorXcd::Random(static_cast<Eigen::Index>(t->size()));
  CHECK((h * x - h.to_dense() * x).norm() < 1e-12);
}

TEST_CASE("spectral half-width contains the spectrum") {
  const HoppingModel m;
  auto t = std::make_shared<const SiteTable>(enumerate_sites(paper(), 10.0));
  const SparseHermitian h = assemble(t, m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h.to_dense());
  const double emax = es.eigenvalues().cwiseAbs().maxCoeff();
  CHECK(emax <= spectral_half_width(h, m));
  CHECK(emax <= h.max_row_sum());
  CHECK(dropped_mass_bound(m, paper()) > 0.0);
  CHECK(dropped_mass_bound(m, paper()) < 0.05);
}

TEST_CASE("coordinate dump header") {
  auto t = std::make_shared<const SiteTable>(enumerate_sites(paper(), 4.0));
  const SparseHermitian h = assemble(t, HoppingModel{});
  std::ostringstream os;
  write_coordinate(h, os);
  std::istringstream is(os.str());
  char hash;
  std::size_t n, nnz;
  is >> hash >> n >> nnz;
  CHECK(n == t->size());
  CHECK(nnz == h.entries().size());
}
