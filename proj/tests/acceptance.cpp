// Acceptance harness: one PASS/FAIL line per criterion.
//   tbg_acceptance            all criteria
//   tbg_acceptance 4 7        selected criteria
#include "tbg/bm_model.hpp"
#include "tbg/bounds.hpp"
#include "tbg/config.hpp"
#include "tbg/errors.hpp"
#include "tbg/propagator.hpp"
#include "tbg/studies.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>

using namespace tbg;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

LatticeParams paper_lattice() { return LatticeParams{2.5, 1.05 * kDeg, 3.5}; }

// ĥ(|K|) by direct radial quadrature of the kernel against J0, independent of
// the closed form used by the library.
double kernel_transform_quadrature(const HoppingModel& m, double xi) {
  const double rmax = 60.0;
  const int n = 200000;  // composite Simpson
  const double h = rmax / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double r = i * h;
    const double f = m.h0 * std::exp(-m.alpha0 * std::sqrt(r * r + m.L * m.L)) * std::cyl_bessel_j(0.0, xi * r) * r;
    s += f * (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0));
  }
  return 2.0 * kPi * s * h / 3.0;
}

// Monolayer Dirac-cone slope from brute-force Bloch diagonalisation of the
// intralayer hops of one layer at theta = 0.
double fitted_cone_slope(const HoppingModel& m, const LatticeParams& lp0) {
  const BilayerBasis basis = tbg_basis(lp0);
  const LayerBasis& L = basis.layer(1);
  auto bloch = [&](const Vec2& k) {
    Eigen::Matrix2cd H = Eigen::Matrix2cd::Zero();
    for (int s = 0; s < 2; ++s) {
      const SiteIndex x{1, static_cast<Sublattice>(s), 0, 0};
      for (int t = 0; t < 2; ++t)
        for (int n1 = -2; n1 <= 2; ++n1)
          for (int n2 = -2; n2 <= 2; ++n2) {
            const SiteIndex y{1, static_cast<Sublattice>(t), n1, n2};
            if (x == y) continue;
            const cplx h = intralayer_element(x, y, basis, m, lp0);
            if (h == 0.0) continue;
            const Vec2 d = site_position(basis, y) - site_position(basis, x);
            H(s, t) += h * std::polar(1.0, k.dot(d));
          }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(H);
    return es.eigenvalues()(1);
  };
  // Slope of E_+(K + q) over small |q| in several directions, by least squares through the origin.
  double sxy = 0.0, sxx = 0.0;
  for (int dir = 0; dir < 6; ++dir) {
    const Vec2 u(std::cos(dir * kPi / 3.0 + 0.1), std::sin(dir * kPi / 3.0 + 0.1));
    for (double q : {1e-5, 2e-5, 4e-5}) {
      const double e = bloch(L.K + q * u) - bloch(L.K);
      sxy += q * e;
      sxx += q * q;
    }
  }
  return sxy / sxx;
}

Outcome c1() {
  const HoppingModel m;
  const LatticeParams lp = paper_lattice();
  const double w_lib = interlayer_strength(m, lp);
  const double w_quad = kernel_transform_quadrature(m, lp.dirac_norm()) / lp.cell_area();
  const bool ok = std::abs(w_lib - 0.110) <= 0.001 && std::abs(w_lib - w_quad) <= 1e-6;
  return {ok, "w = " + fmt("%.6f", w_lib) + " eV, quadrature " + fmt("%.6f", w_quad)};
}

Outcome c2() {
  const HoppingModel m;
  const LatticeParams lp = paper_lattice();
  const double v = dirac_velocity(m, lp);
  LatticeParams lp0 = lp;
  lp0.theta = 0.0;
  const double slope = fitted_cone_slope(m, lp0);
  const bool ok = std::abs(v - 6.60) <= 0.01 && std::abs(slope - v) <= 0.01;
  return {ok, "v = " + fmt("%.5f", v) + " eV*A, Bloch-fit slope " + fmt("%.5f", slope)};
}

Outcome c3() {
  const HoppingModel m;
  const LatticeParams lp = paper_lattice();
  const double h = lp.a * interlayer_strength(m, lp) / dirac_velocity(m, lp);
  return {std::abs(h - 0.042) <= 0.001, "hfrak = " + fmt("%.5f", h)};
}

const TruncationResult& truncation_run() {
  static const TruncationResult r = study_truncation(RunConfig::preset_named("desk"), {});
  return r;
}

Outcome c4() {
  const auto& r = truncation_run();
  bool ok = !r.fits.empty();
  std::string d;
  for (const auto& f : r.fits) {
    ok = ok && f.fit.r_squared >= 0.95 && f.fit.slope < 0.0;
    d += "t=" + fmt("%g", f.t) + ": R^2 " + fmt("%.3f", f.fit.r_squared) + " slope " + fmt("%.4f", f.fit.slope) + "; ";
  }
  return {ok, d};
}

Outcome c5() {
  const auto& r = truncation_run();
  double worst = 0.0;
  for (const auto& row : r.rows) worst = std::max(worst, row.error_max / row.bound());
  return {r.violations == 0 && !r.rows.empty(),
          std::to_string(r.violations) + " violations over " + std::to_string(r.rows.size()) +
              " rows, max error/bound " + fmt("%.3g", worst)};
}

Outcome c6() {
  const HoppingModel m;
  const LatticeParams lp = paper_lattice();
  const double d = 1e-3;
  const double ratio = solve_alpha_max(d, 0.5, m, lp) * v_max(m, lp) / d;
  return {std::abs(ratio - 1.0) <= 0.02, "alpha_max v_max / d = " + fmt("%.5f", ratio)};
}

Outcome c7() {
  const HoppingModel m;
  const LatticeParams lp = paper_lattice();
  double R = 12.0;
  std::shared_ptr<const SiteTable> table;
  do {
    table = std::make_shared<const SiteTable>(enumerate_sites(lp, R));
    R += 0.1;
  } while (table->size() < 500);
  const SparseHermitian h = assemble(table, m);
  LatticeState psi{table, Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(table->size()))};
  for (std::size_t i = 0; i < table->size(); ++i) {
    const Vec2 x = table->position(i);
    psi.amplitudes[static_cast<Eigen::Index>(i)] = std::exp(-x.squaredNorm() / 18.0) * std::polar(1.0, 0.3 * x.x());
  }
  psi.amplitudes.normalize();
  PropagatorOptions cheb;
  PropagatorOptions dense;
  dense.method = PropagationMethod::DensePade;
  const auto a = evolve(h, psi, 10.0, cheb);
  const auto b = evolve(h, psi, 10.0, dense);
  const double diff = (a.amplitudes - b.amplitudes).norm();
  const double drift = std::max(std::abs(a.norm() - 1.0), std::abs(b.norm() - 1.0));
  return {diff <= 1e-8 && drift <= 1e-9, std::to_string(table->size()) + " sites, |dense - chebyshev| = " +
                                             fmt("%.3g", diff) + ", norm drift " + fmt("%.3g", drift)};
}

Outcome c8() {
  const LatticeParams lp = paper_lattice();
  const BmParams bm = BmParams::make(6.6, 0.11, lp);
  const int cut = 5;
  const double w1 = band_width(1, bm, cut, 12), w2 = band_width(2, bm, cut, 12);
  const double gflat = group_velocity(2, bm.K_m, bm, cut, DegeneratePolicy::ConeSlope).norm() / bm.v;
  const double g3 = group_velocity(3, Vec2(0.0, -0.02), bm, cut).norm() / bm.v;
  const bool ok = w1 <= 0.02 && w2 <= 0.02 && gflat <= 0.05 && g3 >= 0.05;
  return {ok, "flat widths " + fmt("%.5f", w1) + ", " + fmt("%.5f", w2) + " eV; |grad E(K_m)|/v " +
                  fmt("%.4f", gflat) + "; third band at k1 |grad E|/v " + fmt("%.4f", g3)};
}

Outcome c9() {
  const LatticeParams lp = paper_lattice();
  const BmParams bm = BmParams::make(6.6, 0.0, lp);
  double worst = 0.0;
  for (const Vec2 k : {Vec2(0.003, -0.011), Vec2(0.0, 0.0), Vec2(-0.02, 0.007)}) {
    const int cut = 3;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(bm_matrix(k, bm, cut));
    std::vector<double> cones;
    for (const auto& n : plane_wave_indices(cut)) {
      const Vec2 g = n.x() * bm.b_m1 + n.y() * bm.b_m2;
      const double e1 = bm.v * (k + g).norm(), e2 = bm.v * (k + g + bm.s[0]).norm();
      for (double e : {e1, -e1, e2, -e2}) cones.push_back(e);
    }
    std::sort(cones.begin(), cones.end());
    for (std::size_t i = 0; i < cones.size(); ++i)
      worst = std::max(worst, std::abs(cones[i] - es.eigenvalues()(static_cast<Eigen::Index>(i))));
  }
  return {worst <= 1e-10, "max |E - folded cone| = " + fmt("%.3g", worst) + " eV"};
}

bool in(double x, double lo, double hi) { return x >= lo && x <= hi; }

Outcome c10() {
  RunConfig cfg = RunConfig::preset_named("desk");
  cfg.scaling.substudies = {"regime"};
  const auto r = study_scaling(cfg, {});
  const auto* ft = r.find("regime", "t");
  const auto* fe = r.find("regime", "epsilon");
  if (!ft || !fe) return {false, "missing fits"};
  const bool ok = in(ft->fit.slope, 0.75, 1.05) && in(fe->fit.slope, 1.6, 2.1);
  return {ok, "slope vs t " + fmt("%.3f", ft->fit.slope) + " (+/- " + fmt("%.3f", ft->fit.slope_ci95) +
                  "), vs epsilon " + fmt("%.3f", fe->fit.slope) + " (+/- " + fmt("%.3f", fe->fit.slope_ci95) + ")"};
}

Outcome c11() {
  RunConfig cfg = RunConfig::preset_named("desk");
  cfg.scaling.substudies = {"hfrak", "eps", "theta"};
  const auto r = study_scaling(cfg, {});
  const auto* fh = r.find("hfrak", "hfrak");
  const auto* fe = r.find("eps", "epsilon");
  const auto* fth = r.find("theta", "theta");
  if (!fh || !fe || !fth) return {false, "missing fits"};
  const bool ok = in(fh->fit.slope, 0.5, 0.95) && in(fe->fit.slope, 1.1, 1.6) && in(fth->fit.slope, -0.1, 0.25);
  return {ok, "hfrak slope " + fmt("%.3f", fh->fit.slope) + ", epsilon slope " + fmt("%.3f", fe->fit.slope) +
                  ", theta slope " + fmt("%.3f", fth->fit.slope)};
}

Outcome c12() {
  const auto r = study_flat(RunConfig::preset_named("desk"), {});
  const auto& p = r.chirality_plus;
  const auto& m = r.chirality_minus;
  double floor = 0.0;
  for (double x : p.resolution) floor = std::max(floor, x);
  for (double x : m.resolution) floor = std::max(floor, x);
  bool flips = true, bm_quiet = true;
  for (std::size_t i = 1; i < p.times.size(); ++i) {
    flips = flips && std::abs(p.tb[i]) > floor && std::abs(m.tb[i]) > floor && p.tb[i] * m.tb[i] < 0.0 &&
            std::abs(p.difference[i]) > floor && p.difference[i] * m.difference[i] < 0.0;
    bm_quiet = bm_quiet && std::abs(p.bm[i]) <= r.bm_noise_threshold && std::abs(m.bm[i]) <= r.bm_noise_threshold;
  }
  const bool slow = r.speed_ratio_tb <= 0.05 && r.speed_ratio_bm <= 0.05;
  std::ostringstream d;
  d << "speed ratio TB " << fmt("%.4f", r.speed_ratio_tb) << ", BM " << fmt("%.4f", r.speed_ratio_bm)
    << "; dL_tb(+theta) " << fmt("%.3g", p.tb.back()) << ", dL_tb(-theta) " << fmt("%.3g", m.tb.back())
    << ", TB-BM " << fmt("%.3g", p.difference.back()) << "/" << fmt("%.3g", m.difference.back()) << ", |dL_bm| "
    << fmt("%.3g", std::abs(p.bm.back())) << " vs noise " << fmt("%.3g", r.bm_noise_threshold) << ", resolution "
    << fmt("%.2g", floor);
  return {slow && flips && bm_quiet, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::function<Outcome()>> criteria{
      {1, c1}, {2, c2}, {3, c3}, {4, c4}, {5, c5}, {6, c6}, {7, c7}, {8, c8}, {9, c9}, {10, c10}, {11, c11}, {12, c12}};
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
  if (which.empty())
    for (const auto& [k, _] : criteria) which.push_back(k);
  int failures = 0;
  for (int k : which) {
    const auto it = criteria.find(k);
    if (it == criteria.end()) {
      std::printf("criterion %d: FAIL unknown criterion\n", k);
      ++failures;
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = it->second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %d: %s %s [%.1f s]\n", k, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
