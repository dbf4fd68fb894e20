#include "tbg/bm_model.hpp"

#include "tbg/errors.hpp"
#include "tbg/log.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

namespace tbg {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDegenerateGap = 1e-9;

Eigen::Matrix2cd sigma_dot(const Vec2& q) {
  Eigen::Matrix2cd m;
  m << 0.0, std::complex<double>(q.x(), -q.y()), std::complex<double>(q.x(), q.y()), 0.0;
  return m;
}

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solve(const Vec2& k, const BmParams& params, int cutoff,
                                                      bool vectors) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
      bm_matrix(k, params, cutoff), vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw ConvergenceError("Hermitian eigensolver failed");
  return es;
}

// One Strang step sequence: K/2 (V K)^{steps-1} V K/2.
class SplitStepper {
 public:
  SplitStepper(const Grid& grid, const BmParams& params, double dt)
      : grid_(grid), fft_(grid.n), dt_(dt) {
    const std::size_t np = grid.points();
    pot_.resize(np);
    for (int iy = 0; iy < grid.n; ++iy) {
      for (int ix = 0; ix < grid.n; ++ix) {
        const Vec2 r(grid.coord(ix), grid.coord(iy));
        Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
        const Eigen::Matrix2cd t = moire_potential(r, params);
        m.topRightCorner<2, 2>() = t;
        m.bottomLeftCorner<2, 2>() = t.adjoint();
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(m);
        Eigen::Vector4cd ph;
        for (int j = 0; j < 4; ++j) ph[j] = std::polar(1.0, -es.eigenvalues()[j] * dt);
        pot_[grid.index(ix, iy)] = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
      }
    }
    kin_half_ = kinetic_table(params, 0.5 * dt);
    kin_full_ = kinetic_table(params, dt);
  }

  Envelope run(const Envelope& f0, int steps) const {
    std::array<Eigen::VectorXcd, 4> hat;
    for (int c = 0; c < 4; ++c) fft_.forward(f0.comp[static_cast<std::size_t>(c)], hat[static_cast<std::size_t>(c)]);
    Envelope f = f0;
    apply_kinetic(hat, kin_half_);
    for (int s = 0; s < steps; ++s) {
      for (int c = 0; c < 4; ++c) fft_.backward(hat[static_cast<std::size_t>(c)], f.comp[static_cast<std::size_t>(c)]);
      apply_potential(f);
      for (int c = 0; c < 4; ++c) fft_.forward(f.comp[static_cast<std::size_t>(c)], hat[static_cast<std::size_t>(c)]);
      apply_kinetic(hat, s + 1 == steps ? kin_half_ : kin_full_);
    }
    for (int c = 0; c < 4; ++c) fft_.backward(hat[static_cast<std::size_t>(c)], f.comp[static_cast<std::size_t>(c)]);
    return f;
  }

 private:
  struct KineticEntry {
    double c;                 // cos(v |k| tau)
    std::complex<double> up;  // -i sin(v|k|tau) (kx - i ky)/|k|
    std::complex<double> dn;  // -i sin(v|k|tau) (kx + i ky)/|k|
  };

  std::vector<KineticEntry> kinetic_table(const BmParams& params, double tau) const {
    std::vector<KineticEntry> out(grid_.points());
    for (int iy = 0; iy < grid_.n; ++iy) {
      for (int ix = 0; ix < grid_.n; ++ix) {
        const double kx = grid_.wavenumber(ix);
        const double ky = grid_.wavenumber(iy);
        const double kn = std::hypot(kx, ky);
        KineticEntry e{1.0, 0.0, 0.0};
        if (kn > 0.0) {
          const double ph = params.v * kn * tau;
          const std::complex<double> mis(0.0, -std::sin(ph) / kn);
          e = {std::cos(ph), mis * std::complex<double>(kx, -ky), mis * std::complex<double>(kx, ky)};
        }
        out[grid_.index(ix, iy)] = e;
      }
    }
    return out;
  }

  void apply_kinetic(std::array<Eigen::VectorXcd, 4>& hat, const std::vector<KineticEntry>& table) const {
    const auto np = static_cast<Eigen::Index>(grid_.points());
#pragma omp parallel for schedule(static)
    for (Eigen::Index p = 0; p < np; ++p) {
      const KineticEntry& e = table[static_cast<std::size_t>(p)];
      for (int layer = 0; layer < 2; ++layer) {
        auto& fa = hat[static_cast<std::size_t>(2 * layer)][p];
        auto& fb = hat[static_cast<std::size_t>(2 * layer + 1)][p];
        const std::complex<double> a = e.c * fa + e.up * fb;
        const std::complex<double> b = e.dn * fa + e.c * fb;
        fa = a;
        fb = b;
      }
    }
  }

  void apply_potential(Envelope& f) const {
    const auto np = static_cast<Eigen::Index>(grid_.points());
#pragma omp parallel for schedule(static)
    for (Eigen::Index p = 0; p < np; ++p) {
      Eigen::Vector4cd x(f.comp[0][p], f.comp[1][p], f.comp[2][p], f.comp[3][p]);
      const Eigen::Vector4cd y = pot_[static_cast<std::size_t>(p)] * x;
      for (int c = 0; c < 4; ++c) f.comp[static_cast<std::size_t>(c)][p] = y[c];
    }
  }

  Grid grid_;
  Fft2 fft_;
  double dt_;
  std::vector<Eigen::Matrix4cd, Eigen::aligned_allocator<Eigen::Matrix4cd>> pot_;
  std::vector<KineticEntry> kin_half_, kin_full_;
};

double field_distance(const Envelope& a, const Envelope& b) {
  double s = 0.0;
  for (std::size_t c = 0; c < 4; ++c) s += (a.comp[c] - b.comp[c]).squaredNorm();
  return std::sqrt(s * a.grid.spacing() * a.grid.spacing());
}

}  // namespace

void BmParams::finalize() {
  if (!(v > 0.0)) throw PreconditionError("Dirac velocity v must be positive");
  if (!(w >= 0.0)) throw PreconditionError("interlayer strength w must be nonnegative");
  LatticeParams lp;
  lp.a = a;
  lp.theta = theta;
  const MoireData md = moire_data(lp);
  b_m1 = md.b_m1;
  b_m2 = md.b_m2;
  K_m = md.K_m;
  s[0] = lp.delta_k() * Vec2(0.0, -1.0);
  s[1] = s[0] + b_m2;
  s[2] = s[0] - b_m1;
  const std::complex<double> om = std::polar(1.0, 2.0 * kPi / 3.0);
  T[0] << 1.0, 1.0, 1.0, 1.0;
  T[1] << 1.0, std::conj(om), om, 1.0;
  T[2] << 1.0, om, std::conj(om), 1.0;
}

BmParams BmParams::make(double v, double w, const LatticeParams& lattice) {
  BmParams p;
  p.v = v;
  p.w = w;
  p.theta = lattice.theta;
  p.a = lattice.a;
  p.finalize();
  return p;
}

double dirac_velocity(const HoppingModel& model, const LatticeParams& lattice) {
  return 1.5 * model.t0 * lattice.delta();
}

double interlayer_strength(const HoppingModel& model, const LatticeParams& lattice) {
  HoppingModel m = model;
  m.L = lattice.L;
  return hopping_fourier(lattice.dirac_norm(), m) / lattice.cell_area();
}

BmParams BmParams::derived(const HoppingModel& model, const LatticeParams& lattice) {
  return make(dirac_velocity(model, lattice), interlayer_strength(model, lattice), lattice);
}

std::vector<Eigen::Vector2i> plane_wave_indices(int cutoff) {
  if (cutoff < 1) throw PreconditionError("plane-wave cutoff must be >= 1");
  std::vector<Eigen::Vector2i> out;
  out.reserve(static_cast<std::size_t>((2 * cutoff + 1) * (2 * cutoff + 1)));
  for (int n1 = -cutoff; n1 <= cutoff; ++n1)
    for (int n2 = -cutoff; n2 <= cutoff; ++n2) out.emplace_back(n1, n2);
  return out;
}

Eigen::MatrixXcd bm_matrix(const Vec2& k, const BmParams& params, int cutoff) {
  const auto basis = plane_wave_indices(cutoff);
  const auto nb = static_cast<Eigen::Index>(basis.size());
  auto lookup = [cutoff](int n1, int n2) -> Eigen::Index {
    if (std::abs(n1) > cutoff || std::abs(n2) > cutoff) return -1;
    return (n1 + cutoff) * (2 * cutoff + 1) + (n2 + cutoff);
  };
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4 * nb, 4 * nb);
  for (Eigen::Index i = 0; i < nb; ++i) {
    const Eigen::Vector2i& n = basis[static_cast<std::size_t>(i)];
    const Vec2 g = n.x() * params.b_m1 + n.y() * params.b_m2;
    m.block<2, 2>(4 * i, 4 * i) = params.v * sigma_dot(k + g);
    m.block<2, 2>(4 * i + 2, 4 * i + 2) = params.v * sigma_dot(k + g + params.s[0]);
    // layer-1 G couples to layer-2 G (T1), G + b_m2 (T2), G - b_m1 (T3)
    const std::array<Eigen::Index, 3> partner{lookup(n.x(), n.y()), lookup(n.x(), n.y() + 1),
                                              lookup(n.x() - 1, n.y())};
    for (std::size_t t = 0; t < 3; ++t) {
      const Eigen::Index j = partner[t];
      if (j < 0) continue;
      m.block<2, 2>(4 * i, 4 * j + 2) += params.w * params.T[t];
      m.block<2, 2>(4 * j + 2, 4 * i) += params.w * params.T[t].adjoint();
    }
  }
  return m;
}

int band_position(int n, int dimension) {
  const int pos = dimension / 2 - 2 + n;
  if (pos < 0 || pos >= dimension) throw PreconditionError("band index outside the plane-wave spectrum");
  return pos;
}

std::vector<BandPoint> bands(const std::vector<Vec2>& path, const BmParams& params, int cutoff) {
  if (path.empty()) throw PreconditionError("k path is empty");
  std::vector<BandPoint> out(path.size());
  const auto np = static_cast<long>(path.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < np; ++i) {
    const auto iu = static_cast<std::size_t>(i);
    out[iu].k = path[iu];
    out[iu].energies = solve(path[iu], params, cutoff, false).eigenvalues();
  }
  return out;
}

double band_energy(int n, const Vec2& k, const BmParams& params, int cutoff) {
  const auto es = solve(k, params, cutoff, false);
  return es.eigenvalues()[band_position(n, static_cast<int>(es.eigenvalues().size()))];
}

BlochState bloch_state(int n, const Vec2& k, const BmParams& params, int cutoff) {
  const auto es = solve(k, params, cutoff, true);
  const auto& ev = es.eigenvalues();
  const int dim = static_cast<int>(ev.size());
  const int pos = band_position(n, dim);
  BlochState st;
  st.band = n;
  st.k = k;
  st.energy = ev[pos];
  st.basis = plane_wave_indices(cutoff);
  st.gap = std::numeric_limits<double>::infinity();
  if (pos > 0) st.gap = std::min(st.gap, ev[pos] - ev[pos - 1]);
  if (pos + 1 < dim) st.gap = std::min(st.gap, ev[pos + 1] - ev[pos]);
  st.coeffs = es.eigenvectors().col(pos);
  Eigen::Index big = 0;
  st.coeffs.cwiseAbs().maxCoeff(&big);
  st.coeffs *= std::conj(st.coeffs[big]) / std::abs(st.coeffs[big]);
  if (st.gap < kDegenerateGap) {
    int lo = pos, hi = pos;
    while (lo > 0 && ev[pos] - ev[lo - 1] < kDegenerateGap) --lo;
    while (hi + 1 < dim && ev[hi + 1] - ev[pos] < kDegenerateGap) ++hi;
    st.degenerate_subspace = es.eigenvectors().middleCols(lo, hi - lo + 1);
    std::ostringstream msg;
    msg << "band " << n << " is degenerate at k = (" << k.x() << ", " << k.y()
        << "); eigenvector choice inside the " << (hi - lo + 1) << "-dimensional eigenspace is arbitrary";
    warn(msg.str());
  }
  return st;
}

Envelope eigenfunction(const BlochState& state, const BmParams& params, const Grid& grid) {
  Envelope f = Envelope::zeros(grid);
  const double peak = state.coeffs.cwiseAbs().maxCoeff();
  struct Term {
    Vec2 q;
    int comp;
    std::complex<double> c;
  };
  std::vector<Term> terms;
  for (std::size_t i = 0; i < state.basis.size(); ++i) {
    const Vec2 g = state.basis[i].x() * params.b_m1 + state.basis[i].y() * params.b_m2;
    for (int c = 0; c < 4; ++c) {
      const std::complex<double> v = state.coeffs[static_cast<Eigen::Index>(4 * i + static_cast<std::size_t>(c))];
      if (std::abs(v) < 1e-13 * peak) continue;
      const Vec2 q = state.k + g + (c >= 2 ? params.s[0] : Vec2::Zero());
      terms.push_back({q, c, v});
    }
  }
  const auto np = static_cast<long>(grid.points());
#pragma omp parallel for schedule(static)
  for (long p = 0; p < np; ++p) {
    const int ix = static_cast<int>(p % grid.n);
    const int iy = static_cast<int>(p / grid.n);
    const Vec2 r(grid.coord(ix), grid.coord(iy));
    std::array<std::complex<double>, 4> acc{};
    for (const Term& t : terms) acc[static_cast<std::size_t>(t.comp)] += t.c * std::polar(1.0, t.q.dot(r));
    for (std::size_t c = 0; c < 4; ++c) f.comp[c][p] = acc[c];
  }
  return f;
}

Vec2 group_velocity(int n, const Vec2& k, const BmParams& params, int cutoff, DegeneratePolicy policy) {
  const double h = 1e-4 * params.b_m1.norm();
  const auto es = solve(k, params, cutoff, false);
  const auto& ev = es.eigenvalues();
  const int dim = static_cast<int>(ev.size());
  const int pos = band_position(n, dim);
  double gap = std::numeric_limits<double>::infinity();
  if (pos > 0) gap = std::min(gap, ev[pos] - ev[pos - 1]);
  if (pos + 1 < dim) gap = std::min(gap, ev[pos + 1] - ev[pos]);
  if (gap < kDegenerateGap) {
    if (policy == DegeneratePolicy::Throw)
      throw DegenerateBandError("group velocity undefined at a band crossing");
    // Cone slope: largest one-sided directional derivative.
    Vec2 best = Vec2::Zero();
    for (int j = 0; j < 6; ++j) {
      const Vec2 e(std::cos(kPi * j / 3.0), std::sin(kPi * j / 3.0));
      const double d1 = (band_energy(n, k + h * e, params, cutoff) - ev[pos]) / h;
      const double d2 = (band_energy(n, k + 0.5 * h * e, params, cutoff) - ev[pos]) / (0.5 * h);
      const double slope = 2.0 * d2 - d1;
      if (std::abs(slope) > best.norm()) best = slope * e;
    }
    return best;
  }
  auto central = [&](const Vec2& e, double step) {
    return (band_energy(n, k + step * e, params, cutoff) - band_energy(n, k - step * e, params, cutoff)) /
           (2.0 * step);
  };
  Vec2 out;
  for (int d = 0; d < 2; ++d) {
    const Vec2 e = d == 0 ? Vec2(1.0, 0.0) : Vec2(0.0, 1.0);
    const double dh = central(e, h);
    const double dh2 = central(e, 0.5 * h);
    out[d] = (4.0 * dh2 - dh) / 3.0;
  }
  return out;
}

std::vector<Envelope> evolve_envelope_snapshots(const Envelope& f0, const std::vector<double>& times,
                                                const BmParams& params, const StepOptions& opts) {
  std::vector<Envelope> out;
  out.reserve(times.size());
  Envelope current = f0;
  double now = 0.0;
  for (double t : times) {
    if (t < now) throw PreconditionError("snapshot times must be nondecreasing");
    if (t > now) {
      current = evolve_envelope(current, t - now, params, opts);
      now = t;
    }
    out.push_back(current);
  }
  return out;
}

Eigen::Matrix2cd moire_potential(const Vec2& r, const BmParams& params) {
  Eigen::Matrix2cd t = Eigen::Matrix2cd::Zero();
  for (std::size_t n = 0; n < 3; ++n) t += params.T[n] * std::polar(1.0, -params.s[n].dot(r));
  return params.w * t;
}

Envelope evolve_envelope_fixed(const Envelope& f0, double t, int steps, const BmParams& params) {
  if (steps < 1) throw PreconditionError("step count must be positive");
  if (t == 0.0) return f0;
  const SplitStepper stepper(f0.grid, params, t / steps);
  return stepper.run(f0, steps);
}

Envelope evolve_envelope(const Envelope& f0, double t, const BmParams& params, const StepOptions& opts,
                         EvolveReport* report) {
  if (!(opts.tol > 0.0)) throw PreconditionError("step tolerance must be positive");
  if (!(opts.dt_initial > 0.0)) throw PreconditionError("initial step must be positive");
  auto contained = [&](const Envelope& f, const char* when) {
    if (!opts.check_containment) return;
    const double frac = f.boundary_fraction();
    if (frac > opts.containment) {
      std::ostringstream msg;
      msg << "envelope mass near the box boundary is " << frac << " " << when << " (limit "
          << opts.containment << ")";
      throw ContainmentError(msg.str());
    }
  };
  contained(f0, "initially");
  if (t == 0.0) {
    if (report) *report = {0, 0.0, 0.0};
    return f0;
  }
  const double scale = std::sqrt(f0.mass());
  int steps = std::max(1, static_cast<int>(std::ceil(std::abs(t) / opts.dt_initial)));
  Envelope coarse = evolve_envelope_fixed(f0, t, steps, params);
  double change = 0.0;
  for (int it = 0; it < opts.max_doublings; ++it) {
    steps *= 2;
    Envelope fine = evolve_envelope_fixed(f0, t, steps, params);
    change = scale > 0.0 ? field_distance(fine, coarse) / scale : 0.0;
    coarse = std::move(fine);
    if (change <= opts.tol) {
      contained(coarse, "after evolution");
      if (report) *report = {steps, t / steps, change};
      return coarse;
    }
  }
  throw ConvergenceError("split-step evolution did not reach the requested tolerance");
}

}  // namespace tbg
