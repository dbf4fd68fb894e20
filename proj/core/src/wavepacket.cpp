#include "tbg/wavepacket.hpp"

#include "tbg/errors.hpp"
#include "tbg/log.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace tbg {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

void WavepacketSpec::validate() const {
  if (!(sigma_r > 0.0)) throw PreconditionError("sigma_r must be positive");
  if (kind == PacketKind::BandConcentrated && cutoff < 1)
    throw PreconditionError("band-concentrated packets need a plane-wave cutoff >= 1");
}

double sigma_from_epsilon(double epsilon, SigmaUnits units, double a) {
  if (!(epsilon > 0.0)) throw PreconditionError("epsilon must be positive");
  return units == SigmaUnits::Angstrom ? 1.0 / epsilon : a / epsilon;
}

PacketKind parse_packet_kind(const std::string& s) {
  if (s == "gaussian") return PacketKind::Gaussian;
  if (s == "band_concentrated" || s == "band") return PacketKind::BandConcentrated;
  throw ConfigError("unknown wavepacket kind '" + s + "'");
}

std::string packet_kind_name(PacketKind k) {
  return k == PacketKind::Gaussian ? "gaussian" : "band_concentrated";
}

Envelope make_envelope(const WavepacketSpec& spec, const BmParams& bm, const Grid& grid, double cell_area) {
  spec.validate();
  grid.validate();
  if (grid.box < 8.0 * spec.sigma_r) throw ContainmentError("envelope box must be at least 8 sigma_r");
  Envelope f = Envelope::zeros(grid);
  const double inv2s2 = 0.5 / (spec.sigma_r * spec.sigma_r);
  auto gauss = [&](int ix, int iy) {
    const Vec2 r = Vec2(grid.coord(ix), grid.coord(iy)) - spec.center;
    return std::exp(-r.squaredNorm() * inv2s2);
  };
  if (spec.kind == PacketKind::Gaussian) {
    for (int iy = 0; iy < grid.n; ++iy)
      for (int ix = 0; ix < grid.n; ++ix) {
        const double g = gauss(ix, iy);
        const auto p = static_cast<Eigen::Index>(grid.index(ix, iy));
        for (std::size_t c = 0; c < 4; ++c) f.comp[c][p] = spec.coefficients[c] * g;
      }
  } else {
    const BlochState st = bloch_state(spec.band, spec.k, bm, spec.cutoff);
    f = eigenfunction(st, bm, grid);
    for (int iy = 0; iy < grid.n; ++iy)
      for (int ix = 0; ix < grid.n; ++ix) {
        const double g = gauss(ix, iy);
        const auto p = static_cast<Eigen::Index>(grid.index(ix, iy));
        for (auto& c : f.comp) c[p] *= g;
      }
  }
  const double m = f.mass();
  if (m > 0.0) f *= std::sqrt(cell_area / m);
  const double edge = f.boundary_ratio();
  if (edge > 1e-8) {
    std::ostringstream msg;
    msg << "initial envelope is not contained: edge/max = " << edge;
    throw ContainmentError(msg.str());
  }
  return f;
}

LatticeState sample_envelope(const Envelope& f, std::shared_ptr<const SiteTable> table) {
  if (!table) throw PreconditionError("sampling needs a site table");
  const BilayerBasis basis = tbg_basis(table->params());
  const FourierInterpolant interp(f);
  LatticeState out{table, Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(table->size()))};
  for (std::size_t i = 0; i < table->size(); ++i)
    if (!f.grid.contains(table->position(i)))
      throw PreconditionError("site lies outside the envelope box");
  const auto n = static_cast<long>(table->size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    const auto iu = static_cast<std::size_t>(i);
    const SiteIndex& s = table->site(iu);
    const Vec2& x = table->position(iu);
    const Vec2& K = basis.layer(s.layer).K;
    out.amplitudes[i] = interp(component_of(s), x) * std::polar(1.0, K.dot(x));
  }
  return out;
}

LatticeState envelope_to_lattice(const Envelope& f, std::shared_ptr<const SiteTable> table) {
  LatticeState out = sample_envelope(f, std::move(table));
  const double nrm = out.norm();
  if (nrm > 0.0) out.amplitudes /= nrm;
  return out;
}

Envelope lattice_to_envelope(const LatticeState& psi, const Grid& grid) {
  grid.validate();
  const SiteTable& table = *psi.table;
  const LatticeParams& lp = table.params();
  const BilayerBasis basis = tbg_basis(lp);
  const int n = grid.n;
  const int mmax = n / 4;  // half the Nyquist index
  const double dk = 2.0 * kPi / grid.box;
  const double kband = mmax * dk;
  const double half_b = 2.0 * kPi / (std::sqrt(3.0) * lp.a);
  if (kband > half_b) {
    std::ostringstream msg;
    msg << "fit bandwidth " << kband << " exceeds half the lattice reciprocal vector " << half_b
        << "; the fit is aliased";
    warn(msg.str());
  }
  const int width = 2 * mmax + 1;
  std::array<Eigen::MatrixXcd, 4> acc;
  for (auto& a : acc) a = Eigen::MatrixXcd::Zero(width, width);
  std::vector<std::complex<double>> ex(static_cast<std::size_t>(width)), ey(static_cast<std::size_t>(width));
  for (std::size_t i = 0; i < table.size(); ++i) {
    const std::complex<double> amp = psi.amplitudes[static_cast<Eigen::Index>(i)];
    if (amp == 0.0) continue;
    const SiteIndex& s = table.site(i);
    const Vec2& x = table.position(i);
    const std::complex<double> val = amp * std::polar(1.0, -basis.layer(s.layer).K.dot(x));
    const double u = x.x() + 0.5 * grid.box;
    const double w = x.y() + 0.5 * grid.box;
    for (int m = -mmax; m <= mmax; ++m) {
      ex[static_cast<std::size_t>(m + mmax)] = std::polar(1.0, -dk * m * u);
      ey[static_cast<std::size_t>(m + mmax)] = std::polar(1.0, -dk * m * w);
    }
    auto& a = acc[static_cast<std::size_t>(component_of(s))];
    for (int j2 = 0; j2 < width; ++j2) {
      const std::complex<double> vy = val * ey[static_cast<std::size_t>(j2)];
      for (int j1 = 0; j1 < width; ++j1) a(j1, j2) += vy * ex[static_cast<std::size_t>(j1)];
    }
  }
  // c_m = |Gamma| / box^2 * sum_sites f(x) e^{-i k_m (x - x0)}
  const double weight = lp.cell_area() / (grid.box * grid.box);
  Envelope f = Envelope::zeros(grid);
  const Fft2 fft(n);
  for (std::size_t c = 0; c < 4; ++c) {
    Eigen::VectorXcd hat = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(grid.points()));
    for (int m2 = -mmax; m2 <= mmax; ++m2)
      for (int m1 = -mmax; m1 <= mmax; ++m1) {
        const int ix = (m1 + n) % n;
        const int iy = (m2 + n) % n;
        hat[static_cast<Eigen::Index>(grid.index(ix, iy))] =
            weight * static_cast<double>(n) * n * acc[c](m1 + mmax, m2 + mmax);
      }
    fft.backward(hat, f.comp[c]);
  }
  return f;
}

double comparison_error(const LatticeState& psi_tb, const Envelope& f_bm) {
  const LatticeState bm = sample_envelope(f_bm, psi_tb.table);
  if (bm.size() != psi_tb.size()) throw DimensionMismatchError("states differ in length");
  return (bm.amplitudes - psi_tb.amplitudes).norm();
}

double tail_norm(const LatticeState& psi, double r) {
  double s = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i)
    if (psi.table->position(i).norm() > r) s += std::norm(psi.amplitudes[static_cast<Eigen::Index>(i)]);
  return std::sqrt(s);
}

LatticeState restrict_to_disk(const LatticeState& psi, double r) {
  LatticeState out = psi;
  for (std::size_t i = 0; i < psi.size(); ++i)
    if (psi.table->position(i).norm() > r) out.amplitudes[static_cast<Eigen::Index>(i)] = 0.0;
  return out;
}

InitialCondition make_initial(const WavepacketSpec& spec, const BmParams& bm, const Grid& grid,
                              std::shared_ptr<const SiteTable> table) {
  InitialCondition ic;
  ic.envelope = make_envelope(spec, bm, grid, table->params().cell_area());
  ic.psi = sample_envelope(ic.envelope, table);
  const double nrm = ic.psi.norm();
  if (nrm == 0.0) throw PreconditionError("initial state vanishes on the site table");
  ic.scale = 1.0 / nrm;
  ic.psi.amplitudes *= ic.scale;
  ic.envelope *= ic.scale;
  return ic;
}

Envelope mirror_envelope(const Envelope& f) {
  Envelope out = Envelope::zeros(f.grid);
  const int n = f.grid.n;
  static constexpr std::array<std::size_t, 4> swap{1, 0, 3, 2};
  for (int iy = 0; iy < n; ++iy) {
    const int my = (n - iy) % n;
    for (int ix = 0; ix < n; ++ix) {
      const auto dst = static_cast<Eigen::Index>(f.grid.index(ix, iy));
      const auto src = static_cast<Eigen::Index>(f.grid.index(ix, my));
      for (std::size_t c = 0; c < 4; ++c) out.comp[c][dst] = f.comp[swap[c]][src];
    }
  }
  return out;
}

}  // namespace tbg
