#include "tbg/envelope.hpp"

#include "tbg/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

namespace tbg {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// FFTW planning is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(const Eigen::VectorXcd& v) {
  return reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(v.data()));
}

int signed_mode(int i, int n) { return i < n / 2 ? i : i - n; }

}  // namespace

void Grid::validate() const {
  if (!(box > 0.0)) throw PreconditionError("grid box must be positive");
  if (n < 4 || n % 2 != 0) throw PreconditionError("grid size must be even and >= 4");
}

double Grid::wavenumber(int i) const { return kTwoPi * signed_mode(i, n) / box; }

bool Grid::contains(const Vec2& x) const {
  const double half = 0.5 * box;
  return x.x() >= -half && x.x() < half && x.y() >= -half && x.y() < half;
}

Envelope Envelope::zeros(const Grid& grid) {
  grid.validate();
  Envelope e;
  e.grid = grid;
  for (auto& c : e.comp) c = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(grid.points()));
  return e;
}

double Envelope::mass() const {
  double s = 0.0;
  for (const auto& c : comp) s += c.squaredNorm();
  return s * grid.spacing() * grid.spacing();
}

double Envelope::boundary_fraction() const {
  const double total = mass();
  if (total == 0.0) return 0.0;
  const double inner = 0.5 * grid.box - grid.box / 16.0;
  double s = 0.0;
  for (int iy = 0; iy < grid.n; ++iy) {
    const double y = std::abs(grid.coord(iy));
    for (int ix = 0; ix < grid.n; ++ix) {
      const double x = std::abs(grid.coord(ix));
      if (std::max(x, y) < inner) continue;
      const std::size_t k = grid.index(ix, iy);
      for (const auto& c : comp) s += std::norm(c[static_cast<Eigen::Index>(k)]);
    }
  }
  return s * grid.spacing() * grid.spacing() / total;
}

double Envelope::max_abs() const {
  double m = 0.0;
  for (const auto& c : comp) m = std::max(m, c.cwiseAbs().maxCoeff());
  return m;
}

double Envelope::boundary_ratio() const {
  const double peak = max_abs();
  if (peak == 0.0) return 0.0;
  double edge = 0.0;
  const int last = grid.n - 1;
  for (int i = 0; i < grid.n; ++i) {
    for (const auto& c : comp) {
      for (std::size_t k : {grid.index(i, 0), grid.index(i, last), grid.index(0, i), grid.index(last, i)})
        edge = std::max(edge, std::abs(c[static_cast<Eigen::Index>(k)]));
    }
  }
  return edge / peak;
}

Vec2 Envelope::centroid() const {
  Vec2 acc = Vec2::Zero();
  double total = 0.0;
  for (int iy = 0; iy < grid.n; ++iy) {
    for (int ix = 0; ix < grid.n; ++ix) {
      const std::size_t k = grid.index(ix, iy);
      double rho = 0.0;
      for (const auto& c : comp) rho += std::norm(c[static_cast<Eigen::Index>(k)]);
      acc += rho * Vec2(grid.coord(ix), grid.coord(iy));
      total += rho;
    }
  }
  if (total == 0.0) return Vec2::Zero();
  return acc / total;
}

Envelope& Envelope::operator*=(std::complex<double> s) {
  for (auto& c : comp) c *= s;
  return *this;
}

Fft2::Fft2(int n) : n_(n) {
  if (n < 2) throw PreconditionError("FFT size must be >= 2");
  std::lock_guard lock(planner_mutex());
  const std::size_t len = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  auto* a = fftw_alloc_complex(len);
  auto* b = fftw_alloc_complex(len);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  fwd_ = fftw_plan_dft_2d(n, n, a, b, FFTW_FORWARD, flags);
  bwd_ = fftw_plan_dft_2d(n, n, a, b, FFTW_BACKWARD, flags);
  fftw_free(a);
  fftw_free(b);
}

Fft2::~Fft2() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
}

void Fft2::forward(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const {
  const auto len = static_cast<Eigen::Index>(n_) * n_;
  if (in.size() != len) throw DimensionMismatchError("FFT input has the wrong length");
  out.resize(len);
  if (out.data() == in.data()) throw PreconditionError("FFT must be out of place");
  fftw_execute_dft(static_cast<fftw_plan>(fwd_), as_fftw(in), as_fftw(out));
}

void Fft2::backward(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const {
  const auto len = static_cast<Eigen::Index>(n_) * n_;
  if (in.size() != len) throw DimensionMismatchError("FFT input has the wrong length");
  out.resize(len);
  if (out.data() == in.data()) throw PreconditionError("FFT must be out of place");
  fftw_execute_dft(static_cast<fftw_plan>(bwd_), as_fftw(in), as_fftw(out));
  out /= static_cast<double>(len);
}

FourierInterpolant::FourierInterpolant(const Envelope& f, double rel_threshold) : grid_(f.grid) {
  const int n = grid_.n;
  const Fft2 fft(n);
  std::array<Eigen::VectorXcd, 4> coeffs;
  double peak = 0.0;
  for (int c = 0; c < 4; ++c) {
    fft.forward(f.comp[static_cast<std::size_t>(c)], coeffs[static_cast<std::size_t>(c)]);
    coeffs[static_cast<std::size_t>(c)] /= static_cast<double>(n) * n;
    peak = std::max(peak, coeffs[static_cast<std::size_t>(c)].cwiseAbs().maxCoeff());
  }
  const double cut = rel_threshold * peak;
  for (int c = 0; c < 4; ++c) {
    const auto cu = static_cast<std::size_t>(c);
    auto& list = modes_[cu];
    m1_lo_[cu] = m2_lo_[cu] = 0;
    m1_hi_[cu] = m2_hi_[cu] = 0;
    for (int iy = 0; iy < n; ++iy) {
      for (int ix = 0; ix < n; ++ix) {
        const std::complex<double> v = coeffs[cu][static_cast<Eigen::Index>(grid_.index(ix, iy))];
        if (std::abs(v) <= cut || v == 0.0) continue;
        const int m1 = signed_mode(ix, n);
        const int m2 = signed_mode(iy, n);
        list.push_back({m1, m2, v});
        m1_lo_[cu] = std::min(m1_lo_[cu], m1);
        m1_hi_[cu] = std::max(m1_hi_[cu], m1);
        m2_lo_[cu] = std::min(m2_lo_[cu], m2);
        m2_hi_[cu] = std::max(m2_hi_[cu], m2);
      }
    }
  }
}

std::complex<double> FourierInterpolant::operator()(int component, const Vec2& x) const {
  const auto cu = static_cast<std::size_t>(component);
  const auto& list = modes_.at(cu);
  if (list.empty()) return {0.0, 0.0};
  const double dk = kTwoPi / grid_.box;
  const double u = x.x() + 0.5 * grid_.box;
  const double w = x.y() + 0.5 * grid_.box;
  // Separable phase tables e^{i m dk u} and e^{i m dk w} over the occupied mode ranges.
  auto table = [dk](double s, int lo, int hi) {
    std::vector<std::complex<double>> t(static_cast<std::size_t>(hi - lo + 1));
    for (int m = lo; m <= hi; ++m) t[static_cast<std::size_t>(m - lo)] = std::polar(1.0, dk * m * s);
    return t;
  };
  const auto ex = table(u, m1_lo_[cu], m1_hi_[cu]);
  const auto ey = table(w, m2_lo_[cu], m2_hi_[cu]);
  std::complex<double> acc{0.0, 0.0};
  for (const Mode& m : list)
    acc += m.c * ex[static_cast<std::size_t>(m.m1 - m1_lo_[cu])] * ey[static_cast<std::size_t>(m.m2 - m2_lo_[cu])];
  return acc;
}

void spectral_gradient(const Grid& grid, const Eigen::VectorXcd& f, Eigen::VectorXcd& dfdx,
                       Eigen::VectorXcd& dfdy) {
  const Fft2 fft(grid.n);
  Eigen::VectorXcd hat;
  fft.forward(f, hat);
  Eigen::VectorXcd gx(hat.size()), gy(hat.size());
  for (int iy = 0; iy < grid.n; ++iy) {
    // The Nyquist mode has no well-defined derivative sign; drop it.
    const double ky = (iy == grid.n / 2) ? 0.0 : grid.wavenumber(iy);
    for (int ix = 0; ix < grid.n; ++ix) {
      const double kx = (ix == grid.n / 2) ? 0.0 : grid.wavenumber(ix);
      const auto k = static_cast<Eigen::Index>(grid.index(ix, iy));
      gx[k] = std::complex<double>(0.0, kx) * hat[k];
      gy[k] = std::complex<double>(0.0, ky) * hat[k];
    }
  }
  fft.backward(gx, dfdx);
  fft.backward(gy, dfdy);
}

double angular_momentum(const Envelope& f) {
  const double total = f.mass();
  if (total == 0.0) return 0.0;
  const Vec2 xc = f.centroid();
  double acc = 0.0;
  Eigen::VectorXcd dx, dy;
  for (const auto& c : f.comp) {
    if (c.squaredNorm() == 0.0) continue;
    spectral_gradient(f.grid, c, dx, dy);
    for (int iy = 0; iy < f.grid.n; ++iy) {
      const double y = f.grid.coord(iy) - xc.y();
      for (int ix = 0; ix < f.grid.n; ++ix) {
        const double x = f.grid.coord(ix) - xc.x();
        const auto k = static_cast<Eigen::Index>(f.grid.index(ix, iy));
        acc += (std::conj(c[k]) * (x * dy[k] - y * dx[k])).imag();
      }
    }
  }
  return acc * f.grid.spacing() * f.grid.spacing() / total;
}

}  // namespace tbg
