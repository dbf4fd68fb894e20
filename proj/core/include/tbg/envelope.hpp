#pragma once

#include "tbg/geometry.hpp"

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <memory>
#include <vector>

namespace tbg {

/// Uniform periodic N x N grid on the square [-box/2, box/2)^2.
struct Grid {
  double box = 256.0;
  int n = 128;

  void validate() const;
  double spacing() const { return box / n; }
  double coord(int i) const { return -0.5 * box + i * spacing(); }
  /// Angular wavenumber of FFT index i (0..n-1), in [-pi/h, pi/h).
  double wavenumber(int i) const;
  std::size_t points() const { return static_cast<std::size_t>(n) * static_cast<std::size_t>(n); }
  /// Flat index; ix runs fastest.
  std::size_t index(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * static_cast<std::size_t>(n) + static_cast<std::size_t>(ix);
  }
  bool contains(const Vec2& x) const;
};

/// Four-component field (f1A, f1B, f2A, f2B) sampled on a Grid.
struct Envelope {
  Grid grid;
  std::array<Eigen::VectorXcd, 4> comp;

  static Envelope zeros(const Grid& grid);

  /// sum_c integral |f_c|^2 dx (grid quadrature).
  double mass() const;
  /// Fraction of mass within box/16 of the box boundary.
  double boundary_fraction() const;
  /// max |f| on the outermost grid ring over the global max |f|.
  double boundary_ratio() const;
  double max_abs() const;
  /// Density centroid.
  Vec2 centroid() const;

  Envelope& operator*=(std::complex<double> s);
};

/// Out-of-place unnormalised 2D FFTs of size n x n. Thread-safe to use
/// from several threads once constructed.
class Fft2 {
 public:
  explicit Fft2(int n);
  ~Fft2();
  Fft2(const Fft2&) = delete;
  Fft2& operator=(const Fft2&) = delete;

  int size() const { return n_; }
  void forward(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const;
  /// Inverse transform including the 1/n^2 factor.
  void backward(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const;

 private:
  int n_;
  void* fwd_ = nullptr;
  void* bwd_ = nullptr;
};

/// Trigonometric interpolant of an Envelope, evaluated at arbitrary points.
/// Modes below `rel_threshold` times the largest coefficient are skipped.
class FourierInterpolant {
 public:
  explicit FourierInterpolant(const Envelope& f, double rel_threshold = 1e-14);

  std::complex<double> operator()(int component, const Vec2& x) const;

 private:
  struct Mode {
    int m1, m2;
    std::complex<double> c;
  };
  Grid grid_;
  std::array<std::vector<Mode>, 4> modes_;
  std::array<int, 4> m1_lo_{}, m1_hi_{}, m2_lo_{}, m2_hi_{};
};

/// Spectral derivatives d/dx and d/dy of one component.
void spectral_gradient(const Grid& grid, const Eigen::VectorXcd& f, Eigen::VectorXcd& dfdx,
                       Eigen::VectorXcd& dfdy);

/// <L_z> = Im sum_c integral conj(f_c) ((x - xc) d_y - (y - yc) d_x) f_c dx / mass
/// about the density centroid (xc, yc).
double angular_momentum(const Envelope& f);

}  // namespace tbg
