#pragma once

#include "tbg/geometry.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

namespace tbg {

using cplx = std::complex<double>;

/// Nearest-neighbour intralayer hopping plus exponentially decaying
/// interlayer hopping h(r; L) = h0 exp(-alpha0 sqrt(|r|^2 + L^2)).
/// Energies in eV, lengths in Angstrom.
struct HoppingModel {
  double t0 = 3.048;
  double h0 = 83.135;
  double alpha0 = 1.0;
  double L = 3.5;
  double interlayer_cutoff = 15.0;  // in-plane distance beyond which hops are dropped

  void validate() const;

  /// h(r; L) for in-plane separation r, without the cutoff.
  double kernel(double r) const;

  /// Prefactor h_eff such that every hop satisfies |H_xy| <= h_eff exp(-alpha0 |x - y|).
  double decay_prefactor(const LatticeParams& params) const;
};

/// Fourier transform of the interlayer kernel, in eV * Angstrom^2.
double hopping_fourier(double xi_norm, const HoppingModel& model);
double hopping_fourier(const Vec2& xi, const HoppingModel& model);

cplx intralayer_element(const SiteIndex& x, const SiteIndex& y, const BilayerBasis& basis,
                        const HoppingModel& model, const LatticeParams& params);
cplx interlayer_element(const SiteIndex& x, const SiteIndex& y, const BilayerBasis& basis,
                        const HoppingModel& model);

/// Truncated tight-binding Hamiltonian on a SiteTable. Only entries with
/// row <= col are stored in `entries()`; a full CSR copy backs `apply`.
class SparseHermitian {
 public:
  struct Entry {
    std::uint32_t row;
    std::uint32_t col;
    cplx value;
  };

  SparseHermitian(std::shared_ptr<const SiteTable> table, std::vector<Entry> entries);

  const SiteTable& table() const { return *table_; }
  std::shared_ptr<const SiteTable> table_ptr() const { return table_; }
  std::size_t dimension() const { return table_->size(); }
  const std::vector<Entry>& entries() const { return entries_; }
  /// Number of stored nonzeros in the full matrix (both triangles).
  std::size_t full_nonzeros() const { return values_.size(); }

  /// out = H * in. Safe for concurrent calls with distinct outputs.
  void apply(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const;
  Eigen::VectorXcd operator*(const Eigen::VectorXcd& in) const;

  Eigen::MatrixXcd to_dense() const;

  /// max_i sum_j |H_ij|; every eigenvalue lies in [-max_row_sum, max_row_sum].
  double max_row_sum() const;

  /// Number of nonzeros in row i of the full matrix.
  std::size_t row_nonzeros(std::size_t i) const;

 private:
  std::shared_ptr<const SiteTable> table_;
  std::vector<Entry> entries_;
  std::vector<std::uint32_t> row_ptr_;
  std::vector<std::uint32_t> col_idx_;
  std::vector<cplx> values_;
};

SparseHermitian assemble(std::shared_ptr<const SiteTable> table, const HoppingModel& model);

/// Analytic operator-norm bound 8 pi h0 e^{delta alpha0} / (|Gamma| alpha0^2).
/// It covers the interlayer kernel class only; see spectral_half_width.
double norm_bound(const HoppingModel& model, const LatticeParams& params);

/// Half-width of a symmetric interval that contains the spectrum of `h`:
/// min(analytic norm bound, Gershgorin row sum).
double spectral_half_width(const SparseHermitian& h, const HoppingModel& model);

/// Certified bound on the per-row magnitude sum of interlayer hops dropped by
/// the cutoff, from the Wigner-Seitz lattice-sum comparison with an integral.
double dropped_mass_bound(const HoppingModel& model, const LatticeParams& params);

/// Coordinate text dump: "# n nnz" then "row col re im" for each stored
/// (row <= col) entry.
void write_coordinate(const SparseHermitian& h, std::ostream& out);

}  // namespace tbg
