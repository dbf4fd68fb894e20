#pragma once

#include "tbg/geometry.hpp"
#include "tbg/hamiltonian.hpp"

#include <Eigen/Dense>

#include <memory>
#include <string>
#include <vector>

namespace tbg {

/// Truncated wavefunction: one complex amplitude per row of a SiteTable.
struct LatticeState {
  std::shared_ptr<const SiteTable> table;
  Eigen::VectorXcd amplitudes;

  double norm() const { return amplitudes.norm(); }
  std::size_t size() const { return static_cast<std::size_t>(amplitudes.size()); }
};

/// Zero-extends `state` onto `target`, whose site set must contain the
/// state's sites; sites absent from `target` raise DimensionMismatchError.
LatticeState extend_to(const LatticeState& state, std::shared_ptr<const SiteTable> target);

enum class PropagationMethod { DensePade, Chebyshev };

PropagationMethod parse_method(const std::string& name);
std::string method_name(PropagationMethod m);

struct PropagatorOptions {
  PropagationMethod method = PropagationMethod::Chebyshev;
  double tol = 1e-10;
  std::vector<double> snapshot_times;
  int max_degree = 1'000'000;
  std::size_t dense_limit = 4000;

  void validate() const;
};

/// Bessel values J_0(x) .. J_nmax(x) by normalised backward recurrence.
std::vector<double> bessel_j_sequence(double x, int nmax);

/// Chebyshev degree needed so that the discarded coefficient mass
/// sum_{k > K} 2 |J_k(x)| is at most `tol`.
int chebyshev_degree(double x, double tol, int max_degree);

/// Psi(t) = exp(-i H t) psi0 (hbar = 1). Negative t is allowed.
LatticeState evolve(const SparseHermitian& h, const LatticeState& psi0, double t,
                    const PropagatorOptions& opts);

/// States at opts.snapshot_times, each advanced from the previous snapshot.
std::vector<LatticeState> evolve_snapshots(const SparseHermitian& h, const LatticeState& psi0,
                                           const PropagatorOptions& opts);

/// <psi, H psi>.
double energy(const SparseHermitian& h, const LatticeState& psi);

}  // namespace tbg
