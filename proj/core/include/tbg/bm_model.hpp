#pragma once

#include "tbg/envelope.hpp"
#include "tbg/geometry.hpp"
#include "tbg/hamiltonian.hpp"

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace tbg {

/// Continuum model parameters. v in eV*Angstrom, w in eV, theta in radians.
struct BmParams {
  double v = 6.6;
  double w = 0.11;
  double theta = 0.0;
  double a = 2.5;

  // derived by finalize()
  std::array<Vec2, 3> s{};
  std::array<Eigen::Matrix2cd, 3> T{};
  Vec2 b_m1 = Vec2::Zero();
  Vec2 b_m2 = Vec2::Zero();
  Vec2 K_m = Vec2::Zero();

  /// Fills s_n, T_n and the moire reciprocal vectors; throws on theta = 0.
  void finalize();

  static BmParams make(double v, double w, const LatticeParams& lattice);
  /// v = (3/2) t0 delta and w = hhat(|K|; L) / |Gamma|.
  static BmParams derived(const HoppingModel& model, const LatticeParams& lattice);
};

double dirac_velocity(const HoppingModel& model, const LatticeParams& lattice);
double interlayer_strength(const HoppingModel& model, const LatticeParams& lattice);

/// Moire reciprocal vectors G = n1 b_m1 + n2 b_m2 with max(|n1|, |n2|) <= cutoff.
std::vector<Eigen::Vector2i> plane_wave_indices(int cutoff);

/// Plane-wave matrix of the Bloch problem at k. Ordering: for each basis vector
/// (plane_wave_indices order) the four components (1A, 1B, 2A, 2B).
Eigen::MatrixXcd bm_matrix(const Vec2& k, const BmParams& params, int cutoff);

/// Sorted-spectrum position of band n: the flat pair are n = 1 (lower) and
/// n = 2 (upper), n = 3 is the next band above, n = 0 the next below.
int band_position(int n, int dimension);

struct BandPoint {
  Vec2 k;
  Eigen::VectorXd energies;  // ascending, all bands
};

std::vector<BandPoint> bands(const std::vector<Vec2>& path, const BmParams& params, int cutoff);

/// Energy of band n at k.
double band_energy(int n, const Vec2& k, const BmParams& params, int cutoff);

struct BlochState {
  int band = 0;
  Vec2 k = Vec2::Zero();
  double energy = 0.0;
  double gap = 0.0;  // distance to the nearest other eigenvalue
  Eigen::VectorXcd coeffs;  // unit norm, largest entry real positive
  std::vector<Eigen::Vector2i> basis;
  /// Orthonormal basis of the eigenspace when the level is degenerate (gap < 1e-9 eV).
  Eigen::MatrixXcd degenerate_subspace;
};

BlochState bloch_state(int n, const Vec2& k, const BmParams& params, int cutoff);

/// Phi_n(r; k) = e^{ikr} diag(1, 1, e^{i s1 r}, e^{i s1 r}) phi(r; k) on the grid,
/// with unit mean square over a moire cell.
Envelope eigenfunction(const BlochState& state, const BmParams& params, const Grid& grid);

enum class DegeneratePolicy { Throw, ConeSlope };

/// grad_k E_n by central differences with step 1e-4 |b_m1| and one Richardson
/// pass. At a degenerate k, ConeSlope returns the largest one-sided slope over
/// six directions along the direction it occurs.
Vec2 group_velocity(int n, const Vec2& k, const BmParams& params, int cutoff,
                    DegeneratePolicy policy = DegeneratePolicy::Throw);

struct StepOptions {
  double tol = 1e-6;          // relative change allowed when the step count doubles
  double dt_initial = 0.5;    // hbar / eV
  int max_doublings = 14;
  double containment = 1e-6;  // allowed boundary_fraction()
  bool check_containment = true;
};

struct EvolveReport {
  int steps = 0;
  double dt = 0.0;
  double change = 0.0;  // last doubling difference, relative
};

/// f(t) for i df/dt = H_BM f by Strang splitting on the periodic grid.
Envelope evolve_envelope(const Envelope& f0, double t, const BmParams& params,
                         const StepOptions& opts, EvolveReport* report = nullptr);

/// States at nondecreasing `times`, each advanced from the previous one.
std::vector<Envelope> evolve_envelope_snapshots(const Envelope& f0, const std::vector<double>& times,
                                                const BmParams& params, const StepOptions& opts);

/// Same with a fixed number of steps (no refinement, no containment check).
Envelope evolve_envelope_fixed(const Envelope& f0, double t, int steps, const BmParams& params);

/// T(r) = w sum_n T_n e^{-i s_n r}.
Eigen::Matrix2cd moire_potential(const Vec2& r, const BmParams& params);

}  // namespace tbg
