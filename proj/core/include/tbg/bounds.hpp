#pragma once

#include "tbg/geometry.hpp"
#include "tbg/hamiltonian.hpp"

#include <cstdint>

namespace tbg {

/// Rectangle [-(half_width + d), half_width + d] x [-d, d] in the complex
/// energy plane, at distance d from the interval [-half_width, half_width].
struct ContourSpec {
  double half_width = 0.0;
  double d = 0.0;
  double C_gamma = 0.0;  // perimeter

  static ContourSpec rectangle(double half_width, double d);
};

/// Inputs and value of the a-priori truncation error bound. Together with
/// (h0, cell_area, psi0_norm_inside) the stored fields reproduce bound_value.
struct BoundCertificate {
  double d = 0.0;
  double nu = 0.5;
  double alpha_max = 0.0;
  double C_gamma = 0.0;
  double R = 0.0;
  double r = 0.0;
  double t = 0.0;
  std::int64_t omega_R_count = 0;
  std::int64_t omega_r_count = 0;
  double C1 = 0.0;
  double bound_value = 0.0;
  double phi_r = 0.0;
  double h0 = 0.0;
  double cell_area = 0.0;
  double psi0_norm_inside = 1.0;

  /// Re-evaluates the bound from the stored fields.
  double recompute() const;
};

/// Root alpha in (0, alpha0) of
///   8 pi h0 e^{delta alpha0} / |Gamma| * [e^{delta alpha} / (alpha0 - alpha)^2 - 1 / alpha0^2] = (1 - nu) d
/// found by bisection to 1e-12 relative.
double solve_alpha_max(double d, double nu, const HoppingModel& model, const LatticeParams& params);

/// Left-hand side of the alpha_max equation (without the (1 - nu) d).
double combes_thomas_lhs(double alpha, const HoppingModel& model, const LatticeParams& params);

/// (1 / (nu d)) exp(-alpha_max * distance).
double resolvent_decay_bound(double d, double nu, double distance, const HoppingModel& model,
                             const LatticeParams& params);

/// Propagation-speed constant 16 pi e^{delta alpha0} (2 + delta alpha0) h0 / (|Gamma| alpha0^3),
/// in Angstrom per (hbar / eV).
double v_max(const HoppingModel& model, const LatticeParams& params);

/// 4 * ceil(4 r / (sqrt(3) a))^2, an upper bound on |Omega_r|.
std::int64_t counting_bound(double r, const LatticeParams& params);

/// (1 + R alpha - delta alpha) / alpha^2.
double c2_constant(double alpha, double R, const LatticeParams& params);

/// Upper bound on sum_{x outside Omega_R} sum_{y in Omega_r} exp(-alpha |x - y|).
double lattice_sum_bound(double R, double r, double alpha, const LatticeParams& params);

BoundCertificate truncation_bound(double R, double r, double t, const ContourSpec& contour, double nu,
                                  double psi0_norm_inside, double phi_r, const HoppingModel& model,
                                  const LatticeParams& params);

struct RadiusPlan {
  double R = 0.0;
  double d = 0.0;
  BoundCertificate certificate;
};

struct PlannerOptions {
  double nu = 0.5;
  double half_width = 0.0;  // spectral half-width; upper end of the d grid
  double d_min = 1e-3;
  int d_points = 40;
  double R_cap = 1e6;
};

/// Smallest R (over a logarithmic d grid) whose certificate meets `target_error`.
/// Throws InfeasibleError when no R <= R_cap works.
RadiusPlan plan_radius(double t, double target_error, double r, double psi0_norm_inside,
                       double phi_r, const HoppingModel& model, const LatticeParams& params,
                       const PlannerOptions& options);

/// Same search at a fixed contour distance d.
RadiusPlan plan_radius_fixed_d(double t, double target_error, double r, double psi0_norm_inside,
                               double phi_r, double d, const HoppingModel& model,
                               const LatticeParams& params, const PlannerOptions& options);

}  // namespace tbg
