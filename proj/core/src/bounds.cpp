#include "tbg/bounds.hpp"

#include "tbg/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace tbg {

namespace {

constexpr double kPi = std::numbers::pi;

double ct_prefactor(const HoppingModel& model, const LatticeParams& params) {
  return 8.0 * kPi * model.h0 * std::exp(params.delta() * model.alpha0) / params.cell_area();
}

double log_certificate_core(const BoundCertificate& c) {
  const double omega_term = c.h0 * static_cast<double>(c.omega_R_count) / (c.nu * c.nu * c.d * c.d) +
                            1.0 / (c.nu * c.d);
  return std::log(std::sqrt(2.0 / kPi) * c.C_gamma * c.C1 * omega_term) +
         0.5 * std::log(static_cast<double>(c.omega_r_count) / c.cell_area) -
         (c.alpha_max * (c.R - c.r) - c.d * c.t) + std::log(c.psi0_norm_inside);
}

}  // namespace

ContourSpec ContourSpec::rectangle(double half_width, double d) {
  if (!(d > 0.0)) throw PreconditionError("contour distance d must be positive");
  if (!(half_width >= 0.0)) throw PreconditionError("spectral half-width must be nonnegative");
  ContourSpec c;
  c.half_width = half_width;
  c.d = d;
  c.C_gamma = 2.0 * (2.0 * half_width + 2.0 * d) + 2.0 * (2.0 * d);
  return c;
}

double BoundCertificate::recompute() const {
  if (psi0_norm_inside == 0.0) return phi_r;
  return std::exp(log_certificate_core(*this)) + phi_r;
}

double combes_thomas_lhs(double alpha, const HoppingModel& model, const LatticeParams& params) {
  const double a0 = model.alpha0;
  const double delta = params.delta();
  // e^{delta a}/(a0-a)^2 - 1/a0^2 rewritten without cancellation for small alpha.
  const double num = a0 * a0 * std::expm1(delta * alpha) + alpha * (2.0 * a0 - alpha);
  const double den = a0 * a0 * (a0 - alpha) * (a0 - alpha);
  return ct_prefactor(model, params) * num / den;
}

double solve_alpha_max(double d, double nu, const HoppingModel& model, const LatticeParams& params) {
  if (!(d > 0.0)) throw PreconditionError("spectral distance d must be positive");
  if (!(nu > 0.0 && nu < 1.0)) throw PreconditionError("nu must lie in (0, 1)");
  model.validate();
  const double target = (1.0 - nu) * d;
  double lo = 0.0;
  double hi = model.alpha0;
  // LHS is strictly increasing on (0, alpha0), vanishes at 0 and diverges at alpha0.
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (combes_thomas_lhs(mid, model, params) < target)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-13 * hi) break;
  }
  const double alpha = 0.5 * (lo + hi);
  if (!(alpha > std::numeric_limits<double>::min()))
    throw ConvergenceError("alpha_max underflows; spectral distance d is too small");
  return alpha;
}

double resolvent_decay_bound(double d, double nu, double distance, const HoppingModel& model,
                             const LatticeParams& params) {
  const double alpha = solve_alpha_max(d, nu, model, params);
  return std::exp(-alpha * distance) / (nu * d);
}

double v_max(const HoppingModel& model, const LatticeParams& params) {
  const double da = params.delta() * model.alpha0;
  return 16.0 * kPi * std::exp(da) * (2.0 + da) * model.h0 /
         (params.cell_area() * std::pow(model.alpha0, 3));
}

std::int64_t counting_bound(double r, const LatticeParams& params) {
  if (!(r > 0.0)) throw PreconditionError("radius must be positive");
  const auto cells = static_cast<std::int64_t>(std::ceil(4.0 * r / (std::sqrt(3.0) * params.a)));
  return 4 * cells * cells;
}

double c2_constant(double alpha, double R, const LatticeParams& params) {
  return (1.0 + R * alpha - params.delta() * alpha) / (alpha * alpha);
}

double lattice_sum_bound(double R, double r, double alpha, const LatticeParams& params) {
  if (!(R > r)) throw PreconditionError("lattice sum bound needs R > r");
  if (!(r >= params.delta())) throw PreconditionError("lattice sum bound needs r >= delta");
  if (!(alpha > 0.0)) throw PreconditionError("decay rate must be positive");
  const double delta = params.delta();
  return 8.0 * kPi * std::exp(2.0 * delta * alpha) * static_cast<double>(counting_bound(r, params)) /
         params.cell_area() * c2_constant(alpha, R, params) * std::exp(-alpha * (R - r));
}

BoundCertificate truncation_bound(double R, double r, double t, const ContourSpec& contour, double nu,
                                  double psi0_norm_inside, double phi_r, const HoppingModel& model,
                                  const LatticeParams& params) {
  if (!(R > r)) throw PreconditionError("truncation bound needs R > r");
  if (!(contour.d > 0.0)) throw PreconditionError("contour distance must be positive");
  BoundCertificate c;
  c.d = contour.d;
  c.nu = nu;
  c.alpha_max = solve_alpha_max(contour.d, nu, model, params);
  c.C_gamma = contour.C_gamma;
  c.R = R;
  c.r = r;
  c.t = t;
  c.omega_R_count = counting_bound(R, params);
  c.omega_r_count = counting_bound(r, params);
  const double delta = params.delta();
  const double a = c.alpha_max;
  c.C1 = std::exp(delta * a) * std::sqrt(1.0 + 2.0 * R * a - 2.0 * delta * a) / (2.0 * a);
  c.phi_r = phi_r;
  c.h0 = model.h0;
  c.cell_area = params.cell_area();
  c.psi0_norm_inside = psi0_norm_inside;
  c.bound_value = c.recompute();
  return c;
}

RadiusPlan plan_radius_fixed_d(double t, double target_error, double r, double psi0_norm_inside,
                               double phi_r, double d, const HoppingModel& model,
                               const LatticeParams& params, const PlannerOptions& options) {
  if (!(target_error > phi_r)) throw InfeasibleError("target error must exceed the initial tail phi(r)");
  const ContourSpec contour = ContourSpec::rectangle(options.half_width, d);
  auto cert = [&](double R) {
    return truncation_bound(R, r, t, contour, options.nu, psi0_norm_inside, phi_r, model, params);
  };
  double step = params.delta();
  double R_fail = r;
  double R_ok = r + step;
  BoundCertificate c = cert(R_ok);
  while (c.bound_value > target_error) {
    R_fail = R_ok;
    step *= 2.0;
    R_ok = r + step;
    if (R_ok > options.R_cap) throw InfeasibleError("no truncation radius below R_cap meets the target");
    c = cert(R_ok);
  }
  if (R_fail > r) {
    for (int it = 0; it < 200 && R_ok - R_fail > 1e-10 * R_ok; ++it) {
      const double mid = 0.5 * (R_fail + R_ok);
      const BoundCertificate cm = cert(mid);
      if (cm.bound_value > target_error) {
        R_fail = mid;
      } else {
        R_ok = mid;
        c = cm;
      }
    }
  }
  return {R_ok, d, c};
}

RadiusPlan plan_radius(double t, double target_error, double r, double psi0_norm_inside,
                       double phi_r, const HoppingModel& model, const LatticeParams& params,
                       const PlannerOptions& options) {
  if (!(options.half_width > options.d_min))
    throw PreconditionError("planner needs half_width > d_min");
  if (options.d_points < 2) throw PreconditionError("planner needs at least two d points");
  const double log_lo = std::log(options.d_min);
  const double log_hi = std::log(options.half_width);
  auto d_at = [&](int k) { return std::exp(log_lo + (log_hi - log_lo) * k / (options.d_points - 1)); };

  RadiusPlan best;
  best.R = std::numeric_limits<double>::infinity();
  int best_k = -1;
  for (int k = 0; k < options.d_points; ++k) {
    try {
      RadiusPlan p = plan_radius_fixed_d(t, target_error, r, psi0_norm_inside, phi_r, d_at(k), model,
                                         params, options);
      if (p.R < best.R) {
        best = p;
        best_k = k;
      }
    } catch (const InfeasibleError&) {
    }
  }
  if (best_k < 0) throw InfeasibleError("no (d, R) pair meets the target below R_cap");

  // Golden-section refinement of d between the grid neighbours of the best point.
  double lo = std::log(d_at(std::max(best_k - 1, 0)));
  double hi = std::log(d_at(std::min(best_k + 1, options.d_points - 1)));
  auto radius_for = [&](double log_d) {
    try {
      return plan_radius_fixed_d(t, target_error, r, psi0_norm_inside, phi_r, std::exp(log_d), model,
                                 params, options);
    } catch (const InfeasibleError&) {
      RadiusPlan p;
      p.R = std::numeric_limits<double>::infinity();
      return p;
    }
  };
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - g * (hi - lo);
  double x2 = lo + g * (hi - lo);
  RadiusPlan p1 = radius_for(x1);
  RadiusPlan p2 = radius_for(x2);
  for (int it = 0; it < 30; ++it) {
    if (p1.R <= p2.R) {
      hi = x2;
      x2 = x1;
      p2 = p1;
      x1 = hi - g * (hi - lo);
      p1 = radius_for(x1);
    } else {
      lo = x1;
      x1 = x2;
      p1 = p2;
      x2 = lo + g * (hi - lo);
      p2 = radius_for(x2);
    }
  }
  if (p1.R < best.R) best = p1;
  if (p2.R < best.R) best = p2;
  return best;
}

}  // namespace tbg
