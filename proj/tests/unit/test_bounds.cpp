#include "tbg/bounds.hpp"
#include "tbg/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace tbg;

namespace {
LatticeParams paper() { return {2.5, 1.05 * std::numbers::pi / 180.0, 3.5}; }
}  // namespace

TEST_CASE("alpha_max solves its defining equation") {
  const HoppingModel m;
  for (double d : {1e-3, 0.1, 1.0, 5.0}) {
    const double a = solve_alpha_max(d, 0.5, m, paper());
    CHECK(a > 0.0);
    CHECK(a < m.alpha0);
    CHECK(combes_thomas_lhs(a, m, paper()) == doctest::Approx(0.5 * d).epsilon(1e-9));
  }
  CHECK(solve_alpha_max(0.1, 0.5, m, paper()) < solve_alpha_max(1.0, 0.5, m, paper()));
}

TEST_CASE("small-d limit alpha_max v_max / d -> 1") {
  const HoppingModel m;
  const double r3 = solve_alpha_max(1e-3, 0.5, m, paper()) * v_max(m, paper()) / 1e-3;
  const double r4 = solve_alpha_max(1e-4, 0.5, m, paper()) * v_max(m, paper()) / 1e-4;
  CHECK(std::abs(r3 - 1.0) < 0.02);
  CHECK(std::abs(r4 - 1.0) < std::abs(r3 - 1.0));
}

TEST_CASE("certificate recomputes and decays with R") {
  const HoppingModel m;
  // alpha_max ~ d / v_max is small, so the decay only wins once R alpha >> 1
  const ContourSpec c = ContourSpec::rectangle(10.0, 5.0);
  const auto b1 = truncation_bound(5e4, 10.0, 1.0, c, 0.5, 1.0, 0.0, m, paper());
  const auto b2 = truncation_bound(2e5, 10.0, 1.0, c, 0.5, 1.0, 0.0, m, paper());
  CHECK(b1.recompute() == doctest::Approx(b1.bound_value).epsilon(1e-12));
  CHECK(b2.bound_value < b1.bound_value);
  const auto b3 = truncation_bound(5e4, 10.0, 1.0, c, 0.5, 1.0, 0.25, m, paper());
  CHECK(b3.bound_value == doctest::Approx(b1.bound_value + 0.25));
  CHECK_THROWS_AS(truncation_bound(5.0, 10.0, 1.0, c, 0.5, 1.0, 0.0, m, paper()), PreconditionError);
}

TEST_CASE("planner returns a feasible, nearly minimal radius") {
  const HoppingModel m;
  PlannerOptions o;
  o.half_width = 12.0;
  const RadiusPlan p = plan_radius(2.0, 1e-3, 10.0, 1.0, 0.0, m, paper(), o);
  CHECK(p.certificate.bound_value <= 1e-3 * (1 + 1e-9));
  const auto shorter = truncation_bound(0.98 * p.R, 10.0, 2.0, ContourSpec::rectangle(12.0, p.d), 0.5, 1.0, 0.0, m,
                                        paper());
  CHECK(shorter.bound_value > 1e-3);
  CHECK_THROWS_AS(plan_radius(2.0, 1e-3, 10.0, 1.0, 2e-3, m, paper(), o), InfeasibleError);
}

TEST_CASE("counting bound") {
  CHECK(counting_bound(10.0, paper()) == 4 * 10 * 10);
}
