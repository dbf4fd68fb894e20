#include "tbg/config.hpp"
#include "tbg/errors.hpp"
#include "tbg/studies.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <cstdio>
#include <iostream>

namespace {

struct Common {
  std::string config;
  std::string out = "out";
  std::string preset = "desk";
  int threads = 0;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "key = value config file")->check(CLI::ExistingFile);
  sub->add_option("--out", c.out, "output directory");
  sub->add_option("--preset", c.preset, "parameter preset")->check(CLI::IsMember({"desk", "paper"}));
  sub->add_option("--threads", c.threads, "OpenMP threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
}

tbg::RunConfig resolve(const Common& c) {
  tbg::RunConfig cfg = tbg::RunConfig::preset_named(c.preset);
  if (!c.config.empty()) cfg.apply_file(c.config);
  if (c.threads > 0) cfg.threads = c.threads;
  if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Twisted bilayer graphene wave-packet simulator"};
  app.require_subcommand(1);
  Common common;
  std::string compare_case = "packet";

  auto* bands = app.add_subcommand("bands", "BM band structure and flat-band metrics");
  auto* ptb = app.add_subcommand("propagate-tb", "tight-binding propagation of the configured packet");
  auto* pbm = app.add_subcommand("propagate-bm", "continuum propagation of the configured packet");
  auto* cmp = app.add_subcommand("compare", "TB vs BM snapshots and errors");
  cmp->add_option("--case", compare_case, "packet: configured packet; flat: flat-band study with +/-theta")
      ->check(CLI::IsMember({"packet", "flat"}));
  auto* trunc = app.add_subcommand("truncation-study", "error vs truncation radius with certificates");
  auto* scal = app.add_subcommand("scaling-study", "error scaling sweeps and slopes");
  auto* bound = app.add_subcommand("bound", "certified radius planner");
  for (auto* s : {bands, ptb, pbm, cmp, trunc, scal, bound}) add_common(s, common);

  CLI11_PARSE(app, argc, argv);

  try {
    const tbg::RunConfig cfg = resolve(common);
    const std::filesystem::path out = common.out;
    std::filesystem::create_directories(out);
    if (bands->parsed()) {
      const auto r = tbg::study_bands(cfg, out);
      std::printf("flat widths %.5f %.5f eV, |grad E(K_m)|/v = %.4f, k1 direction %.2f deg, k2 direction %.2f deg\n",
                  r.flat_width_lower, r.flat_width_upper, r.flat_grad_Km / r.v, tbg::direction_deg(r.grad_k1),
                  tbg::direction_deg(r.grad_k2));
    } else if (ptb->parsed()) {
      tbg::run_propagate_tb(cfg, out);
    } else if (pbm->parsed()) {
      tbg::run_propagate_bm(cfg, out);
    } else if (cmp->parsed()) {
      if (compare_case == "flat") {
        const auto r = tbg::study_flat(cfg, out);
        std::printf("flat/dispersive speed ratio: TB %.4f, BM %.4f\n", r.speed_ratio_tb, r.speed_ratio_bm);
      } else {
        const auto s = tbg::study_compare(cfg, out);
        for (std::size_t i = 0; i < s.times.size(); ++i) std::printf("t = %g  error = %.6g\n", s.times[i], s.error[i]);
      }
    } else if (trunc->parsed()) {
      const auto r = tbg::study_truncation(cfg, out);
      for (const auto& f : r.fits) std::printf("t = %g  R^2 = %.4f\n", f.t, f.fit.r_squared);
      std::printf("certificate violations: %d\n", r.violations);
    } else if (scal->parsed()) {
      const auto r = tbg::study_scaling(cfg, out);
      for (const auto& f : r.fits)
        std::printf("%s vs %s: slope %.3f +/- %.3f\n", f.substudy.c_str(), f.variable.c_str(), f.fit.slope,
                    f.fit.slope_ci95);
    } else if (bound->parsed()) {
      const auto p = tbg::study_bound(cfg, out);
      std::printf("R = %.3f A at d = %.4g eV, bound %.3g\n", p.R, p.d, p.certificate.bound_value);
    }
  } catch (const tbg::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
