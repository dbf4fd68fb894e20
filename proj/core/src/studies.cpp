#include "tbg/studies.hpp"

#include "tbg/errors.hpp"
#include "tbg/log.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace tbg {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double max_time(const std::vector<double>& times) {
  return times.empty() ? 0.0 : *std::max_element(times.begin(), times.end());
}

// Spectrum half-width of the untruncated operator: interior Gershgorin row
// sums plus the mass dropped by the interlayer cutoff.
double operator_half_width(const HoppingModel& model, const LatticeParams& params) {
  const double radius = std::max(3.0 * model.interlayer_cutoff, 30.0);
  auto table = std::make_shared<const SiteTable>(enumerate_sites(params, radius));
  return assemble(table, model).max_row_sum() + dropped_mass_bound(model, params);
}

LatticeState copy_onto(const LatticeState& from, std::shared_ptr<const SiteTable> table) {
  LatticeState out{table, Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(table->size()))};
  for (std::size_t i = 0; i < table->size(); ++i) {
    const auto j = from.table->find(table->site(i));
    if (!j) throw DimensionMismatchError("site missing from the source table");
    out.amplitudes[static_cast<Eigen::Index>(i)] = from.amplitudes[static_cast<Eigen::Index>(*j)];
  }
  return out;
}

std::vector<Vec2> cell_grid(const BmParams& bm, int n) {
  std::vector<Vec2> ks;
  ks.reserve(static_cast<std::size_t>(n * n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) ks.push_back(double(i) / n * bm.b_m1 + double(j) / n * bm.b_m2);
  return ks;
}

HoppingModel with_hfrak(HoppingModel model, const LatticeParams& lattice, double hfrak) {
  if (hfrak <= 0.0) return model;
  const double current = lattice.a * interlayer_strength(model, lattice) / dirac_velocity(model, lattice);
  model.h0 *= hfrak / current;  // w is linear in h0, v does not depend on it
  return model;
}

void write_chirality_rows(CsvWriter& w, const std::string& name, const ChiralitySeries& c) {
  for (std::size_t i = 0; i < c.times.size(); ++i)
    w.row({name, c.times[i], c.tb[i], c.bm[i], c.difference[i], c.resolution[i]});
}

}  // namespace

// ---------------------------------------------------------------- bands

std::vector<Vec2> moire_path(const BmParams& bm, int per_segment) {
  if (per_segment < 1) throw PreconditionError("path needs at least one point per segment");
  const Vec2 gamma = Vec2::Zero();
  const Vec2 m = 0.5 * bm.b_m1;
  const std::array<Vec2, 4> corners{gamma, bm.K_m, m, gamma};
  std::vector<Vec2> path;
  for (std::size_t s = 0; s + 1 < corners.size(); ++s)
    for (int i = 0; i < per_segment; ++i)
      path.push_back(corners[s] + (corners[s + 1] - corners[s]) * (double(i) / per_segment));
  path.push_back(gamma);
  return path;
}

double band_width(int band, const BmParams& bm, int cutoff, int n_grid) {
  const auto pts = bands(cell_grid(bm, n_grid), bm, cutoff);
  double lo = 1e300, hi = -1e300;
  for (const auto& p : pts) {
    const double e = p.energies[band_position(band, static_cast<int>(p.energies.size()))];
    lo = std::min(lo, e);
    hi = std::max(hi, e);
  }
  return hi - lo;
}

double direction_deg(const Vec2& g) { return std::atan2(g.y(), g.x()) / kDeg; }

BandsResult study_bands(const RunConfig& cfg, const std::filesystem::path& out) {
  const BmParams bm = cfg.bm_params();
  const int cut = cfg.bm_cutoff;
  BandsResult r;
  r.v = bm.v;
  r.path = bands(moire_path(bm, cfg.bands.path_points), bm, cut);

  const auto grid = bands(cell_grid(bm, cfg.bands.grid_n), bm, cut);
  auto width = [&](int n) {
    double lo = 1e300, hi = -1e300;
    for (const auto& p : grid) {
      const double e = p.energies[band_position(n, static_cast<int>(p.energies.size()))];
      lo = std::min(lo, e);
      hi = std::max(hi, e);
    }
    return hi - lo;
  };
  r.flat_width_lower = width(1);
  r.flat_width_upper = width(2);
  r.flat_grad_Km = group_velocity(2, bm.K_m, bm, cut, DegeneratePolicy::ConeSlope).norm();
  r.third_grad_Km = group_velocity(3, bm.K_m, bm, cut, DegeneratePolicy::ConeSlope).norm();
  r.grad_k1 = group_velocity(3, Vec2(0.0, -0.02), bm, cut);
  r.grad_k2 = group_velocity(3, Vec2(0.01, -0.0275), bm, cut);

  RunConfig check = cfg;
  check.lattice.theta = cfg.bands.check_theta_deg * kDeg;
  const BmParams bm5 = check.bm_params();
  r.check_theta_flat_width = std::max(band_width(1, bm5, cfg.bands.check_cutoff, cfg.bands.grid_n),
                                      band_width(2, bm5, cfg.bands.check_cutoff, cfg.bands.grid_n));

  if (!out.empty()) {
    const std::string meta = metadata_json(cfg.to_json(), {{"study", std::string("bands")}});
    write_bands_csv(out / "bands.csv", meta, r.path, 3);
    CsvWriter m(out / "band_metrics.csv", meta, {"name", "value"});
    const std::vector<std::pair<std::string, double>> rows{
        {"v", r.v},
        {"flat_width_band1", r.flat_width_lower},
        {"flat_width_band2", r.flat_width_upper},
        {"flat_grad_Km_over_v", r.flat_grad_Km / r.v},
        {"third_grad_Km_over_v", r.third_grad_Km / r.v},
        {"k1_grad_x", r.grad_k1.x()},
        {"k1_grad_y", r.grad_k1.y()},
        {"k1_grad_over_v", r.grad_k1.norm() / r.v},
        {"k1_direction_deg", direction_deg(r.grad_k1)},
        {"k2_grad_x", r.grad_k2.x()},
        {"k2_grad_y", r.grad_k2.y()},
        {"k2_grad_over_v", r.grad_k2.norm() / r.v},
        {"k2_direction_deg", direction_deg(r.grad_k2)},
        {"check_theta_flat_width", r.check_theta_flat_width},
    };
    for (const auto& [k, v] : rows) m.row({k, v});
    Manifest man("bands", cfg.to_json());
    man.add_file(out / "bands.csv", "band energies along Gamma_m-K_m-M_m-Gamma_m");
    man.add_file(out / "band_metrics.csv", "flat-band width and group velocities");
    for (const auto& [k, v] : rows) man.set(k, v);
    man.write(out);
  }
  return r;
}

// ---------------------------------------------------------------- truncation

BoundCertificate best_certificate(double R, double r, double t, double nu, double psi0_norm_inside,
                                  double phi_r, double half_width, int d_points,
                                  const HoppingModel& model, const LatticeParams& params) {
  if (d_points < 2) throw PreconditionError("need at least two contour distances");
  const double lo = std::log(1e-3), hi = std::log(half_width);
  BoundCertificate best;
  best.bound_value = std::numeric_limits<double>::infinity();
  for (int k = 0; k < d_points; ++k) {
    const double d = std::exp(lo + (hi - lo) * k / (d_points - 1));
    const BoundCertificate c = truncation_bound(R, r, t, ContourSpec::rectangle(half_width, d), nu,
                                                psi0_norm_inside, phi_r, model, params);
    if (c.bound_value < best.bound_value) best = c;
  }
  return best;
}

TruncationResult study_truncation(const RunConfig& cfg, const std::filesystem::path& out) {
  const auto& s = cfg.truncation;
  if (s.radii.empty() || s.times.empty()) throw PreconditionError("truncation study needs radii and times");
  for (double R : s.radii)
    if (!(R < s.reference_radius) || !(R > s.r))
      throw PreconditionError("truncation radii must lie in (r, reference radius)");
  if (s.patterns < 1 || s.patterns > 4) throw PreconditionError("truncation.patterns must be 1..4");

  const BmParams bm = cfg.bm_params();
  auto ref_table = std::make_shared<const SiteTable>(enumerate_sites(cfg.lattice, s.reference_radius));
  const SparseHermitian h_ref = assemble(ref_table, cfg.hopping);
  std::vector<std::shared_ptr<const SiteTable>> tables;
  std::vector<SparseHermitian> hs;
  for (double R : s.radii) {
    tables.push_back(std::make_shared<const SiteTable>(enumerate_sites(cfg.lattice, R)));
    hs.push_back(assemble(tables.back(), cfg.hopping));
  }
  PropagatorOptions po = cfg.propagation;
  po.snapshot_times = s.times;
  std::sort(po.snapshot_times.begin(), po.snapshot_times.end());

  const std::size_t nR = s.radii.size(), nt = po.snapshot_times.size();
  std::vector<std::vector<double>> sum(nR, std::vector<double>(nt, 0.0)), worst = sum;
  const Grid grid = cfg.grid_for(s.reference_radius + 12.0);
  for (int p = 0; p < s.patterns; ++p) {
    WavepacketSpec spec;
    spec.sigma_r = s.sigma_r;
    spec.coefficients = coefficient_pattern(p);
    const InitialCondition ic = make_initial(spec, bm, grid, ref_table);
    LatticeState psi0 = restrict_to_disk(ic.psi, s.r);
    psi0.amplitudes /= psi0.norm();
    const auto ref = evolve_snapshots(h_ref, psi0, po);
    for (std::size_t i = 0; i < nR; ++i) {
      const auto sol = evolve_snapshots(hs[i], copy_onto(psi0, tables[i]), po);
      for (std::size_t k = 0; k < nt; ++k) {
        const double e = (extend_to(sol[k], ref_table).amplitudes - ref[k].amplitudes).norm();
        sum[i][k] += e;
        worst[i][k] = std::max(worst[i][k], e);
      }
    }
  }

  const double half_width = operator_half_width(cfg.hopping, cfg.lattice);
  TruncationResult res;
  for (std::size_t k = 0; k < nt; ++k) {
    const double t = po.snapshot_times[k];
    const BoundCertificate cref = best_certificate(s.reference_radius, s.r, t, s.nu, 1.0, 0.0, half_width,
                                                   s.d_points, cfg.hopping, cfg.lattice);
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < nR; ++i) {
      TruncationRow row;
      row.R = s.radii[i];
      row.t = t;
      row.error_mean = sum[i][k] / s.patterns;
      row.error_max = worst[i][k];
      row.certificate = best_certificate(row.R, s.r, t, s.nu, 1.0, 0.0, half_width, s.d_points, cfg.hopping,
                                         cfg.lattice)
                            .bound_value;
      row.certificate_reference = cref.bound_value;
      if (row.error_max > row.bound()) ++res.violations;
      res.rows.push_back(row);
      xs.push_back(row.R);
      ys.push_back(std::max(row.error_mean, 1e-300));
    }
    if (xs.size() >= 2) res.fits.push_back({t, fit_loglinear(xs, ys)});
  }

  if (!out.empty()) {
    const std::string meta = metadata_json(cfg.to_json(), {{"study", std::string("truncation")},
                                                          {"spectral_half_width", half_width}});
    CsvWriter w(out / "truncation.csv", meta,
                {"R", "t", "relative_error", "error_max", "certificate_R", "certificate_reference", "bound"});
    for (const auto& row : res.rows)
      w.row({row.R, row.t, row.error_mean, row.error_max, row.certificate, row.certificate_reference, row.bound()});
    CsvWriter f(out / "truncation_fits.csv", meta, {"t", "slope_per_angstrom", "ci95", "r_squared"});
    for (const auto& fit : res.fits) f.row({fit.t, fit.fit.slope, fit.fit.slope_ci95, fit.fit.r_squared});
    Manifest man("truncation", cfg.to_json());
    man.add_file(out / "truncation.csv", "error vs R and t with certificates");
    man.add_file(out / "truncation_fits.csv", "log-linear fits of error vs R per t");
    man.set("violations", static_cast<long long>(res.violations));
    std::vector<double> r2;
    for (const auto& fit : res.fits) r2.push_back(fit.fit.r_squared);
    man.set("r_squared", r2);
    man.write(out);
  }
  return res;
}

// ---------------------------------------------------------------- comparison

double comparison_radius(double sigma_r, double t_max, double front_speed, double margin) {
  return 4.0 * sigma_r + front_speed * t_max + margin;
}

Vec2 lattice_centroid(const LatticeState& psi) {
  Vec2 c = Vec2::Zero();
  double m = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double rho = std::norm(psi.amplitudes[static_cast<Eigen::Index>(i)]);
    c += rho * psi.table->position(i);
    m += rho;
  }
  return m > 0.0 ? Vec2(c / m) : Vec2::Zero();
}

Vec2 centroid_velocity(const std::vector<double>& times, const std::vector<Vec2>& centroids) {
  if (times.size() != centroids.size() || times.size() < 2)
    throw PreconditionError("velocity fit needs at least two matching samples");
  double tm = 0.0;
  Vec2 cm = Vec2::Zero();
  for (std::size_t i = 0; i < times.size(); ++i) {
    tm += times[i];
    cm += centroids[i];
  }
  tm /= static_cast<double>(times.size());
  cm /= static_cast<double>(times.size());
  double stt = 0.0;
  Vec2 stc = Vec2::Zero();
  for (std::size_t i = 0; i < times.size(); ++i) {
    stt += (times[i] - tm) * (times[i] - tm);
    stc += (times[i] - tm) * (centroids[i] - cm);
  }
  if (stt == 0.0) throw PreconditionError("velocity fit needs distinct times");
  return stc / stt;
}

ComparisonSeries run_comparison(const RunConfig& cfg, const ComparisonSetup& setup, const Envelope* initial) {
  if (!(setup.radius > 0.0)) throw PreconditionError("comparison radius must be positive");
  BmParams bm = BmParams::derived(setup.hopping, setup.lattice);
  if (!cfg.bm_derived) bm = BmParams::make(cfg.bm_v, cfg.bm_w, setup.lattice);
  auto table = std::make_shared<const SiteTable>(enumerate_sites(setup.lattice, setup.radius));
  const SparseHermitian h = assemble(table, setup.hopping);
  const Grid grid = cfg.grid_for(std::max(4.0 * setup.packet.sigma_r, setup.radius + 12.0));

  Envelope f0;
  LatticeState psi0;
  if (initial) {
    f0 = *initial;
    psi0 = sample_envelope(f0, table);
    const double nrm = psi0.norm();
    if (nrm == 0.0) throw PreconditionError("initial state vanishes on the site table");
    psi0.amplitudes /= nrm;
    f0 *= 1.0 / nrm;
  } else {
    InitialCondition ic = make_initial(setup.packet, bm, grid, table);
    f0 = std::move(ic.envelope);
    psi0 = std::move(ic.psi);
  }

  PropagatorOptions po = cfg.propagation;
  po.snapshot_times = setup.times;
  ComparisonSeries s;
  s.times = setup.times;
  s.sites = table->size();
  s.tb = evolve_snapshots(h, psi0, po);
  s.bm = evolve_envelope_snapshots(f0, setup.times, bm, cfg.bm_step);
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    s.error.push_back(comparison_error(s.tb[i], s.bm[i]));
    s.centroid_tb.push_back(lattice_centroid(s.tb[i]));
    s.centroid_bm.push_back(s.bm[i].centroid());
  }
  return s;
}

ChiralitySeries chirality_diagnostic(const ComparisonSeries& s) {
  if (s.tb.size() != s.bm.size() || s.tb.empty()) throw PreconditionError("chirality needs matched snapshots");
  ChiralitySeries c;
  c.times = s.times;
  std::vector<double> ltb, lbm;
  for (std::size_t i = 0; i < s.tb.size(); ++i) {
    const Grid& g = s.bm[i].grid;
    ltb.push_back(angular_momentum(lattice_to_envelope(s.tb[i], g)));
    lbm.push_back(angular_momentum(s.bm[i]));
    const double round_trip = angular_momentum(lattice_to_envelope(sample_envelope(s.bm[i], s.tb[i].table), g));
    c.resolution.push_back(std::abs(round_trip - lbm.back()));
  }
  for (std::size_t i = 0; i < ltb.size(); ++i) {
    c.tb.push_back(ltb[i] - ltb.front());
    c.bm.push_back(lbm[i] - lbm.front());
    c.difference.push_back(c.tb.back() - c.bm.back());
  }
  return c;
}

void write_comparison(const ComparisonSeries& s, const std::filesystem::path& out, const std::string& metadata,
                      bool snapshots) {
  CsvWriter w(out / "errors.csv", metadata, {"t", "error", "tb_cx", "tb_cy", "bm_cx", "bm_cy"});
  for (std::size_t i = 0; i < s.times.size(); ++i)
    w.row({s.times[i], s.error[i], s.centroid_tb[i].x(), s.centroid_tb[i].y(), s.centroid_bm[i].x(),
           s.centroid_bm[i].y()});
  if (!snapshots) return;
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    const std::string label = time_label(s.times[i]);
    const std::string meta = metadata_json(metadata, {{"t", s.times[i]}});
    write_lattice_snapshot(out / ("tb_t" + label + ".csv"), meta, s.tb[i]);
    write_envelope_snapshot(out / ("bm_t" + label + ".csv"), meta, s.bm[i]);
    LatticeState diff = sample_envelope(s.bm[i], s.tb[i].table);
    diff.amplitudes = s.tb[i].amplitudes - diff.amplitudes;
    write_lattice_snapshot(out / ("diff_t" + label + ".csv"), meta, diff);
  }
}

ComparisonSeries study_compare(const RunConfig& cfg, const std::filesystem::path& out) {
  ComparisonSetup setup{cfg.lattice, cfg.hopping, cfg.wavepacket, cfg.compare.radius, cfg.compare.times};
  setup.packet.cutoff = cfg.bm_cutoff;
  if (setup.radius <= 0.0)
    setup.radius = comparison_radius(setup.packet.sigma_r, max_time(setup.times), cfg.scaling.front_speed,
                                     cfg.scaling.margin);
  if (setup.radius <= cfg.compare.r) throw PreconditionError("compare radius must exceed r");
  ComparisonSeries s = run_comparison(cfg, setup);
  if (!out.empty()) {
    const std::string meta =
        metadata_json(cfg.to_json(), {{"study", std::string("compare")}, {"radius", setup.radius},
                                      {"sites", static_cast<long long>(s.sites)}});
    write_comparison(s, out, meta, cfg.compare.write_snapshots);
    Manifest man("compare", cfg.to_json());
    man.add_file(out / "errors.csv", "error and centroids per time");
    if (cfg.compare.write_snapshots)
      for (double t : s.times)
        for (const char* kind : {"tb", "bm", "diff"})
          man.add_file(out / (std::string(kind) + "_t" + time_label(t) + ".csv"), std::string(kind) + " snapshot");
    man.set("radius", setup.radius);
    man.set("errors", s.error);
    man.write(out);
  }
  return s;
}

FlatBandResult study_flat(const RunConfig& cfg, const std::filesystem::path& out) {
  const auto& fs = cfg.flat;
  std::vector<double> times{0.0};
  for (double t : fs.times)
    if (t > 0.0) times.push_back(t);
  const BmParams bm = cfg.bm_params();
  const double radius = comparison_radius(fs.sigma_r, max_time(times), cfg.scaling.front_speed, cfg.scaling.margin);

  WavepacketSpec packet;
  packet.kind = PacketKind::BandConcentrated;
  packet.sigma_r = fs.sigma_r;
  packet.cutoff = cfg.bm_cutoff;

  FlatBandResult r;
  r.grad_k1 = group_velocity(fs.dispersive_band, fs.k1, bm, cfg.bm_cutoff);

  ComparisonSetup disp{cfg.lattice, cfg.hopping, packet, radius, times};
  disp.packet.band = fs.dispersive_band;
  disp.packet.k = fs.k1;
  r.dispersive = run_comparison(cfg, disp);

  ComparisonSetup flat = disp;
  flat.packet.band = fs.flat_band;
  flat.packet.k = bm.K_m;
  r.flat = run_comparison(cfg, flat);

  // Mirror image: -theta with the reflected initial envelope.
  ComparisonSetup mirror = flat;
  mirror.lattice.theta = -cfg.lattice.theta;
  const Envelope f_mirror = mirror_envelope(r.flat.bm.front());
  r.flat_mirror = run_comparison(cfg, mirror, &f_mirror);

  r.velocity_dispersive_tb = centroid_velocity(times, r.dispersive.centroid_tb);
  r.velocity_dispersive_bm = centroid_velocity(times, r.dispersive.centroid_bm);
  r.velocity_flat_tb = centroid_velocity(times, r.flat.centroid_tb);
  r.velocity_flat_bm = centroid_velocity(times, r.flat.centroid_bm);
  r.speed_ratio_tb = r.velocity_flat_tb.norm() / r.velocity_dispersive_tb.norm();
  r.speed_ratio_bm = r.velocity_flat_bm.norm() / r.velocity_dispersive_bm.norm();

  r.chirality_plus = chirality_diagnostic(r.flat);
  r.chirality_minus = chirality_diagnostic(r.flat_mirror);
  r.chirality_dispersive = chirality_diagnostic(r.dispersive);
  // Noise scale: 5% of the angular momentum a dispersive packet picks up.
  r.bm_noise_threshold = 0.05 * std::abs(r.chirality_dispersive.bm.back());

  if (!out.empty()) {
    const std::string base = cfg.to_json();
    auto meta = [&](const std::string& name) {
      return metadata_json(base, {{"study", std::string("flat_band")}, {"case", name}, {"radius", radius}});
    };
    write_comparison(r.dispersive, out / "dispersive", meta("dispersive"), cfg.compare.write_snapshots);
    write_comparison(r.flat, out / "flat", meta("flat"), cfg.compare.write_snapshots);
    write_comparison(r.flat_mirror, out / "flat_mirror", meta("flat_mirror"), cfg.compare.write_snapshots);
    CsvWriter w(out / "chirality.csv", meta("chirality"), {"case", "t", "L_tb", "L_bm", "difference", "resolution"});
    write_chirality_rows(w, "flat_plus_theta", r.chirality_plus);
    write_chirality_rows(w, "flat_minus_theta", r.chirality_minus);
    write_chirality_rows(w, "dispersive", r.chirality_dispersive);
    Manifest man("flat_band", base);
    man.add_file(out / "chirality.csv", "angular-momentum diagnostic, TB vs BM, both twist signs");
    man.add_file(out / "dispersive" / "errors.csv", "k1 packet errors and centroids");
    man.set("speed_ratio_tb", r.speed_ratio_tb);
    man.set("speed_ratio_bm", r.speed_ratio_bm);
    man.set("k1_grad", std::vector<double>{r.grad_k1.x(), r.grad_k1.y()});
    man.set("k1_velocity_bm", std::vector<double>{r.velocity_dispersive_bm.x(), r.velocity_dispersive_bm.y()});
    man.set("k1_velocity_tb", std::vector<double>{r.velocity_dispersive_tb.x(), r.velocity_dispersive_tb.y()});
    man.set("bm_noise_threshold", r.bm_noise_threshold);
    man.set("radius", radius);
    man.write(out);
  }
  return r;
}

// ---------------------------------------------------------------- scaling

const ScalingFit* ScalingResult::find(const std::string& substudy, const std::string& variable) const {
  for (const auto& f : fits)
    if (f.substudy == substudy && f.variable == variable) return &f;
  return nullptr;
}

ScalingPoint scaling_point(const RunConfig& cfg, double epsilon, double hfrak, double theta_deg) {
  const auto& s = cfg.scaling;
  if (s.patterns < 1 || s.patterns > 4) throw PreconditionError("scaling.patterns must be 1..4");
  if (s.times.empty()) throw PreconditionError("scaling study needs times");
  LatticeParams lattice = cfg.lattice;
  lattice.theta = theta_deg * kDeg;
  const HoppingModel model = with_hfrak(cfg.hopping, lattice, hfrak);

  ScalingPoint p;
  p.epsilon = epsilon;
  p.theta_deg = theta_deg;
  p.hfrak = lattice.a * interlayer_strength(model, lattice) / dirac_velocity(model, lattice);
  p.times = s.times;
  p.error_mean.assign(s.times.size(), 0.0);

  WavepacketSpec packet;
  packet.sigma_r = sigma_from_epsilon(epsilon, cfg.sigma_units, lattice.a);
  const double radius = comparison_radius(packet.sigma_r, max_time(s.times), s.front_speed, s.margin);
  RunConfig local = cfg;
  local.bm_derived = true;
  for (int k = 0; k < s.patterns; ++k) {
    packet.coefficients = coefficient_pattern(k);
    const ComparisonSeries series = run_comparison(local, {lattice, model, packet, radius, s.times});
    p.error_pattern.push_back(series.error);
    for (std::size_t i = 0; i < series.error.size(); ++i) p.error_mean[i] += series.error[i] / s.patterns;
  }
  return p;
}

ScalingResult study_scaling(const RunConfig& cfg, const std::filesystem::path& out) {
  const auto& s = cfg.scaling;
  ScalingResult res;
  const double theta_fixed = s.theta_fixed_deg;

  auto fit_vs = [&](const std::string& name, const std::string& variable, bool by_time) {
    std::vector<double> x, y;
    std::vector<int> group;
    int gi = 0;
    for (const auto& p : res.points) {
      if (p.substudy != name) continue;
      for (std::size_t i = 0; i < p.times.size(); ++i) {
        x.push_back(by_time ? p.times[i] : p.parameter);
        y.push_back(p.error_mean[i]);
        group.push_back(by_time ? gi : static_cast<int>(i));
      }
      ++gi;
    }
    if (x.size() >= 3) res.fits.push_back({name, variable, fit_loglog(x, y, group)});
  };

  for (const auto& name : s.substudies) {
    std::vector<double> params;
    if (name == "regime") params = s.regime_eps;
    else if (name == "hfrak") params = s.hfrak;
    else if (name == "eps") params = s.eps;
    else if (name == "theta") params = s.theta_deg;
    if (params.empty()) throw PreconditionError("scaling sub-study '" + name + "' has an empty sweep");
    for (double v : params) {
      ScalingPoint p;
      if (name == "regime") p = scaling_point(cfg, v, s.lambda0 * v, s.lambda1 * v / kDeg);
      else if (name == "hfrak") p = scaling_point(cfg, s.eps_fixed, v, theta_fixed);
      else if (name == "eps") p = scaling_point(cfg, v, 0.0, theta_fixed);
      else p = scaling_point(cfg, s.eps_fixed, 0.0, v);
      p.substudy = name;
      p.parameter = v;
      res.points.push_back(std::move(p));
    }
    if (name == "regime") {
      fit_vs(name, "t", true);
      fit_vs(name, "epsilon", false);
    } else {
      fit_vs(name, name == "eps" ? "epsilon" : name, false);
    }
  }

  if (!out.empty()) {
    const std::string meta = metadata_json(cfg.to_json(), {{"study", std::string("scaling")}});
    CsvWriter w(out / "scaling.csv", meta,
                {"substudy", "parameter", "epsilon", "hfrak", "theta_deg", "t", "error", "error_min", "error_max"});
    for (const auto& p : res.points)
      for (std::size_t i = 0; i < p.times.size(); ++i) {
        double lo = 1e300, hi = 0.0;
        for (const auto& e : p.error_pattern) {
          lo = std::min(lo, e[i]);
          hi = std::max(hi, e[i]);
        }
        w.row({p.substudy, p.parameter, p.epsilon, p.hfrak, p.theta_deg, p.times[i], p.error_mean[i], lo, hi});
      }
    CsvWriter f(out / "scaling_fits.csv", meta,
                {"substudy", "variable", "slope", "ci95", "residual_rms", "r_squared", "dof"});
    for (const auto& fit : res.fits)
      f.row({fit.substudy, fit.variable, fit.fit.slope, fit.fit.slope_ci95, fit.fit.residual_rms, fit.fit.r_squared,
             static_cast<long long>(fit.fit.dof)});
    Manifest man("scaling", cfg.to_json());
    man.add_file(out / "scaling.csv", "mean TB-vs-BM error per sweep point and time");
    man.add_file(out / "scaling_fits.csv", "log-log slopes with 95% half-widths");
    for (const auto& fit : res.fits) man.set("slope_" + fit.substudy + "_vs_" + fit.variable, fit.fit.slope);
    man.write(out);
  }
  return res;
}

// ---------------------------------------------------------------- single models

namespace {

std::vector<double> run_times(const RunConfig& cfg) {
  return cfg.propagation.snapshot_times.empty() ? cfg.compare.times : cfg.propagation.snapshot_times;
}

double run_radius(const RunConfig& cfg, const std::vector<double>& times) {
  return cfg.compare.radius > 0.0 ? cfg.compare.radius
                                  : comparison_radius(cfg.wavepacket.sigma_r, max_time(times),
                                                      cfg.scaling.front_speed, cfg.scaling.margin);
}

}  // namespace

void run_propagate_tb(const RunConfig& cfg, const std::filesystem::path& out) {
  const auto times = run_times(cfg);
  const double radius = run_radius(cfg, times);
  auto table = std::make_shared<const SiteTable>(enumerate_sites(cfg.lattice, radius));
  const SparseHermitian h = assemble(table, cfg.hopping);
  WavepacketSpec spec = cfg.wavepacket;
  spec.cutoff = cfg.bm_cutoff;
  const InitialCondition ic =
      make_initial(spec, cfg.bm_params(), cfg.grid_for(std::max(4.0 * spec.sigma_r, radius + 12.0)), table);
  PropagatorOptions po = cfg.propagation;
  po.snapshot_times = times;
  const auto states = evolve_snapshots(h, ic.psi, po);
  const std::string meta = metadata_json(cfg.to_json(), {{"study", std::string("propagate-tb")},
                                                        {"radius", radius},
                                                        {"sites", static_cast<long long>(table->size())}});
  Manifest man("propagate-tb", cfg.to_json());
  CsvWriter w(out / "tb_norms.csv", meta, {"t", "norm", "energy", "cx", "cy"});
  for (std::size_t i = 0; i < times.size(); ++i) {
    const Vec2 c = lattice_centroid(states[i]);
    w.row({times[i], states[i].norm(), energy(h, states[i]), c.x(), c.y()});
    const auto path = out / ("tb_t" + time_label(times[i]) + ".csv");
    write_lattice_snapshot(path, metadata_json(meta, {{"t", times[i]}}), states[i]);
    man.add_file(path, "tight-binding amplitudes");
  }
  man.add_file(out / "tb_norms.csv", "norm, energy and centroid per time");
  man.set("radius", radius);
  man.set("sites", static_cast<long long>(table->size()));
  man.write(out);
}

void run_propagate_bm(const RunConfig& cfg, const std::filesystem::path& out) {
  const auto times = run_times(cfg);
  const double radius = run_radius(cfg, times);
  const BmParams bm = cfg.bm_params();
  WavepacketSpec spec = cfg.wavepacket;
  spec.cutoff = cfg.bm_cutoff;
  const Envelope f0 =
      make_envelope(spec, bm, cfg.grid_for(std::max(4.0 * spec.sigma_r, radius + 12.0)), cfg.lattice.cell_area());
  const auto states = evolve_envelope_snapshots(f0, times, bm, cfg.bm_step);
  const std::string meta = metadata_json(cfg.to_json(), {{"study", std::string("propagate-bm")}});
  Manifest man("propagate-bm", cfg.to_json());
  CsvWriter w(out / "bm_norms.csv", meta, {"t", "norm", "cx", "cy", "boundary_fraction"});
  for (std::size_t i = 0; i < times.size(); ++i) {
    const Vec2 c = states[i].centroid();
    w.row({times[i], std::sqrt(states[i].mass() / cfg.lattice.cell_area()), c.x(), c.y(),
           states[i].boundary_fraction()});
    const auto path = out / ("bm_t" + time_label(times[i]) + ".csv");
    write_envelope_snapshot(path, metadata_json(meta, {{"t", times[i]}}), states[i]);
    man.add_file(path, "continuum envelope");
  }
  man.add_file(out / "bm_norms.csv", "norm and centroid per time");
  man.write(out);
}

RadiusPlan study_bound(const RunConfig& cfg, const std::filesystem::path& out) {
  const auto& b = cfg.bound;
  PlannerOptions opts;
  opts.nu = b.nu;
  opts.d_points = b.d_points;
  opts.half_width = operator_half_width(cfg.hopping, cfg.lattice);
  const RadiusPlan plan =
      plan_radius(b.t, b.target, b.r, b.psi0_norm_inside, b.phi_r, cfg.hopping, cfg.lattice, opts);
  if (!out.empty()) {
    const std::string meta = metadata_json(cfg.to_json(), {{"study", std::string("bound")},
                                                          {"spectral_half_width", opts.half_width}});
    CsvWriter w(out / "bound.csv", meta, {"R", "d", "alpha_max", "C1", "bound"});
    const double step = std::max((plan.R - b.r) / 40.0, 1e-3);
    for (double R = b.r + step; R <= plan.R * 1.25; R += step) {
      const BoundCertificate c = best_certificate(R, b.r, b.t, b.nu, b.psi0_norm_inside, b.phi_r, opts.half_width,
                                                  b.d_points, cfg.hopping, cfg.lattice);
      w.row({R, c.d, c.alpha_max, c.C1, c.bound_value});
    }
    const auto& c = plan.certificate;
    Manifest man("bound", cfg.to_json());
    man.add_file(out / "bound.csv", "best certificate vs R");
    man.set("R", plan.R);
    man.set("d", plan.d);
    man.set("alpha_max", c.alpha_max);
    man.set("C_gamma", c.C_gamma);
    man.set("C1", c.C1);
    man.set("omega_R_count", static_cast<long long>(c.omega_R_count));
    man.set("omega_r_count", static_cast<long long>(c.omega_r_count));
    man.set("bound_value", c.bound_value);
    man.write(out);
  }
  return plan;
}

}  // namespace tbg
