#pragma once

#include "tbg/bounds.hpp"
#include "tbg/config.hpp"
#include "tbg/fit.hpp"
#include "tbg/output.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace tbg {

// Every study writes CSVs and a run.json into `out` unless `out` is empty.

// ---- bands ----

struct BandsResult {
  std::vector<BandPoint> path;
  double v = 0.0;
  double flat_width_lower = 0.0;  // band 1 over the grid
  double flat_width_upper = 0.0;  // band 2
  double flat_grad_Km = 0.0;      // one-sided cone slope of band 2 at K_m
  double third_grad_Km = 0.0;
  Vec2 grad_k1 = Vec2::Zero();    // band 3
  Vec2 grad_k2 = Vec2::Zero();
  double check_theta_flat_width = 0.0;  // max flat-pair width at bands.check_theta_deg
};

/// Gamma_m - K_m - M_m - Gamma_m path with `per_segment` points per leg.
std::vector<Vec2> moire_path(const BmParams& bm, int per_segment);
/// Largest width (max - min) of band n over an n_grid x n_grid sampling of the moire cell.
double band_width(int band, const BmParams& bm, int cutoff, int n_grid);
/// Direction of a 2D vector in degrees, in (-180, 180].
double direction_deg(const Vec2& g);

BandsResult study_bands(const RunConfig& cfg, const std::filesystem::path& out);

// ---- certified truncation ----

/// Smallest certificate over a logarithmic grid of contour distances d.
BoundCertificate best_certificate(double R, double r, double t, double nu, double psi0_norm_inside,
                                  double phi_r, double half_width, int d_points,
                                  const HoppingModel& model, const LatticeParams& params);

struct TruncationRow {
  double R = 0.0;
  double t = 0.0;
  double error_mean = 0.0;  // over coefficient patterns, relative to ||psi0||
  double error_max = 0.0;
  double certificate = 0.0;            // radius R
  double certificate_reference = 0.0;  // reference radius
  /// Bound on ||P_R psi_R(t) - psi_R'(t)||: certificate(R) + certificate(R').
  double bound() const { return certificate + certificate_reference; }
};

struct TruncationFit {
  double t = 0.0;
  LineFit fit;  // log error vs R
};

struct TruncationResult {
  std::vector<TruncationRow> rows;
  std::vector<TruncationFit> fits;
  int violations = 0;
};

TruncationResult study_truncation(const RunConfig& cfg, const std::filesystem::path& out);

// ---- TB vs BM comparison ----

struct ComparisonSetup {
  LatticeParams lattice;
  HoppingModel hopping;
  WavepacketSpec packet;
  double radius = 0.0;
  std::vector<double> times;  // nondecreasing, may include 0
};

struct ComparisonSeries {
  std::vector<double> times;
  std::vector<double> error;  // ||sample(f_bm) - psi_tb||, unit initial norm
  std::vector<Vec2> centroid_tb;
  std::vector<Vec2> centroid_bm;
  std::vector<LatticeState> tb;
  std::vector<Envelope> bm;
  std::size_t sites = 0;
};

/// Disk radius that holds a packet of width sigma travelling for time t.
double comparison_radius(double sigma_r, double t_max, double front_speed, double margin);

/// Evolves both models from matched initial data. `initial` overrides the
/// envelope built from setup.packet (used for mirrored runs).
ComparisonSeries run_comparison(const RunConfig& cfg, const ComparisonSetup& setup,
                                const Envelope* initial = nullptr);

Vec2 lattice_centroid(const LatticeState& psi);
/// Least-squares velocity of centroid(t), Angstrom per hbar/eV.
Vec2 centroid_velocity(const std::vector<double>& times, const std::vector<Vec2>& centroids);

struct ChiralitySeries {
  std::vector<double> times;
  std::vector<double> tb;          // <L_z>(t) - <L_z>(first), fitted TB envelope
  std::vector<double> bm;
  std::vector<double> difference;  // tb - bm
  std::vector<double> resolution;  // |L_z(fit(sample(f_bm))) - L_z(f_bm)|
};

ChiralitySeries chirality_diagnostic(const ComparisonSeries& s);

/// Writes tb_t*.csv, bm_t*.csv, diff_t*.csv and errors.csv.
void write_comparison(const ComparisonSeries& s, const std::filesystem::path& out, const std::string& metadata,
                      bool snapshots);

struct FlatBandResult {
  ComparisonSeries dispersive;  // band-3 packet at k1
  ComparisonSeries flat;        // flat-band packet at K_m, +theta
  ComparisonSeries flat_mirror; // mirrored packet, -theta
  Vec2 velocity_dispersive_tb, velocity_dispersive_bm;
  Vec2 velocity_flat_tb, velocity_flat_bm;
  double speed_ratio_tb = 0.0;
  double speed_ratio_bm = 0.0;
  Vec2 grad_k1 = Vec2::Zero();
  ChiralitySeries chirality_plus, chirality_minus;
  ChiralitySeries chirality_dispersive;
  double bm_noise_threshold = 0.0;
};

FlatBandResult study_flat(const RunConfig& cfg, const std::filesystem::path& out);

/// Single packet comparison driven by cfg.wavepacket and cfg.compare.
ComparisonSeries study_compare(const RunConfig& cfg, const std::filesystem::path& out);

// ---- scaling ----

struct ScalingPoint {
  std::string substudy;
  double parameter = 0.0;  // eps, hfrak or theta (degrees)
  double epsilon = 0.0;
  double hfrak = 0.0;
  double theta_deg = 0.0;
  std::vector<double> times;
  std::vector<double> error_mean;
  std::vector<std::vector<double>> error_pattern;
};

struct ScalingFit {
  std::string substudy;
  std::string variable;  // "t", "epsilon", "hfrak" or "theta"
  LineFit fit;
};

struct ScalingResult {
  std::vector<ScalingPoint> points;
  std::vector<ScalingFit> fits;
  const ScalingFit* find(const std::string& substudy, const std::string& variable) const;
};

/// Mean TB-vs-BM error over the first `patterns` coefficient patterns.
ScalingPoint scaling_point(const RunConfig& cfg, double epsilon, double hfrak, double theta_deg);

ScalingResult study_scaling(const RunConfig& cfg, const std::filesystem::path& out);

// ---- single-model runs and the radius planner ----

void run_propagate_tb(const RunConfig& cfg, const std::filesystem::path& out);
void run_propagate_bm(const RunConfig& cfg, const std::filesystem::path& out);

RadiusPlan study_bound(const RunConfig& cfg, const std::filesystem::path& out);

}  // namespace tbg
