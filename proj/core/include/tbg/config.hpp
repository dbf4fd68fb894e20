#pragma once

#include "tbg/bm_model.hpp"
#include "tbg/geometry.hpp"
#include "tbg/hamiltonian.hpp"
#include "tbg/propagator.hpp"
#include "tbg/wavepacket.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace tbg {

/// Flat "section.key = value" text. '#' starts a comment; lists are comma separated.
std::map<std::string, std::string> parse_key_values(const std::string& text);

struct TruncationSettings {
  std::vector<double> radii{25.0, 35.0, 50.0};
  double reference_radius = 60.0;
  std::vector<double> times{5.0, 10.0, 20.0};
  double r = 10.0;        // initial data are cut to B_r
  double sigma_r = 3.3;
  int patterns = 4;       // leading entries of the enumerated coefficient patterns
  double nu = 0.5;
  int d_points = 60;
};

struct BandSettings {
  int path_points = 60;   // per segment of Gamma_m - K_m - M_m - Gamma_m
  int grid_n = 12;        // flatness grid over the moire cell
  double check_theta_deg = 5.0;
  int check_cutoff = 4;
};

struct CompareSettings {
  std::vector<double> times{0.0, 1.0, 2.0, 3.0, 4.0};
  double radius = 0.0;    // 0: chosen from sigma_r and the final time
  double r = 10.0;
  bool write_snapshots = true;
};

struct ScalingSettings {
  std::vector<double> times{1.0, 2.0, 3.0, 4.0};
  double lambda0 = 0.42;
  double lambda1 = 0.17;
  std::vector<double> regime_eps{0.06, 0.08, 0.10, 0.12, 0.14};
  std::vector<double> hfrak{0.02, 0.03, 0.042, 0.06, 0.08};
  std::vector<double> eps{0.06, 0.08, 0.10, 0.12, 0.14};
  std::vector<double> theta_deg{1.0, 2.0, 3.0, 4.0, 5.0};
  double eps_fixed = 0.1;
  double theta_fixed_deg = 1.05;
  int patterns = 4;
  double front_speed = 6.6;  // Angstrom per hbar/eV, sizes the lattice disk
  double margin = 10.0;
  std::vector<std::string> substudies{"regime", "hfrak", "eps", "theta"};
};

struct FlatSettings {
  std::vector<double> times{1.0, 2.0, 3.0, 4.0};
  double sigma_r = 10.0;
  Vec2 k1{0.0, -0.02};
  int dispersive_band = 3;
  int flat_band = 2;
};

struct BoundSettings {
  double t = 10.0;
  double target = 1e-3;
  double r = 10.0;
  double phi_r = 0.0;
  double psi0_norm_inside = 1.0;
  double nu = 0.5;
  int d_points = 40;
};

struct RunConfig {
  std::string preset = "desk";
  LatticeParams lattice{2.5, 1.05 * 3.14159265358979323846 / 180.0, 3.5};
  HoppingModel hopping;
  bool bm_derived = true;
  double bm_v = 6.6;
  double bm_w = 0.11;
  int bm_cutoff = 5;
  WavepacketSpec wavepacket;
  SigmaUnits sigma_units = SigmaUnits::Angstrom;
  double epsilon = 0.1;
  PropagatorOptions propagation;
  StepOptions bm_step;
  double grid_spacing = 2.0;  // envelope grid, Angstrom
  int threads = 0;

  TruncationSettings truncation;
  BandSettings bands;
  CompareSettings compare;
  ScalingSettings scaling;
  FlatSettings flat;
  BoundSettings bound;

  static RunConfig preset_named(const std::string& name);

  /// Applies parsed key/values; unknown keys throw ConfigError.
  void apply(const std::map<std::string, std::string>& kv);
  void apply_file(const std::filesystem::path& path);

  BmParams bm_params() const;
  /// Envelope grid covering [-half, half)^2 with the configured spacing (even size).
  Grid grid_for(double half) const;

  /// Single-line JSON of every resolved setting plus convention stamps.
  std::string to_json() const;
};

/// The four equal-norm per-component coefficient patterns used for averaging.
std::array<std::complex<double>, 4> coefficient_pattern(int index);

std::vector<double> parse_list(const std::string& s);

}  // namespace tbg
