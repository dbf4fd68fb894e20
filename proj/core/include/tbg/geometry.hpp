#pragma once

#include <Eigen/Dense>

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace tbg {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Counter-clockwise rotation by `eta` radians.
Mat2 rotation(double eta);

/// Monolayer and bilayer lattice parameters. Lengths in Angstrom, angles in
/// radians. Negative twist angles are accepted so that mirror-image runs
/// (theta -> -theta) can be compared; all derived quantities carry the sign of
/// theta through sin(theta / 2).
struct LatticeParams {
  double a = 2.5;
  double theta = 0.0;
  double L = 3.5;

  void validate() const;

  /// Nearest-neighbour distance a / sqrt(3).
  double delta() const;
  /// Area of the monolayer unit cell, sqrt(3) a^2 / 2.
  double cell_area() const;
  /// |K| = 4 pi / (3 a).
  double dirac_norm() const;
  /// Signed 2 |K| sin(theta / 2); its magnitude is the Dirac-point separation.
  double delta_k() const;
};

enum class Sublattice : std::uint8_t { A = 0, B = 1 };

struct SiteIndex {
  int layer = 1;  // 1 or 2
  Sublattice sublattice = Sublattice::A;
  int n1 = 0;
  int n2 = 0;

  // Lexicographic on (layer, sublattice, n1, n2).
  auto operator<=>(const SiteIndex&) const = default;
};

struct MonolayerBasis {
  Mat2 A;  // columns a_1, a_2
  Mat2 B;  // columns b_1, b_2 with a_i . b_j = 2 pi delta_ij
  Vec2 K;
  Vec2 K_prime;
  Vec2 tau_a;
  Vec2 tau_b;
};

MonolayerBasis monolayer_basis(const LatticeParams& params);

struct LayerBasis {
  Mat2 A;
  Mat2 B;
  Vec2 K;
  std::array<Vec2, 2> tau;  // indexed by Sublattice
};

/// Layer 1 is rotated by -theta/2 and layer 2 by +theta/2.
struct BilayerBasis {
  std::array<LayerBasis, 2> layers;

  const LayerBasis& layer(int j) const { return layers.at(static_cast<std::size_t>(j - 1)); }
};

BilayerBasis tbg_basis(const LatticeParams& params);

/// Moire reciprocal/real lattice and the moire Dirac point.
struct MoireData {
  Vec2 b_m1;
  Vec2 b_m2;
  Vec2 a_m1;
  Vec2 a_m2;
  Vec2 K_m;
  std::string K_m_convention;
};

inline constexpr const char* kMoireKConvention = "K_m=(2*b_m1+b_m2)/3";

/// Throws DegenerateAngleError when theta == 0.
MoireData moire_data(const LatticeParams& params);

/// Physical position R_i + tau_i^sigma of an orbital.
Vec2 site_position(const BilayerBasis& basis, const SiteIndex& site);

/// Orbitals of the bilayer inside the closed disk |x| <= radius, ordered
/// lexicographically by SiteIndex.
class SiteTable {
 public:
  SiteTable() = default;
  SiteTable(LatticeParams params, double radius, std::vector<SiteIndex> sites,
            std::vector<Vec2> positions);

  const LatticeParams& params() const { return params_; }
  double radius() const { return radius_; }
  std::size_t size() const { return sites_.size(); }
  bool empty() const { return sites_.empty(); }

  const std::vector<SiteIndex>& sites() const { return sites_; }
  const std::vector<Vec2>& positions() const { return positions_; }
  const SiteIndex& site(std::size_t i) const { return sites_[i]; }
  const Vec2& position(std::size_t i) const { return positions_[i]; }

  /// Row of `site`, if present.
  std::optional<std::size_t> find(const SiteIndex& site) const;

 private:
  LatticeParams params_{};
  double radius_ = 0.0;
  std::vector<SiteIndex> sites_;
  std::vector<Vec2> positions_;
};

SiteTable enumerate_sites(const LatticeParams& params, double radius);

/// CSV with columns layer,sublattice,n1,n2,x,y.
void write_sites_csv(const SiteTable& table, std::ostream& out);

char sublattice_name(Sublattice s);

/// Index 0..3 of the envelope component (f1A, f1B, f2A, f2B) carried by `site`.
inline int component_of(const SiteIndex& site) {
  return 2 * (site.layer - 1) + static_cast<int>(site.sublattice);
}

}  // namespace tbg
