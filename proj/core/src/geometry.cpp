#include "tbg/geometry.hpp"

#include "tbg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace tbg {

namespace {
constexpr double kPi = std::numbers::pi;
}

Mat2 rotation(double eta) {
  Mat2 r;
  r << std::cos(eta), -std::sin(eta), std::sin(eta), std::cos(eta);
  return r;
}

void LatticeParams::validate() const {
  if (!(a > 0.0)) throw PreconditionError("lattice constant a must be positive");
  if (!(L >= 0.0)) throw PreconditionError("interlayer distance L must be nonnegative");
  if (!(std::abs(theta) < kPi / 3.0))
    throw PreconditionError("twist angle must satisfy |theta| < pi/3");
}

double LatticeParams::delta() const { return a / std::sqrt(3.0); }

double LatticeParams::cell_area() const { return std::sqrt(3.0) * a * a / 2.0; }

double LatticeParams::dirac_norm() const { return 4.0 * kPi / (3.0 * a); }

double LatticeParams::delta_k() const { return 2.0 * dirac_norm() * std::sin(theta / 2.0); }

MonolayerBasis monolayer_basis(const LatticeParams& params) {
  params.validate();
  const double a = params.a;
  const double s3 = std::sqrt(3.0);
  MonolayerBasis m;
  m.A.col(0) = Vec2(a / 2.0, s3 * a / 2.0);
  m.A.col(1) = Vec2(-a / 2.0, s3 * a / 2.0);
  const double bnorm = 4.0 * kPi / (3.0 * params.delta());
  m.B.col(0) = bnorm * Vec2(s3 / 2.0, 0.5);
  m.B.col(1) = bnorm * Vec2(-s3 / 2.0, 0.5);
  m.K = Vec2(params.dirac_norm(), 0.0);
  m.K_prime = -m.K;
  m.tau_a = Vec2::Zero();
  m.tau_b = Vec2(0.0, params.delta());
  return m;
}

BilayerBasis tbg_basis(const LatticeParams& params) {
  const MonolayerBasis mono = monolayer_basis(params);
  BilayerBasis out;
  const std::array<double, 2> angles{-params.theta / 2.0, params.theta / 2.0};
  for (std::size_t j = 0; j < 2; ++j) {
    const Mat2 rot = rotation(angles[j]);
    LayerBasis& lb = out.layers[j];
    lb.A = rot * mono.A;
    lb.B = rot * mono.B;
    lb.K = rot * mono.K;
    lb.tau[0] = rot * mono.tau_a;
    lb.tau[1] = rot * mono.tau_b;
  }
  return out;
}

MoireData moire_data(const LatticeParams& params) {
  params.validate();
  if (params.theta == 0.0)
    throw DegenerateAngleError("moire cell is infinite at theta = 0");
  const BilayerBasis bl = tbg_basis(params);
  MoireData m;
  m.b_m1 = bl.layers[0].B.col(0) - bl.layers[1].B.col(0);
  m.b_m2 = bl.layers[0].B.col(1) - bl.layers[1].B.col(1);
  Mat2 bm;
  bm.col(0) = m.b_m1;
  bm.col(1) = m.b_m2;
  // a_{m,i} . b_{m,j} = 2 pi delta_ij  <=>  A_m = 2 pi B_m^{-T}
  const Mat2 am = 2.0 * kPi * bm.transpose().inverse();
  m.a_m1 = am.col(0);
  m.a_m2 = am.col(1);
  m.K_m = (2.0 * m.b_m1 + m.b_m2) / 3.0;
  m.K_m_convention = kMoireKConvention;
  return m;
}

Vec2 site_position(const BilayerBasis& basis, const SiteIndex& site) {
  const LayerBasis& lb = basis.layer(site.layer);
  return lb.A * Vec2(site.n1, site.n2) + lb.tau[static_cast<std::size_t>(site.sublattice)];
}

SiteTable::SiteTable(LatticeParams params, double radius, std::vector<SiteIndex> sites,
                     std::vector<Vec2> positions)
    : params_(params), radius_(radius), sites_(std::move(sites)), positions_(std::move(positions)) {
  if (sites_.size() != positions_.size())
    throw DimensionMismatchError("site and position lists differ in length");
}

std::optional<std::size_t> SiteTable::find(const SiteIndex& site) const {
  const auto it = std::lower_bound(sites_.begin(), sites_.end(), site);
  if (it == sites_.end() || *it != site) return std::nullopt;
  return static_cast<std::size_t>(it - sites_.begin());
}

SiteTable enumerate_sites(const LatticeParams& params, double radius) {
  params.validate();
  if (!(radius > 0.0)) throw PreconditionError("truncation radius must be positive");
  const BilayerBasis basis = tbg_basis(params);
  // |n_i| <= |row_i(A^{-1})| (R + delta) and each row of A^{-1} has norm 2 / (sqrt(3) a).
  const int half_width =
      static_cast<int>(std::ceil((radius + params.delta()) * 2.0 / (std::sqrt(3.0) * params.a))) + 2;

  std::vector<SiteIndex> sites;
  std::vector<Vec2> positions;
  const double r2 = radius * radius;
  for (int layer = 1; layer <= 2; ++layer) {
    for (Sublattice sub : {Sublattice::A, Sublattice::B}) {
      for (int n1 = -half_width; n1 <= half_width; ++n1) {
        for (int n2 = -half_width; n2 <= half_width; ++n2) {
          const SiteIndex s{layer, sub, n1, n2};
          const Vec2 x = site_position(basis, s);
          if (x.squaredNorm() <= r2) {
            sites.push_back(s);
            positions.push_back(x);
          }
        }
      }
    }
  }
  return SiteTable(params, radius, std::move(sites), std::move(positions));
}

char sublattice_name(Sublattice s) { return s == Sublattice::A ? 'A' : 'B'; }

void write_sites_csv(const SiteTable& table, std::ostream& out) {
  out << "layer,sublattice,n1,n2,x,y\n";
  out.precision(17);
  for (std::size_t i = 0; i < table.size(); ++i) {
    const SiteIndex& s = table.site(i);
    const Vec2& x = table.position(i);
    out << s.layer << ',' << sublattice_name(s.sublattice) << ',' << s.n1 << ',' << s.n2 << ','
        << x.x() << ',' << x.y() << '\n';
  }
}

}  // namespace tbg
