#include "tbg/hamiltonian.hpp"

#include "tbg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <unordered_map>

namespace tbg {

namespace {

constexpr double kPi = std::numbers::pi;

double geometric_tolerance(const LatticeParams& params) { return 1e-9 * params.a; }

// Uniform square bins for neighbour search.
class BinGrid {
 public:
  BinGrid(const std::vector<Vec2>& positions, double bin_size) : size_(bin_size) {
    for (std::size_t i = 0; i < positions.size(); ++i) bins_[key(positions[i])].push_back(i);
  }

  template <class Fn>
  void for_each_near(const Vec2& x, Fn&& fn) const {
    const auto [bx, by] = coords(x);
    for (long dx = -1; dx <= 1; ++dx) {
      for (long dy = -1; dy <= 1; ++dy) {
        const auto it = bins_.find(pack(bx + dx, by + dy));
        if (it == bins_.end()) continue;
        for (std::size_t j : it->second) fn(j);
      }
    }
  }

 private:
  std::pair<long, long> coords(const Vec2& x) const {
    return {static_cast<long>(std::floor(x.x() / size_)), static_cast<long>(std::floor(x.y() / size_))};
  }
  static std::int64_t pack(long bx, long by) {
    return (static_cast<std::int64_t>(bx) << 32) ^ static_cast<std::int64_t>(by & 0xffffffff);
  }
  std::int64_t key(const Vec2& x) const {
    const auto [bx, by] = coords(x);
    return pack(bx, by);
  }

  double size_;
  std::unordered_map<std::int64_t, std::vector<std::size_t>> bins_;
};

}  // namespace

void HoppingModel::validate() const {
  if (!(t0 > 0.0 && h0 > 0.0 && alpha0 > 0.0))
    throw PreconditionError("hopping model requires t0, h0, alpha0 > 0");
  if (!(L >= 0.0)) throw PreconditionError("interlayer distance must be nonnegative");
  if (!(interlayer_cutoff > 0.0)) throw PreconditionError("interlayer cutoff must be positive");
}

double HoppingModel::kernel(double r) const { return h0 * std::exp(-alpha0 * std::sqrt(r * r + L * L)); }

double HoppingModel::decay_prefactor(const LatticeParams& params) const {
  return std::max(t0 * std::exp(alpha0 * params.delta()), h0 * std::exp(alpha0 * L));
}

double hopping_fourier(double xi_norm, const HoppingModel& model) {
  const double q2 = xi_norm * xi_norm + model.alpha0 * model.alpha0;
  const double q = std::sqrt(q2);
  return 2.0 * kPi * model.h0 * model.alpha0 * std::exp(-model.L * q) * (1.0 + model.L * q) /
         (q2 * q);
}

double hopping_fourier(const Vec2& xi, const HoppingModel& model) {
  return hopping_fourier(xi.norm(), model);
}

cplx intralayer_element(const SiteIndex& x, const SiteIndex& y, const BilayerBasis& basis,
                        const HoppingModel& model, const LatticeParams& params) {
  if (x.layer != y.layer) throw PreconditionError("intralayer element needs sites on one layer");
  const double dist = (site_position(basis, x) - site_position(basis, y)).norm();
  const double tol = geometric_tolerance(params);
  if (std::abs(dist - params.delta()) <= tol) return {-model.t0, 0.0};
  return {0.0, 0.0};
}

cplx interlayer_element(const SiteIndex& x, const SiteIndex& y, const BilayerBasis& basis,
                        const HoppingModel& model) {
  if (x.layer == y.layer) throw PreconditionError("interlayer element needs sites on different layers");
  const double dist = (site_position(basis, x) - site_position(basis, y)).norm();
  if (dist > model.interlayer_cutoff) return {0.0, 0.0};
  return {model.kernel(dist), 0.0};
}

SparseHermitian::SparseHermitian(std::shared_ptr<const SiteTable> table, std::vector<Entry> entries)
    : table_(std::move(table)), entries_(std::move(entries)) {
  if (!table_) throw PreconditionError("operator needs a site table");
  const std::size_t n = table_->size();
  std::vector<std::uint32_t> counts(n + 1, 0);
  for (const Entry& e : entries_) {
    if (e.row > e.col || e.col >= n) throw PreconditionError("entries must satisfy row <= col < n");
    ++counts[e.row + 1];
    if (e.row != e.col) ++counts[e.col + 1];
  }
  row_ptr_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) row_ptr_[i + 1] = row_ptr_[i] + counts[i + 1];
  col_idx_.resize(row_ptr_[n]);
  values_.resize(row_ptr_[n]);
  std::vector<std::uint32_t> fill(row_ptr_.begin(), row_ptr_.end() - 1);
  for (const Entry& e : entries_) {
    col_idx_[fill[e.row]] = e.col;
    values_[fill[e.row]++] = e.value;
    if (e.row != e.col) {
      col_idx_[fill[e.col]] = e.row;
      values_[fill[e.col]++] = std::conj(e.value);
    }
  }
  // Sort columns within each row so the matvec walks memory monotonically.
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t lo = row_ptr_[i];
    const std::uint32_t hi = row_ptr_[i + 1];
    std::vector<std::pair<std::uint32_t, cplx>> row;
    row.reserve(hi - lo);
    for (std::uint32_t k = lo; k < hi; ++k) row.emplace_back(col_idx_[k], values_[k]);
    std::sort(row.begin(), row.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
    for (std::uint32_t k = lo; k < hi; ++k) {
      col_idx_[k] = row[k - lo].first;
      values_[k] = row[k - lo].second;
    }
  }
}

void SparseHermitian::apply(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const {
  const auto n = static_cast<Eigen::Index>(dimension());
  if (in.size() != n) throw DimensionMismatchError("vector length does not match operator");
  out.resize(n);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    cplx acc{0.0, 0.0};
    for (std::uint32_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) acc += values_[k] * in[col_idx_[k]];
    out[i] = acc;
  }
}

Eigen::VectorXcd SparseHermitian::operator*(const Eigen::VectorXcd& in) const {
  Eigen::VectorXcd out;
  apply(in, out);
  return out;
}

Eigen::MatrixXcd SparseHermitian::to_dense() const {
  const auto n = static_cast<Eigen::Index>(dimension());
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (std::uint32_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) m(i, col_idx_[k]) = values_[k];
  return m;
}

double SparseHermitian::max_row_sum() const {
  double best = 0.0;
  for (std::size_t i = 0; i < dimension(); ++i) {
    double s = 0.0;
    for (std::uint32_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += std::abs(values_[k]);
    best = std::max(best, s);
  }
  return best;
}

std::size_t SparseHermitian::row_nonzeros(std::size_t i) const { return row_ptr_[i + 1] - row_ptr_[i]; }

SparseHermitian assemble(std::shared_ptr<const SiteTable> table, const HoppingModel& model) {
  if (!table || table->empty()) throw PreconditionError("cannot assemble on an empty site table");
  model.validate();
  const LatticeParams& params = table->params();
  const double delta = params.delta();
  const double tol = geometric_tolerance(params);
  const double reach = std::max(model.interlayer_cutoff, delta + tol);
  const BinGrid grid(table->positions(), reach);
  const std::size_t n = table->size();

  std::vector<std::vector<SparseHermitian::Entry>> rows(n);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::size_t i = 0; i < n; ++i) {
    const SiteIndex& si = table->site(i);
    const Vec2& xi = table->position(i);
    auto& row = rows[i];
    grid.for_each_near(xi, [&](std::size_t j) {
      if (j <= i) return;
      const SiteIndex& sj = table->site(j);
      const double dist = (xi - table->position(j)).norm();
      double value = 0.0;
      if (si.layer == sj.layer) {
        if (std::abs(dist - delta) <= tol) value = -model.t0;
      } else if (dist <= model.interlayer_cutoff) {
        value = model.kernel(dist);
      }
      if (value != 0.0)
        row.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), cplx(value, 0.0)});
    });
    std::sort(row.begin(), row.end(), [](const auto& l, const auto& r) { return l.col < r.col; });
  }

  std::vector<SparseHermitian::Entry> entries;
  std::size_t total = 0;
  for (const auto& r : rows) total += r.size();
  entries.reserve(total);
  for (auto& r : rows) entries.insert(entries.end(), r.begin(), r.end());
  return SparseHermitian(std::move(table), std::move(entries));
}

double norm_bound(const HoppingModel& model, const LatticeParams& params) {
  return 8.0 * kPi * model.h0 * std::exp(params.delta() * model.alpha0) /
         (params.cell_area() * model.alpha0 * model.alpha0);
}

double spectral_half_width(const SparseHermitian& h, const HoppingModel& model) {
  return std::min(norm_bound(model, h.table().params()), h.max_row_sum());
}

double dropped_mass_bound(const HoppingModel& model, const LatticeParams& params) {
  const double delta = params.delta();
  const double c = model.interlayer_cutoff;
  if (!(c > delta)) throw PreconditionError("interlayer cutoff must exceed delta");
  const double a0 = model.alpha0;
  const double s0 = std::sqrt((c - delta) * (c - delta) + model.L * model.L);
  // Two sublattices on the opposite layer, each bounded by e^{delta alpha0}/|Gamma|
  // times the kernel integral over |x| > c - delta.
  return 4.0 * kPi * model.h0 * std::exp(delta * a0) / params.cell_area() * (1.0 + a0 * s0) *
         std::exp(-a0 * s0) / (a0 * a0);
}

void write_coordinate(const SparseHermitian& h, std::ostream& out) {
  out << "# " << h.dimension() << ' ' << h.entries().size() << '\n';
  out.precision(17);
  for (const auto& e : h.entries())
    out << e.row << ' ' << e.col << ' ' << e.value.real() << ' ' << e.value.imag() << '\n';
}

}  // namespace tbg
