#include "tbg/propagator.hpp"

#include "tbg/errors.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>

namespace tbg {

namespace {

void check_compatible(const SparseHermitian& h, const LatticeState& psi) {
  if (!psi.table || psi.amplitudes.size() != static_cast<Eigen::Index>(h.dimension()))
    throw DimensionMismatchError("state length does not match the Hamiltonian");
  if (psi.table.get() != &h.table() && psi.table->sites() != h.table().sites())
    throw DimensionMismatchError("state and Hamiltonian live on different site tables");
}

Eigen::VectorXcd evolve_dense(const SparseHermitian& h, const Eigen::VectorXcd& psi, double t,
                              const PropagatorOptions& opts) {
  if (h.dimension() > opts.dense_limit)
    throw PreconditionError("dense propagation refused above dense_limit sites");
  const Eigen::MatrixXcd generator = std::complex<double>(0.0, -t) * h.to_dense();
  const Eigen::MatrixXcd u = generator.exp();
  return u * psi;
}

Eigen::VectorXcd evolve_chebyshev(const SparseHermitian& h, const Eigen::VectorXcd& psi, double t,
                                  const PropagatorOptions& opts) {
  // Slightly widened Gershgorin interval keeps the scaled spectrum inside [-1, 1].
  const double scale = 1.01 * h.max_row_sum() + 1e-12;
  const double x = scale * t;
  const int degree = chebyshev_degree(x, opts.tol, opts.max_degree);
  const std::vector<double> j = bessel_j_sequence(x, degree);

  auto apply_scaled = [&](const Eigen::VectorXcd& in, Eigen::VectorXcd& out) {
    h.apply(in, out);
    out /= scale;
  };

  Eigen::VectorXcd acc = j[0] * psi;
  if (degree == 0) return acc;
  Eigen::VectorXcd prev = psi;
  Eigen::VectorXcd curr;
  apply_scaled(prev, curr);
  // c_k = 2 (-i)^k J_k(x)
  std::complex<double> phase(0.0, -1.0);
  acc += 2.0 * phase * j[1] * curr;
  Eigen::VectorXcd next(psi.size());
  for (int k = 2; k <= degree; ++k) {
    apply_scaled(curr, next);
    next = 2.0 * next - prev;
    prev.swap(curr);
    curr.swap(next);
    phase *= std::complex<double>(0.0, -1.0);
    acc += (2.0 * j[static_cast<std::size_t>(k)]) * phase * curr;
  }
  return acc;
}

}  // namespace

LatticeState extend_to(const LatticeState& state, std::shared_ptr<const SiteTable> target) {
  LatticeState out{target, Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(target->size()))};
  for (std::size_t i = 0; i < state.size(); ++i) {
    const auto row = target->find(state.table->site(i));
    if (!row) throw DimensionMismatchError("target table does not contain every source site");
    out.amplitudes[static_cast<Eigen::Index>(*row)] = state.amplitudes[static_cast<Eigen::Index>(i)];
  }
  return out;
}

PropagationMethod parse_method(const std::string& name) {
  if (name == "dense_pade") return PropagationMethod::DensePade;
  if (name == "chebyshev") return PropagationMethod::Chebyshev;
  throw ConfigError("unknown propagation method '" + name + "'");
}

std::string method_name(PropagationMethod m) {
  return m == PropagationMethod::DensePade ? "dense_pade" : "chebyshev";
}

void PropagatorOptions::validate() const {
  if (!(tol > 1e-14 && tol < 1e-2)) throw PreconditionError("propagator tol must lie in (1e-14, 1e-2)");
  for (std::size_t i = 0; i < snapshot_times.size(); ++i) {
    if (snapshot_times[i] < 0.0) throw PreconditionError("snapshot times must be nonnegative");
    if (i > 0 && snapshot_times[i] < snapshot_times[i - 1])
      throw PreconditionError("snapshot times must be nondecreasing");
  }
}

std::vector<double> bessel_j_sequence(double x, int nmax) {
  if (nmax < 0) throw PreconditionError("nmax must be nonnegative");
  std::vector<double> out(static_cast<std::size_t>(nmax) + 1, 0.0);
  const double ax = std::abs(x);
  if (ax == 0.0) {
    out[0] = 1.0;
    return out;
  }
  const int top = std::max(nmax, static_cast<int>(ax)) + 30 +
                  static_cast<int>(std::sqrt(40.0 * std::max<double>(nmax, ax)));
  const int start = top + (top % 2);
  std::vector<double> j(static_cast<std::size_t>(start) + 2, 0.0);
  j[static_cast<std::size_t>(start)] = 1e-300;
  for (int k = start; k >= 1; --k) {
    const auto ku = static_cast<std::size_t>(k);
    j[ku - 1] = (2.0 * k / ax) * j[ku] - j[ku + 1];
    if (std::abs(j[ku - 1]) > 1e250) {
      for (std::size_t m = ku - 1; m < j.size(); ++m) j[m] *= 1e-250;
    }
  }
  // J_0 + 2 sum_k J_{2k} = 1
  double norm = j[0];
  for (int k = 2; k <= start; k += 2) norm += 2.0 * j[static_cast<std::size_t>(k)];
  for (int k = 0; k <= nmax; ++k) {
    double v = j[static_cast<std::size_t>(k)] / norm;
    if (x < 0.0 && (k % 2 == 1)) v = -v;
    out[static_cast<std::size_t>(k)] = v;
  }
  return out;
}

int chebyshev_degree(double x, double tol, int max_degree) {
  const double ax = std::abs(x);
  int trial = static_cast<int>(ax) + 40 + static_cast<int>(6.0 * std::cbrt(ax + 1.0));
  while (true) {
    if (trial > max_degree)
      throw ConvergenceError("Chebyshev degree exceeds the configured cap");
    const std::vector<double> j = bessel_j_sequence(x, trial);
    // tail[k] = sum_{m > k} 2 |J_m|, with the unseen part beyond `trial` bounded by the last term.
    double tail = 2.0 * std::abs(j.back());
    if (tail <= 0.1 * tol) {
      for (int k = trial; k >= 0; --k) {
        if (tail > tol) return std::min(k + 1, trial);
        tail += 2.0 * std::abs(j[static_cast<std::size_t>(k)]);
      }
      return 0;
    }
    trial = trial * 3 / 2 + 10;
  }
}

LatticeState evolve(const SparseHermitian& h, const LatticeState& psi0, double t,
                    const PropagatorOptions& opts) {
  opts.validate();
  check_compatible(h, psi0);
  if (t == 0.0) return psi0;
  LatticeState out{psi0.table, {}};
  out.amplitudes = opts.method == PropagationMethod::DensePade
                       ? evolve_dense(h, psi0.amplitudes, t, opts)
                       : evolve_chebyshev(h, psi0.amplitudes, t, opts);
  return out;
}

std::vector<LatticeState> evolve_snapshots(const SparseHermitian& h, const LatticeState& psi0,
                                           const PropagatorOptions& opts) {
  opts.validate();
  check_compatible(h, psi0);
  std::vector<LatticeState> out;
  out.reserve(opts.snapshot_times.size());
  LatticeState current = psi0;
  double now = 0.0;
  for (double t : opts.snapshot_times) {
    if (t > now) {
      current = evolve(h, current, t - now, opts);
      now = t;
    }
    out.push_back(current);
  }
  return out;
}

double energy(const SparseHermitian& h, const LatticeState& psi) {
  check_compatible(h, psi);
  return psi.amplitudes.dot(h * psi.amplitudes).real();
}

}  // namespace tbg
