#pragma once

#include "tbg/bm_model.hpp"
#include "tbg/envelope.hpp"
#include "tbg/geometry.hpp"
#include "tbg/propagator.hpp"

#include <array>
#include <complex>
#include <memory>
#include <string>

namespace tbg {

enum class PacketKind { Gaussian, BandConcentrated };

/// How epsilon maps to the Gaussian width: sigma_r = 1/epsilon Angstrom, or a/epsilon.
enum class SigmaUnits { Angstrom, LatticeConstant };

struct WavepacketSpec {
  PacketKind kind = PacketKind::Gaussian;
  std::array<std::complex<double>, 4> coefficients{0.5, 0.5, 0.5, 0.5};
  int band = 3;
  Vec2 k = Vec2::Zero();
  double sigma_r = 10.0;
  int cutoff = 6;  // plane-wave shells for the band kind
  Vec2 center = Vec2::Zero();

  void validate() const;
};

double sigma_from_epsilon(double epsilon, SigmaUnits units, double a);

PacketKind parse_packet_kind(const std::string& s);
std::string packet_kind_name(PacketKind k);

/// f0 = c G on the gaussian kind, Phi_n(r; k) G on the band kind, scaled so
/// that sum_c integral |f_c|^2 / |Gamma| = 1 (the continuum estimate of the
/// lattice norm). Throws ContainmentError when box < 8 sigma_r or the field
/// at the box edge exceeds 1e-8 of its maximum.
Envelope make_envelope(const WavepacketSpec& spec, const BmParams& bm, const Grid& grid,
                       double cell_area);

/// Raw samples f_i^sigma(x) e^{i K_i x} at every site of `table`, using
/// trigonometric interpolation from the grid. Sites outside the box throw.
LatticeState sample_envelope(const Envelope& f, std::shared_ptr<const SiteTable> table);

/// sample_envelope followed by normalisation to unit norm (zero stays zero).
LatticeState envelope_to_lattice(const Envelope& f, std::shared_ptr<const SiteTable> table);

/// Strips the Bloch phases and fits a band-limited field by the weighted
/// adjoint transform (exact for fields band-limited below |b|/2 and
/// negligible outside the table). Bandwidth: half the grid Nyquist.
Envelope lattice_to_envelope(const LatticeState& psi, const Grid& grid);

/// || sample_envelope(f_bm) - psi_tb ||, without renormalising the BM state.
double comparison_error(const LatticeState& psi_tb, const Envelope& f_bm);

/// || X_{|x| > r} psi ||.
double tail_norm(const LatticeState& psi, double r);

/// Zeroes every amplitude with |x| > r.
LatticeState restrict_to_disk(const LatticeState& psi, double r);

/// Matched initial data: the lattice state has unit norm and `envelope` is
/// scaled by the same factor, so psi = sample_envelope(envelope) exactly.
struct InitialCondition {
  Envelope envelope;
  LatticeState psi;
  double scale = 1.0;
};

InitialCondition make_initial(const WavepacketSpec& spec, const BmParams& bm, const Grid& grid,
                              std::shared_ptr<const SiteTable> table);

/// Mirror y -> -y combined with the A <-> B exchange inside each layer; maps
/// the theta model onto the -theta model.
Envelope mirror_envelope(const Envelope& f);

}  // namespace tbg
