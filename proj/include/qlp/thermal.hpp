#pragma once

// Thermal free scalar field at inverse temperature beta in the doubled Fock
// representation: particle (b) and hole (a) channels, one-particle expectations of
// the energy density, its bath image under the modular conjugation and the
// Liouvillian density ell = h - J h J.

#include <stdexcept>
#include <string>
#include <vector>

#include "qlp/modefield.hpp"
#include "qlp/quadrature.hpp"
#include "qlp/report.hpp"
#include "qlp/testfn.hpp"

namespace qlp::thermal {

class UnsupportedInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ThermalParams {
  double beta = 1.0;  ///< +inf selects the vacuum (B+ = 1, B- = 0)
  double mass = 1.0;
  void validate() const;
  double omega(double kmag) const;
};

enum class Sign { plus, minus };

/// B+ = (1 - e^{-beta omega})^{-1/2}, B- = (e^{beta omega} - 1)^{-1/2}.
double thermal_factor(Sign s, double omega, double beta);

struct StateOptions {
  /// Multiplies ghat(q) by 1 / B-(omega(q)); gives the pure-hole family.
  bool inverse_hole_factor = false;
};

/// psi = phi(g) Omega with particle amplitude B+ ghat(k)/sqrt(2 omega) and hole
/// amplitude B- ghat(-k)/sqrt(2 omega), k = (omega_k, k). With `conjugated` the
/// source is conj(g), i.e. the vector phi(g)^* Omega.
struct ParticleHoleAmplitudes {
  PacketSpec source;
  ThermalParams tp;
  StateOptions options;
  bool conjugated = false;

  /// Effective transform (conjugation and hole factor applied).
  cplx ghat(const Vec4& q) const;
  cplx particle(const modefield::Vec3& k) const;
  cplx hole(const modefield::Vec3& k) const;

  /// Spatially isotropic source: the amplitudes depend on |k| after removing the
  /// center phase e^{+ik.c} (particle) resp. e^{-ik.c} (hole).
  bool isotropic() const { return source.spatially_isotropic(); }
  cplx particle_radial(double kmag) const;
  cplx hole_radial(double kmag) const;
  /// |k| beyond which both amplitudes are negligible.
  double kmax() const;
  /// Same construction for conj(g), i.e. the vector phi(g)^* Omega.
  ParticleHoleAmplitudes adjoint() const;
};

ParticleHoleAmplitudes one_particle_state(const PacketSpec& g, const ThermalParams& tp, StateOptions opts = {});

/// Radial mode-function profiles: F for psi, and F' for J psi.
modefield::RadialProfile system_profile(const ParticleHoleAmplitudes& a, const Rule1D& krule);
modefield::RadialProfile bath_profile(const ParticleHoleAmplitudes& a, const Rule1D& krule);

/// ||psi||^2 = int d^3k/(2pi)^3 (|particle|^2 + |hole|^2).
IntegrationResult state_norm(const ParticleHoleAmplitudes& a, const QuadratureSpec& q);

/// <psi_x, J psi_y> for two isotropic states sharing a center.
cplx j_overlap(const ParticleHoleAmplitudes& x, const ParticleHoleAmplitudes& y, const QuadratureSpec& q);

struct SmearedEnergy {
  double h = 0.0, bath = 0.0, ell = 0.0;
  double h_window = 0.0, bath_window = 0.0;  ///< x0 in [-R, R]
  double err_h = 0.0, err_bath = 0.0, err_ell = 0.0;
};

struct SmearOptions {
  double window = kNaN;      ///< R for the partial x0 integral; NaN disables
  double resolution = 1.0;   ///< multiplies all node densities
  bool estimate_error = true;
};

/// <psi, h(f) psi>, <psi, J h(f) J psi> and their difference, by the radial pipeline.
SmearedEnergy smeared_energy(const ParticleHoleAmplitudes& a, const PacketSpec& f, const QuadratureSpec& q,
                             const SmearOptions& opts = {});

IntegrationResult h_expectation(const ParticleHoleAmplitudes& a, const PacketSpec& f, const QuadratureSpec& q);
IntegrationResult bath_h_expectation(const ParticleHoleAmplitudes& a, const PacketSpec& f, const QuadratureSpec& q);
IntegrationResult ell_expectation(const ParticleHoleAmplitudes& a, const PacketSpec& f, const QuadratureSpec& q);

/// Independent momentum-space evaluation for a gaussian f concentric with an
/// isotropic state: 3D integral over (|k|, |p|, cos theta) against closed-form fhat.
struct KernelOracleResult {
  double h = 0.0, bath = 0.0;
  double h_imag = 0.0, bath_imag = 0.0;
};
KernelOracleResult kernel_space_oracle(const ParticleHoleAmplitudes& a, const PacketSpec& f, int nodes = 48);

/// Position-space oracle on a periodic grid (general amplitudes).
struct GridEnergy {
  double h = 0.0, bath = 0.0;
};
GridEnergy grid_oracle_energy(const ParticleHoleAmplitudes& a, const PacketSpec& f,
                              const modefield::GridOracleSpec& spec);

struct L4Result {
  double n2 = 0.0;
  double proxy = 0.0;       ///< sqrt(6) N^2
  double exact = 0.0;       ///< sqrt((A^*A Omega, J A^*A Omega))
  double phi_sq_norm_sq = 0.0;  ///< ||phi(g)^2 Omega||^2 = N^4 + ||a^dag(psi)^2 Omega||^2
};

/// Real packets only; throws UnsupportedInput otherwise.
L4Result l4_proxy(const PacketSpec& g, const ThermalParams& tp, const QuadratureSpec& q);

/// ||A Omega||_4^2 for A = phi(g) with any isotropic g (Wick contractions).
double l4_exact(const ParticleHoleAmplitudes& a, const QuadratureSpec& q);

/// ||phi(g)^* Omega||^2.
IntegrationResult hole_dominance(const ParticleHoleAmplitudes& a, const QuadratureSpec& q);

struct CancellationReport {
  int samples = 0;
  double max_pair_coefficient = 0.0;   ///< aa/bb coefficient at p = -k (relative)
  double max_mixed_coefficient = 0.0;  ///< B-_k B+_p - B+_k B-_p at p = k
  double max_diagonal_residual = 0.0;  ///< |omega (B+^2 - B-^2) - omega| / omega
};

CancellationReport liouville_cancellation_check(const ThermalParams& tp, const std::vector<modefield::Vec3>& ks);

/// Max |B+^2 - B-^2 - 1| and bound violations of B- <= B+ <= B+_0 on a grid.
struct FactorReport {
  int points = 0;
  double max_identity_residual = 0.0;
  double max_order_violation = 0.0;  ///< max(B- - B+, B+ - B+_0, 0)
};
FactorReport thermal_factor_check(double mass, const std::vector<double>& omegas, const std::vector<double>& betas);

struct ScanOptions {
  double window = 1.0;
  double resolution = 1.0;
  bool l4_exact = true;
};

std::vector<QeiReport> scan_l4_violation(const PacketSpec& chi, const PacketSpec& f, const std::vector<double>& lambdas,
                                         const ThermalParams& tp, const QuadratureSpec& q, const ScanOptions& opts = {});

std::vector<QeiReport> scan_l2_violation(const PacketSpec& chi, const PacketSpec& f, const std::vector<double>& lambdas,
                                         const ThermalParams& tp, const QuadratureSpec& q, const ScanOptions& opts = {});

/// Checks lambda ladders: non-empty, positive, strictly increasing.
void validate_ladder(const std::vector<double>& lambdas);

}  // namespace qlp::thermal
