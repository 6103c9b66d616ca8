#pragma once

// Vacuum boost density on the right Rindler wedge W = {x1 > |x0|}.
//
//   kappa(x) = x1 :T00: + x0 :T01:
//            = (u - v) (:(d2 phi)^2: + :(d3 phi)^2: + m^2 :phi^2:)/2 + u :(d_v phi)^2:/2 - v :(d_u phi)^2:/2
// with u = (x0 + x1)/2, v = (x0 - x1)/2, d_u = d0 + d1, d_v = d0 - d1. One-particle
// expectations use F(x) = <Omega, phi(x) psi>; the five lightcone channels are
//   x1|d2 F|^2, x1|d3 F|^2, x1 m^2|F|^2, u|d_v F|^2, -v|d_u F|^2.

#include <array>
#include <vector>

#include "qlp/modefield.hpp"
#include "qlp/quadform.hpp"
#include "qlp/quadrature.hpp"
#include "qlp/report.hpp"
#include "qlp/testfn.hpp"
#include "qlp/thermal.hpp"

namespace qlp::rindler {

struct LightconeCoords {
  double u = 0.0, v = 0.0, x2 = 0.0, x3 = 0.0;
};

LightconeCoords to_lightcone(const Vec4& x);
Vec4 from_lightcone(const LightconeCoords& l);
bool in_wedge(const Vec4& x);

/// j(x0, x1, x2, x3) = (-x0, -x1, x2, x3).
Vec4 wedge_reflect(const Vec4& x);
/// f o j for a packet kind that is even about its center.
PacketSpec reflect(const PacketSpec& f);

/// Fraction of int |p| carried by the wedge.
double wedge_mass_fraction(const PacketSpec& p);
bool wedge_supported(const PacketSpec& p, double tol = 1e-8);

/// psi = phi(g) Omega in the vacuum: amplitude ghat(omega_k, k) / sqrt(2 omega_k).
thermal::ParticleHoleAmplitudes vacuum_state(const PacketSpec& g, double mass);

/// A smearing f, either a packet or the square g^2 of a packet.
struct WedgeSmearing {
  PacketSpec base;
  bool squared = false;

  double evaluate(const Vec4& x) const;
  modefield::SeparableSmearing separable() const;
  std::array<std::array<double, 2>, 4> box() const;
  /// Coordinate scale of the smearing (time and space).
  double scale() const;
};

WedgeSmearing smearing_of(const PacketSpec& f);
WedgeSmearing square_of(const PacketSpec& g);

struct BoostChannels {
  std::array<double, 5> value{};
  std::array<double, 5> error{};
  double total() const;
  double total_error() const;
};

/// Cartesian evaluation (spherical about the state, density x1 e - 2 x0 Re(conj(Ft) d1F)).
IntegrationResult kappa_expectation(const thermal::ParticleHoleAmplitudes& psi, const WedgeSmearing& f,
                                    const QuadratureSpec& q, double resolution = 1.0);
/// The five channels by the same spherical pipeline.
BoostChannels kappa_channels(const thermal::ParticleHoleAmplitudes& psi, const WedgeSmearing& f,
                             const QuadratureSpec& q, double resolution = 1.0);

enum class LightconePath {
  qmc,      ///< randomized Halton points over the (u, v, x2, x3) box
  reduced,  ///< tensor Gauss over (u, v, rho), using axial symmetry about the x1 axis
};

/// Lightcone evaluation of the channels with pointwise mode functions.
BoostChannels kappa_lightcone_expectation(const thermal::ParticleHoleAmplitudes& psi, const WedgeSmearing& f,
                                          LightconePath path, const QuadratureSpec& q);

/// <psi, K psi> = int d^3k/(2pi)^3 omega Im(conj(d_{k1} alpha) alpha) for
/// alpha = ghat(omega, k)/sqrt(2 omega); the derivative uses analytic moments of g.
IntegrationResult boost_generator_expectation(const thermal::ParticleHoleAmplitudes& psi, const QuadratureSpec& q);

/// -i d/ds <psi, U(s) psi> at s = 0 by central differences of the overlap with
/// the boosted amplitude.
IntegrationResult boost_fd_oracle(const thermal::ParticleHoleAmplitudes& psi, const QuadratureSpec& q,
                                  double step = 1e-3);

/// int_{|x - c| < R} x1 <:T00:(0, x)> d^3x on the periodic grid, for growing R.
struct SpatialBoostIntegral {
  std::vector<double> radii;
  std::vector<double> values;
};
SpatialBoostIntegral boost_spatial_integral(const thermal::ParticleHoleAmplitudes& psi,
                                            const modefield::GridOracleSpec& spec, const std::vector<double>& radii);

struct WedgeEll {
  double kappa = 0.0;            ///< <psi, kappa(f) psi>
  double kappa_reflected = 0.0;  ///< <psi, kappa(f o j) psi> = -<psi, J kappa(f) J psi>
  double ell = 0.0;              ///< kappa + kappa_reflected
  double err_kappa = 0.0, err_reflected = 0.0;
};
WedgeEll ell_wedge_expectation(const thermal::ParticleHoleAmplitudes& psi, const PacketSpec& f,
                               const QuadratureSpec& q);

/// g_lambda = scale_translate(chi, lambda, a e1); K2 channel against sqrt(6) N^2.
std::vector<QeiReport> scan_boost_l4_violation(const PacketSpec& chi, const PacketSpec& f, double a,
                                               const std::vector<double>& lambdas, double mass,
                                               const QuadratureSpec& q);

/// Mirror family g_lambda o j, localized at -a e1: the kappa(f o j) term along it.
std::vector<QeiReport> scan_boost_l2_violation(const PacketSpec& chi, const PacketSpec& f, double a,
                                               const std::vector<double>& lambdas, double mass,
                                               const QuadratureSpec& q);

/// Ground-energy bound of a lightcone channel form (or all, channel = -1) and a
/// variational check of it with random probe states.
struct QeiProbe {
  double bound = 0.0;
  double probe_min = 0.0;
  double one_particle_min = 0.0;
  bool stable = true;
  bool respected = true;
  std::size_t modes = 0;
};
QeiProbe qei_lower_probe(const PacketSpec& f, double mass, const quadform::ModeGrid& grid, int channel,
                         int probes, std::uint64_t seed);

}  // namespace qlp::rindler
