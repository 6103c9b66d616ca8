#pragma once

// Normal-ordered quadratic bosonic forms on a discretized momentum grid
//   H = sum_ij A_ij a_i^dag a_j + 1/2 sum_ij (B_ij a_i^dag a_j^dag + h.c.)
// with symplectic (Bogoliubov) ground energies and a truncated Fock-space oracle.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "qlp/modlp.hpp"
#include "qlp/quadrature.hpp"
#include "qlp/testfn.hpp"

namespace qlp::quadform {

using Vec3 = std::array<double, 3>;
using CMatrix = Eigen::MatrixXcd;

enum class Species { single, doubled };

struct Mode {
  Vec3 k{};
  double weight = 0.0;  ///< quadrature weight including 1/(2 pi)^3
  int channel = 0;      ///< 0: particle (b, or the only species); 1: hole (a)
};

struct ModeGrid {
  std::vector<Mode> modes;
  Species species = Species::single;
  double mass = 1.0;
  double beta = 1.0;  ///< used by doubled grids

  std::size_t size() const { return modes.size(); }
  void validate() const;
  /// Index of the mode with momentum -k in the same channel, or -1.
  int partner(std::size_t i) const;
};

/// Tensor Gauss-Legendre nodes on [-kmax, kmax]^3 (n per axis); doubled grids
/// repeat every node for the hole channel.
ModeGrid box_grid(int n, double kmax, double mass, Species species, double beta = 1.0);

/// Same nodes as a tensor-gauss QuadratureSpec would use.
ModeGrid grid_from_spec(const QuadratureSpec& q, double mass, Species species, double beta = 1.0);

enum class FieldSel { system, bath };

/// L phi = d[0] phi + sum_mu d[mu+1] d_mu phi.
using Derivative = std::array<double, 5>;

/// coef * int W(x) :(L phi)(R phi):(x) d^4x, W = (w[0] + sum_mu w[mu+1] x^mu) f(x).
struct QuadraticTerm {
  double coef = 1.0;
  Derivative left{};
  Derivative right{};
  std::array<double, 5> weight{1, 0, 0, 0, 0};
  FieldSel field = FieldSel::system;
};

/// Density channels.
std::vector<QuadraticTerm> energy_density_terms(double mass, FieldSel field = FieldSel::system, double sign = 1.0);
std::vector<QuadraticTerm> liouville_density_terms(double mass);
/// The five lightcone channels of the boost density; `channel` selects one (0..4) or all (-1).
std::vector<QuadraticTerm> boost_lightcone_terms(double mass, int channel = -1);

/// Smearing: a packet, or the formal unit smearing int d^3x at x0 = 0.
struct Smearing {
  std::optional<PacketSpec> packet;
  static Smearing formal_unit() { return {}; }
  static Smearing of(const PacketSpec& p) { return {p}; }
};

struct QuadraticBosonForm {
  CMatrix number;  ///< A, Hermitian
  CMatrix pair;    ///< B, symmetric
  std::vector<int> channel;
  std::vector<std::string> warnings;

  std::size_t modes() const { return static_cast<std::size_t>(number.rows()); }
  /// M = [[A, B], [conj B, conj A]].
  CMatrix bdg() const;
  void validate(double tol = 1e-12) const;
};

QuadraticBosonForm assemble(const std::vector<QuadraticTerm>& terms, const Smearing& s, const ModeGrid& grid);

/// ||M1 eta M2 - M2 eta M1||: vanishes iff the forms commute.
double commutator_norm(const QuadraticBosonForm& a, const QuadraticBosonForm& b);

/// Restriction to the modes of one channel.
QuadraticBosonForm restrict_channel(const QuadraticBosonForm& f, int channel);

struct GroundEnergyResult {
  double energy = 0.0;  ///< -inf when unstable
  std::vector<double> symplectic;
  bool stable = true;
  int zero_modes = 0;
  double min_bdg_eigenvalue = 0.0;
  double offending = 0.0;  ///< |Im| of the worst symplectic eigenvalue when unstable
};

/// Real symmetric form of M in the quadratures x = (a + a^dag)/sqrt2, p = (a - a^dag)/(i sqrt2).
Eigen::MatrixXd quadrature_matrix(const QuadraticBosonForm& f);

GroundEnergyResult ground_energy(const QuadraticBosonForm& f);

/// Smallest eigenvalue of H on the Fock space truncated at `occupancy` quanta per mode.
double exact_diag_oracle(const QuadraticBosonForm& f, int occupancy, long dimension_limit = 200000);

/// Single mode H = eps a^dag a + mu/2 (a^dag^2 + a^2).
QuadraticBosonForm single_mode(double eps, double mu);

struct PurificationReport {
  double occupation = 0.0;         ///< tr(rho a^dag a)
  double bose = 0.0;               ///< 1 / (e^{beta omega} - 1)
  double occupation_residual = 0.0;
  double tail_bound = 0.0;         ///< weight of the discarded levels
  double delta_spectrum_residual = 0.0;
  double kms_residual = 0.0;       ///< | ||Delta^{1/2} a^dag Omega||^2 - ||a Omega||^2 |
  double annihilation_residual = 0.0;  ///< ||(B+ c - B- ctilde^dag) Omega||
  double swap_residual = 0.0;      ///< | <ctilde^dag ctilde> - <c^dag c> |
};

PurificationReport purification_crosscheck(double beta, double omega, int d);

/// Variational check of a ground-energy bound: generalized eigenproblem on the span
/// of the vacuum, one-particle probes (amplitude vectors) and two-particle probes
/// (symmetric amplitude matrices).
struct ProbeResult {
  double min_value = 0.0;
  double one_particle_min = 0.0;
  int rank = 0;
  double regularization = 0.0;
};

ProbeResult variational_probe(const QuadraticBosonForm& f, const std::vector<Eigen::VectorXcd>& one,
                              const std::vector<CMatrix>& two);

std::string ground_energy_csv_header();
std::string ground_energy_csv_row(std::size_t grid_size, const GroundEnergyResult& r);

void to_json(nlohmann::json& j, const QuadraticBosonForm& f);
QuadraticBosonForm form_from_json(const nlohmann::json& j);

}  // namespace qlp::quadform
