#pragma once

// Position-space evaluation of one-particle mode functions.
//
// For a one-particle vector psi, F(x) = <Omega, phi(x) psi> determines every normal
// ordered quadratic expectation, e.g. <psi, :phi(x)^2: psi> = 2|F(x)|^2. With
//   F(x) = int d^3k/(2pi)^3 [P(k) e^{-ik.x} + N(k) e^{ik.x}],   k0 = omega_k,
// the radial engine handles amplitudes that depend on |k| only (after removing a
// center phase), so that around the center c and with t = x0 - c0, y = x - c:
//   F(t, r) = 1/(2 pi^2) int k^2 dk j0(k r) [P(k) e^{-i omega t} + N(k) e^{i omega t}].
// The grid oracle does the general anisotropic case with per-slice 3D FFTs.

#include <array>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qlp/quadrature.hpp"
#include "qlp/testfn.hpp"

namespace qlp::modefield {

using Vec3 = std::array<double, 3>;

struct RadialProfile {
  std::vector<double> k;       ///< |k| nodes
  std::vector<double> weight;  ///< quadrature weight times k^2 / (2 pi^2)
  std::vector<double> omega;
  std::vector<cplx> pos;       ///< P(k)
  std::vector<cplx> neg;       ///< N(k)
};

RadialProfile make_profile(const Rule1D& krule, double mass, const std::function<cplx(double)>& pos,
                           const std::function<cplx(double)>& neg);

/// k-rule for amplitudes concentrated below `kmax`, resolving phases k (t + r) up to
/// `extent` with at most `phase_per_panel` radians per panel.
Rule1D radial_k_rule(double kmax, double extent, double phase_per_panel = 6.0, int order = 16);

struct ModeValue {
  cplx f{};   ///< F
  cplx ft{};  ///< dF/dt
  cplx fr{};  ///< dF/dr, so that grad F = fr * y / r
};

/// Direct evaluation at one point; O(#k).
ModeValue evaluate(const RadialProfile& p, double t, double r);

/// j0(z) = sin z / z and its derivative, stable near z = 0.
double sph_j0(double z);
double sph_j0_prime(double z);

/// Evaluates several profiles sharing one k-grid on a fixed set of radii, one time
/// slice at a time, with cached Bessel tables.
class RadialSlicer {
 public:
  RadialSlicer(std::vector<RadialProfile> profiles, std::vector<double> radii);
  std::size_t profile_count() const { return profiles_.size(); }
  std::size_t radius_count() const { return radii_.size(); }
  const std::vector<double>& radii() const { return radii_; }
  /// out[p * radius_count() + ir]
  void slice(double t, std::vector<ModeValue>& out) const;

 private:
  std::vector<RadialProfile> profiles_;
  std::vector<double> radii_;
  Eigen::MatrixXd j0_, dj0_;  // (#r x #k)
};

/// Angular moments int_{cone} fs(c + r n) n_i n_j ... dOmega up to third order.
struct AngularMoments {
  double m0 = 0.0;
  std::array<double, 3> m1{};
  std::array<std::array<double, 3>, 3> m2{};
  std::array<std::array<std::array<double, 3>, 3>, 3> m3{};
};

/// A product smearing f(x) = f0(x0) fs(x), with fs supported (numerically) in a ball.
struct SeparableSmearing {
  std::function<double(double)> time_factor;
  std::function<double(const Vec3&)> space_factor;
  double t_lower = 0.0, t_upper = 0.0;  ///< x0 support
  Vec3 space_center{};
  double space_radius = 0.0;            ///< fs vanishes outside this ball
};

/// Builds the product form of a position-space packet (gaussians truncated at nsigma).
SeparableSmearing separable(const PacketSpec& f, double nsigma = 9.0);

struct SphericalGrid {
  int theta_nodes = 48;
  int phi_nodes = 64;
  /// Maximum r-panel width; should resolve the light-cone shell of the packet.
  double r_panel = 0.05;
  double t_panel = 0.1;
  int order = 8;
  /// Extra time breakpoints (x0 values), e.g. a reporting window.
  std::vector<double> x0_breaks;
};

/// Called once per (t, r) node with the accumulated weight w_t * w_r * r^2 * f0(x0).
using SmearCallback = std::function<void(double x0, double t, double r, double weight,
                                         std::span<const ModeValue> modes, const AngularMoments& m)>;

/// Integrates over the support of f in spherical coordinates about the spatial
/// center `c` of the mode functions (time origin c0). `profiles` share one k-grid.
void integrate_spherical(const std::vector<RadialProfile>& profiles, const Vec4& c, const SeparableSmearing& f,
                         const SphericalGrid& grid, const SmearCallback& cb);

/// Anisotropic amplitudes on a periodic box [-L, L)^3 with n^3 points.
struct GridOracleSpec {
  int n = 96;
  double half_length = 8.0;
  int time_panels = 16;
  int time_order = 8;
};

using Amplitude3 = std::function<cplx(const Vec3&)>;

/// Full-grid mode values at time x0 (flattened, axis 2 fastest), using spectral
/// derivatives. grad holds dF/dx^i.
struct GridSlice {
  std::vector<cplx> f, ft;
  std::array<std::vector<cplx>, 3> grad;
};

class GridOracle {
 public:
  GridOracle(const GridOracleSpec& spec, double mass, Amplitude3 pos, Amplitude3 neg);
  ~GridOracle();
  GridOracle(const GridOracle&) = delete;
  GridOracle& operator=(const GridOracle&) = delete;

  const GridOracleSpec& spec() const { return spec_; }
  double node(int j) const { return -spec_.half_length + j * step_; }
  double cell_volume() const { return step_ * step_ * step_; }
  void slice(double x0, GridSlice& out) const;

 private:
  GridOracleSpec spec_;
  double mass_;
  double step_;
  std::vector<cplx> p_, nm_;  // P(k), N(-k) on the DFT grid
  std::vector<double> omega_;
  std::vector<Vec3> kvec_;
  void* plan_ = nullptr;
  mutable std::vector<cplx> buf_;
};

/// Integrates a local density built from mode values against a position-space
/// packet: int dx0 int d^3x f(x) density(x, F, grad F, Ft) over f's time support.
double grid_smear(const std::vector<const GridOracle*>& fields, const PacketSpec& f,
                  const std::function<double(const Vec4& x, std::span<const cplx> f, std::span<const cplx> ft,
                                             std::span<const std::array<cplx, 3>> grad)>& density,
                  double nsigma = 8.0);

}  // namespace qlp::modefield
