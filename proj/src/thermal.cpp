#include "qlp/thermal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qlp::thermal {

using modefield::Vec3;

namespace {

constexpr double kPi = std::numbers::pi;

double norm3(const Vec3& k) { return std::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]); }

// int_0^kmax k^2 dk/(2 pi^2) F(k) with panel doubling until the target is met.
template <class T, class Fn>
std::pair<T, double> radial_moment(Fn fn, double kmax, const QuadratureSpec& q) {
  auto sum = [&](int panels) {
    Rule1D r = composite_gauss(0.0, kmax, panels, 16);
    std::vector<T> v(r.size());
    double l1 = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double k = r.nodes[i];
      v[i] = r.weights[i] * k * k / (2 * kPi * kPi) * fn(k);
      l1 += std::abs(v[i]);
    }
    return std::pair<T, double>{pairwise_sum(std::span<const T>(v)), l1};
  };
  int panels = std::max(8, static_cast<int>(q.points / 4));
  T prev = sum(panels).first;
  for (int it = 0; it < 8; ++it) {
    panels *= 2;
    auto [cur, l1] = sum(panels);
    const double err = std::abs(cur - prev);
    if (err <= std::max(q.target_rel_tol * std::max(std::abs(cur), 1e-3 * l1), 1e-300)) return {cur, err};
    prev = cur;
  }
  throw ToleranceNotMet("radial momentum integral did not converge", std::abs(prev), kNaN);
}

template <class T>
std::pair<T, double> cube_moment(const std::function<T(const Vec3&)>& fn, double kmax, const QuadratureSpec& q) {
  QuadratureSpec qs = q;
  qs.lower = {-kmax, -kmax, -kmax};
  qs.upper = {kmax, kmax, kmax};
  const double norm = 1.0 / std::pow(2 * kPi, 3);
  if constexpr (std::is_same_v<T, double>) {
    auto r = integrate([&](std::span<const double> k) { return norm * fn({k[0], k[1], k[2]}); }, 3, qs);
    return {r.value, r.error};
  } else {
    auto re = integrate([&](std::span<const double> k) { return norm * fn({k[0], k[1], k[2]}).real(); }, 3, qs);
    auto im = integrate([&](std::span<const double> k) { return norm * fn({k[0], k[1], k[2]}).imag(); }, 3, qs);
    return {cplx(re.value, im.value), std::hypot(re.error, im.error)};
  }
}

}  // namespace

void ThermalParams::validate() const {
  if (!(beta > 0)) throw std::invalid_argument("beta: must be positive");
  if (!(mass > 0) || !std::isfinite(mass)) throw std::invalid_argument("mass: must be positive and finite");
}

double ThermalParams::omega(double kmag) const { return std::sqrt(kmag * kmag + mass * mass); }

double thermal_factor(Sign s, double omega, double beta) {
  if (!(omega > 0)) throw std::invalid_argument("omega: must be positive");
  if (!(beta > 0)) throw std::invalid_argument("beta: must be positive");
  if (std::isinf(beta)) return s == Sign::plus ? 1.0 : 0.0;
  const double x = beta * omega;
  const double d = -std::expm1(-x);  // 1 - e^{-x}
  if (s == Sign::plus) return 1.0 / std::sqrt(d);
  return std::exp(-0.5 * x) / std::sqrt(d);
}

cplx ParticleHoleAmplitudes::ghat(const Vec4& q) const {
  cplx v = conjugated ? std::conj(fourier_transform(source, {-q[0], -q[1], -q[2], -q[3]}))
                      : fourier_transform(source, q);
  if (options.inverse_hole_factor) v /= thermal_factor(Sign::minus, tp.omega(norm3({q[1], q[2], q[3]})), tp.beta);
  return v;
}

cplx ParticleHoleAmplitudes::particle(const Vec3& k) const {
  const double w = tp.omega(norm3(k));
  return thermal_factor(Sign::plus, w, tp.beta) * ghat({w, k[0], k[1], k[2]}) / std::sqrt(2 * w);
}

cplx ParticleHoleAmplitudes::hole(const Vec3& k) const {
  const double w = tp.omega(norm3(k));
  const double bm = thermal_factor(Sign::minus, w, tp.beta);
  if (bm == 0.0) return 0.0;
  return bm * ghat({-w, -k[0], -k[1], -k[2]}) / std::sqrt(2 * w);
}

namespace {

cplx centered_effective(const ParticleHoleAmplitudes& a, double q0, double kmag) {
  cplx v = a.conjugated ? std::conj(centered_transform(a.source, -q0, kmag)) : centered_transform(a.source, q0, kmag);
  if (a.options.inverse_hole_factor) v /= thermal_factor(Sign::minus, a.tp.omega(kmag), a.tp.beta);
  return v;
}

}  // namespace

cplx ParticleHoleAmplitudes::particle_radial(double kmag) const {
  const double w = tp.omega(kmag);
  return thermal_factor(Sign::plus, w, tp.beta) * centered_effective(*this, w, kmag) / std::sqrt(2 * w);
}

cplx ParticleHoleAmplitudes::hole_radial(double kmag) const {
  const double w = tp.omega(kmag);
  const double bm = thermal_factor(Sign::minus, w, tp.beta);
  if (bm == 0.0) return 0.0;
  return bm * centered_effective(*this, -w, kmag) / std::sqrt(2 * w);
}

double ParticleHoleAmplitudes::kmax() const {
  const auto& w = source.widths;
  switch (source.kind) {
    case PacketKind::gaussian: {
      const double ws = std::min({w[1], w[2], w[3]});
      double k = std::sqrt(80.0 / (ws * ws + w[0] * w[0]));
      // 1/B- grows like e^{beta omega / 2}
      if (options.inverse_hole_factor && std::isfinite(tp.beta)) k += tp.beta / (ws * ws + w[0] * w[0]);
      return k;
    }
    case PacketKind::momentum_window: {
      const double q = std::max(std::abs(source.window->lower), std::abs(source.window->upper));
      const double ws = std::min({w[1], w[2], w[3]});
      const double kw = std::sqrt(std::max(q * q - tp.mass * tp.mass, 0.0));
      return std::max(1e-6, std::min(kw, std::sqrt(80.0) / ws));
    }
    case PacketKind::bump_product:
      return 200.0 / std::min({w[0], w[1], w[2], w[3]});
  }
  return 1.0;
}

ParticleHoleAmplitudes ParticleHoleAmplitudes::adjoint() const {
  ParticleHoleAmplitudes r = *this;
  r.conjugated = !conjugated;
  return r;
}

ParticleHoleAmplitudes one_particle_state(const PacketSpec& g, const ThermalParams& tp, StateOptions opts) {
  g.validate();
  tp.validate();
  return ParticleHoleAmplitudes{g, tp, opts, false};
}

modefield::RadialProfile system_profile(const ParticleHoleAmplitudes& a, const Rule1D& krule) {
  if (!a.isotropic()) throw std::invalid_argument("state: radial profiles need a spatially isotropic packet");
  const ThermalParams tp = a.tp;
  return modefield::make_profile(
      krule, tp.mass,
      [&](double k) {
        const double w = tp.omega(k);
        return thermal_factor(Sign::plus, w, tp.beta) * a.particle_radial(k) / std::sqrt(2 * w);
      },
      [&](double k) {
        const double w = tp.omega(k);
        return thermal_factor(Sign::minus, w, tp.beta) * a.hole_radial(k) / std::sqrt(2 * w);
      });
}

modefield::RadialProfile bath_profile(const ParticleHoleAmplitudes& a, const Rule1D& krule) {
  if (!a.isotropic()) throw std::invalid_argument("state: radial profiles need a spatially isotropic packet");
  const ThermalParams tp = a.tp;
  // J psi has particle amplitude conj(hole) and hole amplitude conj(particle)
  return modefield::make_profile(
      krule, tp.mass,
      [&](double k) {
        const double w = tp.omega(k);
        return thermal_factor(Sign::plus, w, tp.beta) * std::conj(a.hole_radial(k)) / std::sqrt(2 * w);
      },
      [&](double k) {
        const double w = tp.omega(k);
        return thermal_factor(Sign::minus, w, tp.beta) * std::conj(a.particle_radial(k)) / std::sqrt(2 * w);
      });
}

IntegrationResult state_norm(const ParticleHoleAmplitudes& a, const QuadratureSpec& q) {
  q.validate();
  if (a.isotropic()) {
    auto [v, e] = radial_moment<double>(
        [&](double k) { return std::norm(a.particle_radial(k)) + std::norm(a.hole_radial(k)); }, a.kmax(), q);
    return {v, e, 0};
  }
  auto [v, e] = cube_moment<double>(
      [&](const Vec3& k) { return std::norm(a.particle(k)) + std::norm(a.hole(k)); }, a.kmax(), q);
  return {v, e, 0};
}

cplx j_overlap(const ParticleHoleAmplitudes& x, const ParticleHoleAmplitudes& y, const QuadratureSpec& q) {
  // <x, J y> = int conj(particle_x) conj(hole_y) + conj(hole_x) conj(particle_y)
  if (x.isotropic() && y.isotropic() && x.source.center == y.source.center) {
    return radial_moment<cplx>(
               [&](double k) {
                 return std::conj(x.particle_radial(k)) * std::conj(y.hole_radial(k)) +
                        std::conj(x.hole_radial(k)) * std::conj(y.particle_radial(k));
               },
               std::max(x.kmax(), y.kmax()), q)
        .first;
  }
  return cube_moment<cplx>(
             [&](const Vec3& k) {
               return std::conj(x.particle(k)) * std::conj(y.hole(k)) + std::conj(x.hole(k)) * std::conj(y.particle(k));
             },
             std::max(x.kmax(), y.kmax()), q)
      .first;
}

namespace {

struct EnergyPass {
  double h = 0, bath = 0, hw = 0, bw = 0;
};

EnergyPass energy_pass(const ParticleHoleAmplitudes& a, const PacketSpec& f, double window, double res) {
  const auto sm = modefield::separable(f);
  const Vec4& c = a.source.center;
  const double kmax = a.kmax();
  const Vec3 off{sm.space_center[0] - c[1], sm.space_center[1] - c[2], sm.space_center[2] - c[3]};
  const double d = norm3(off);
  const double tspan = std::max(std::abs(sm.t_lower - c[0]), std::abs(sm.t_upper - c[0]));
  const double extent = tspan + d + sm.space_radius;
  Rule1D kr = modefield::radial_k_rule(kmax, extent, 12.0 / res, 16);

  auto sys = system_profile(a, kr);
  auto bath = bath_profile(a, kr);

  // the slowest oscillation in t comes from products of positive and negative
  // frequency parts of the same profile
  auto cross_k = [&](const modefield::RadialProfile& p) {
    double pm = 0, nm = 0;
    for (std::size_t i = 0; i < p.k.size(); ++i) {
      pm = std::max(pm, std::abs(p.pos[i]));
      nm = std::max(nm, std::abs(p.neg[i]));
    }
    double kc = 0.0;
    const double floor = 1e-10 * (pm + nm) * (pm + nm);
    for (std::size_t i = 0; i < p.k.size(); ++i)
      if (std::abs(p.pos[i]) * nm > floor && std::abs(p.neg[i]) * pm > floor) kc = p.k[i];
    return kc;
  };
  const double kc = std::max(cross_k(sys), cross_k(bath));
  const double sigma = a.source.kind == PacketKind::momentum_window ? 1.0 / kmax
                                                                     : std::min(a.source.widths[1], a.source.widths[0]);
  const double fscale = std::min(sm.t_upper - sm.t_lower, 2 * sm.space_radius);

  modefield::SphericalGrid grid;
  grid.r_panel = std::min({sigma, 6.0 / kmax, fscale / 8}) / res;
  const double wmax = std::sqrt(kc * kc + a.tp.mass * a.tp.mass);
  grid.t_panel = std::min({fscale / 8, 6.0 / (2 * wmax + 1e-300), 4 * sigma + fscale / 16}) / res;
  grid.theta_nodes = static_cast<int>(std::ceil(48 * res));
  grid.phi_nodes = static_cast<int>(std::ceil(64 * res));
  if (std::isfinite(window)) grid.x0_breaks = {-window, window};
  for (double s : {-4.0, -1.0, 1.0, 4.0}) grid.x0_breaks.push_back(c[0] + s * sigma);

  const double m2 = a.tp.mass * a.tp.mass;
  std::vector<double> hv, bv, hwv, bwv;
  modefield::integrate_spherical(
      {sys, bath}, c, sm, grid,
      [&](double x0, double, double, double w, std::span<const modefield::ModeValue> mv,
          const modefield::AngularMoments& m) {
        const auto e = [&](const modefield::ModeValue& v) {
          return std::norm(v.ft) + std::norm(v.fr) + m2 * std::norm(v.f);
        };
        const double hs = w * m.m0 * e(mv[0]);
        const double bs = w * m.m0 * e(mv[1]);
        hv.push_back(hs);
        bv.push_back(bs);
        if (std::isfinite(window) && x0 >= -window && x0 <= window) {
          hwv.push_back(hs);
          bwv.push_back(bs);
        }
      });
  return {pairwise_sum(hv), pairwise_sum(bv), pairwise_sum(hwv), pairwise_sum(bwv)};
}

}  // namespace

SmearedEnergy smeared_energy(const ParticleHoleAmplitudes& a, const PacketSpec& f, const QuadratureSpec& q,
                             const SmearOptions& opts) {
  q.validate();
  if (!a.isotropic()) throw std::invalid_argument("state: the radial pipeline needs a spatially isotropic packet");
  if (!(opts.resolution > 0)) throw std::invalid_argument("resolution: must be positive");
  const EnergyPass fine = energy_pass(a, f, opts.window, opts.resolution);
  SmearedEnergy r;
  r.h = fine.h;
  r.bath = fine.bath;
  r.ell = fine.h - fine.bath;
  r.h_window = std::isfinite(opts.window) ? fine.hw : kNaN;
  r.bath_window = std::isfinite(opts.window) ? fine.bw : kNaN;
  if (opts.estimate_error) {
    const EnergyPass coarse = energy_pass(a, f, opts.window, 0.5 * opts.resolution);
    r.err_h = std::abs(fine.h - coarse.h);
    r.err_bath = std::abs(fine.bath - coarse.bath);
    r.err_ell = std::abs((fine.h - fine.bath) - (coarse.h - coarse.bath));
  }
  return r;
}

IntegrationResult h_expectation(const ParticleHoleAmplitudes& a, const PacketSpec& f, const QuadratureSpec& q) {
  auto e = smeared_energy(a, f, q);
  return {e.h, e.err_h, 0};
}

IntegrationResult bath_h_expectation(const ParticleHoleAmplitudes& a, const PacketSpec& f, const QuadratureSpec& q) {
  auto e = smeared_energy(a, f, q);
  return {e.bath, e.err_bath, 0};
}

IntegrationResult ell_expectation(const ParticleHoleAmplitudes& a, const PacketSpec& f, const QuadratureSpec& q) {
  auto e = smeared_energy(a, f, q);
  return {e.ell, e.err_ell, 0};
}

KernelOracleResult kernel_space_oracle(const ParticleHoleAmplitudes& a, const PacketSpec& f, int nodes) {
  if (!a.isotropic()) throw std::invalid_argument("state: kernel oracle needs a spatially isotropic packet");
  if (f.kind != PacketKind::gaussian || !f.spatially_isotropic())
    throw std::invalid_argument("f: kernel oracle needs an isotropic gaussian");
  if (f.center != a.source.center) throw std::invalid_argument("f: kernel oracle needs f concentric with the state");
  const double m2 = a.tp.mass * a.tp.mass;
  const double kmax = a.kmax();
  const double wf = f.widths[1];
  const double qcut = std::sqrt(80.0) / wf;
  const int panels = std::max(4, nodes / 8);
  Rule1D kr = composite_gauss(0.0, kmax, panels, 8);
  Rule1D qr = gauss_legendre(nodes);
  auto prof_sys = system_profile(a, kr);
  auto prof_bath = bath_profile(a, kr);
  auto fh = [&](double q0, double qm) { return centered_transform(f, q0, qm); };

  auto run = [&](const modefield::RadialProfile& p) {
    std::vector<cplx> terms;
    for (std::size_t i = 0; i < kr.size(); ++i) {
      const double k = kr.nodes[i], wk = p.omega[i];
      for (std::size_t j = 0; j < kr.size(); ++j) {
        const double pm = kr.nodes[j], wp = p.omega[j];
        const double lo = std::abs(k - pm), hi = std::min(k + pm, qcut);
        if (lo >= hi) continue;
        const double pref = kr.weights[i] * kr.weights[j] * k * pm / (8 * std::pow(kPi, 4));
        const cplx uk = p.pos[i], up = p.pos[j], nk = p.neg[i], np = p.neg[j];
        cplx acc = 0.0;
        for (std::size_t l = 0; l < qr.size(); ++l) {
          const double qq = lo + (hi - lo) * 0.5 * (qr.nodes[l] + 1.0);
          const double wq = qr.weights[l] * 0.5 * (hi - lo) * qq;
          // same-sign terms: |k - p| = qq
          const double kp_same = 0.5 * (k * k + pm * pm - qq * qq);
          const double cs = wk * wp + kp_same + m2;
          acc += wq * cs * (std::conj(uk) * up * fh(wk - wp, qq) + std::conj(nk) * np * fh(wp - wk, qq));
          // mixed terms: |k + p| = qq
          const double kp_mix = 0.5 * (qq * qq - k * k - pm * pm);
          const double cm = -wk * wp - kp_mix + m2;
          acc += wq * cm * (std::conj(nk) * up * fh(-wk - wp, qq) + std::conj(uk) * np * fh(wk + wp, qq));
        }
        terms.push_back(pref * acc);
      }
    }
    return pairwise_sum(terms);
  };
  const cplx hs = run(prof_sys), bs = run(prof_bath);
  return {hs.real(), bs.real(), hs.imag(), bs.imag()};
}

GridEnergy grid_oracle_energy(const ParticleHoleAmplitudes& a, const PacketSpec& f,
                              const modefield::GridOracleSpec& spec) {
  const ThermalParams tp = a.tp;
  auto bp = [tp](const Vec3& k) { return thermal_factor(Sign::plus, tp.omega(norm3(k)), tp.beta); };
  auto bm = [tp](const Vec3& k) { return thermal_factor(Sign::minus, tp.omega(norm3(k)), tp.beta); };
  auto r2w = [tp](const Vec3& k) { return std::sqrt(2 * tp.omega(norm3(k))); };
  modefield::GridOracle sys(spec, tp.mass, [&](const Vec3& k) { return bp(k) * a.particle(k) / r2w(k); },
                            [&](const Vec3& k) { return bm(k) * a.hole(k) / r2w(k); });
  modefield::GridOracle bath(spec, tp.mass, [&](const Vec3& k) { return bp(k) * std::conj(a.hole(k)) / r2w(k); },
                             [&](const Vec3& k) { return bm(k) * std::conj(a.particle(k)) / r2w(k); });
  const double m2 = tp.mass * tp.mass;
  auto dens = [m2](std::size_t idx) {
    return [m2, idx](const Vec4&, std::span<const cplx> fv, std::span<const cplx> ft,
                     std::span<const std::array<cplx, 3>> g) {
      return std::norm(ft[idx]) + std::norm(g[idx][0]) + std::norm(g[idx][1]) + std::norm(g[idx][2]) +
             m2 * std::norm(fv[idx]);
    };
  };
  GridEnergy r;
  r.h = modefield::grid_smear({&sys}, f, dens(0));
  r.bath = modefield::grid_smear({&bath}, f, dens(0));
  return r;
}

L4Result l4_proxy(const PacketSpec& g, const ThermalParams& tp, const QuadratureSpec& q) {
  if (g.kind == PacketKind::momentum_window)
    throw UnsupportedInput("g: the sqrt(6) bound needs a real packet; momentum-window packets are complex");
  auto a = one_particle_state(g, tp);
  L4Result r;
  r.n2 = state_norm(a, q).value;
  r.proxy = std::sqrt(6.0) * r.n2;
  const double s = j_overlap(a, a, q).real();  // <psi, J psi>
  r.exact = std::sqrt(r.n2 * r.n2 + 2 * s * s);
  // phi(g)^2 Omega = a^dag(psi)^2 Omega + N^2 Omega, with ||a^dag(psi)^2 Omega||^2 = 2 N^4
  r.phi_sq_norm_sq = r.n2 * r.n2 + 2 * r.n2 * r.n2;
  return r;
}

double l4_exact(const ParticleHoleAmplitudes& a, const QuadratureSpec& q) {
  const auto b = a.adjoint();
  const double n2 = state_norm(a, q).value;
  const cplx v = j_overlap(b, b, q) * j_overlap(a, a, q) + j_overlap(b, a, q) * j_overlap(a, b, q);
  return std::sqrt(n2 * n2 + v.real());
}

IntegrationResult hole_dominance(const ParticleHoleAmplitudes& a, const QuadratureSpec& q) {
  return state_norm(a.adjoint(), q);
}

CancellationReport liouville_cancellation_check(const ThermalParams& tp, const std::vector<Vec3>& ks) {
  tp.validate();
  CancellationReport r;
  for (const auto& k : ks) {
    const double kk = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    const double wk = tp.omega(std::sqrt(kk));
    // p = -k: -omega_k omega_p - k.p + m^2
    const double pair = -wk * wk + kk + tp.mass * tp.mass;
    r.max_pair_coefficient = std::max(r.max_pair_coefficient, std::abs(pair) / (wk * wk));
    const double bp = thermal_factor(Sign::plus, wk, tp.beta), bm = thermal_factor(Sign::minus, wk, tp.beta);
    r.max_mixed_coefficient = std::max(r.max_mixed_coefficient, std::abs(bm * bp - bp * bm));
    r.max_diagonal_residual = std::max(r.max_diagonal_residual, std::abs(wk * (bp * bp - bm * bm) - wk) / wk);
    ++r.samples;
  }
  return r;
}

FactorReport thermal_factor_check(double mass, const std::vector<double>& omegas, const std::vector<double>& betas) {
  FactorReport r;
  for (double b : betas) {
    const double b0 = thermal_factor(Sign::plus, mass, b);
    for (double w : omegas) {
      if (w < mass) throw std::invalid_argument("omega: below the mass shell");
      const double bp = thermal_factor(Sign::plus, w, b), bm = thermal_factor(Sign::minus, w, b);
      r.max_identity_residual = std::max(r.max_identity_residual, std::abs(bp * bp - bm * bm - 1.0));
      r.max_order_violation = std::max({r.max_order_violation, bm - bp, bp - b0});
      ++r.points;
    }
  }
  return r;
}

void validate_ladder(const std::vector<double>& lambdas) {
  if (lambdas.empty()) throw std::invalid_argument("lambdas: ladder is empty");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > 0) || !std::isfinite(lambdas[i])) throw std::invalid_argument("lambdas: entries must be positive");
    if (i && !(lambdas[i] > lambdas[i - 1])) throw std::invalid_argument("lambdas: ladder must be strictly increasing");
  }
}

namespace {

PacketSpec recentered(const PacketSpec& f) {
  if (evaluate(f, {0, 0, 0, 0}) > 0) return f;
  PacketSpec r = f;
  r.center = {0, 0, 0, 0};
  return r;
}

}  // namespace

std::vector<QeiReport> scan_l4_violation(const PacketSpec& chi, const PacketSpec& f, const std::vector<double>& lambdas,
                                         const ThermalParams& tp, const QuadratureSpec& q, const ScanOptions& opts) {
  validate_ladder(lambdas);
  if (chi.kind == PacketKind::momentum_window) throw UnsupportedInput("chi: must be a real position-space packet");
  const PacketSpec fr = recentered(f);
  std::vector<QeiReport> out;
  for (double lam : lambdas) {
    const PacketSpec g = scale_translate(chi, lam, {0, 0, 0, 0});
    const auto a = one_particle_state(g, tp);
    QeiReport r;
    r.lambda = lam;
    const auto n2 = state_norm(a, q);
    r.l2_norm_sq = n2.value;
    r.err_n2 = n2.error;
    r.l4_proxy = std::sqrt(6.0) * n2.value;
    if (opts.l4_exact) r.l4_exact = l4_exact(a, q);
    r.adjoint_norm_sq = hole_dominance(a, q).value;
    const auto e = smeared_energy(a, fr, q, {opts.window, opts.resolution, true});
    r.h_expect = e.h;
    r.bath_expect = e.bath;
    r.ell_expect = e.ell;
    r.h_window = e.h_window;
    r.bath_window = e.bath_window;
    r.err_h = e.err_h;
    r.err_bath = e.err_bath;
    r.err_ell = e.err_ell;
    r.ratio = e.h / r.l4_proxy;
    out.push_back(r);
  }
  return out;
}

std::vector<QeiReport> scan_l2_violation(const PacketSpec& chi, const PacketSpec& f, const std::vector<double>& lambdas,
                                         const ThermalParams& tp, const QuadratureSpec& q, const ScanOptions& opts) {
  validate_ladder(lambdas);
  if (chi.kind != PacketKind::momentum_window) throw std::invalid_argument("chi: must be a momentum-window packet");
  if (!(chi.window->upper < 0)) throw std::invalid_argument("chi.window: must lie at negative frequencies");
  const PacketSpec fr = recentered(f);
  std::vector<QeiReport> out;
  for (double lam : lambdas) {
    const PacketSpec g = scale_translate(chi, lam, {0, 0, 0, 0});
    const auto a = one_particle_state(g, tp, StateOptions{true});
    QeiReport r;
    r.lambda = lam;
    const auto n2 = state_norm(a, q);
    r.l2_norm_sq = n2.value;
    r.err_n2 = n2.error;
    if (opts.l4_exact) r.l4_exact = l4_exact(a, q);
    r.adjoint_norm_sq = hole_dominance(a, q).value;
    const auto e = smeared_energy(a, fr, q, {opts.window, opts.resolution, true});
    r.h_expect = e.h;
    r.bath_expect = e.bath;
    r.ell_expect = e.ell;
    r.h_window = e.h_window;
    r.bath_window = e.bath_window;
    r.err_h = e.err_h;
    r.err_bath = e.err_bath;
    r.err_ell = e.err_ell;
    out.push_back(r);
  }
  return out;
}

}  // namespace qlp::thermal
