#include "qlp/rindler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace qlp::rindler {

namespace {

constexpr double kPi = std::numbers::pi;

double norm3(const modefield::Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

void require_vacuum(const thermal::ParticleHoleAmplitudes& psi) {
  if (std::isfinite(psi.tp.beta)) throw std::invalid_argument("state: wedge functionals need the vacuum (beta = inf)");
  if (psi.conjugated || psi.options.inverse_hole_factor)
    throw std::invalid_argument("state: wedge functionals need a plain phi(g) Omega vector");
}

// Gaussian CDF.
double phi_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

struct Channels6 {
  std::array<double, 5> ch{};
  double cartesian = 0.0;
};

Channels6 boost_pass(const thermal::ParticleHoleAmplitudes& psi, const WedgeSmearing& f, double res) {
  const auto sm = f.separable();
  const Vec4& c = psi.source.center;
  const double kmax = psi.kmax();
  const modefield::Vec3 off{sm.space_center[0] - c[1], sm.space_center[1] - c[2], sm.space_center[2] - c[3]};
  const double d = norm3(off);
  const double tspan = std::max(std::abs(sm.t_lower - c[0]), std::abs(sm.t_upper - c[0]));
  const double extent = tspan + d + sm.space_radius;
  const Rule1D kr = modefield::radial_k_rule(kmax, extent, 12.0 / res, 16);
  const auto prof = thermal::system_profile(psi, kr);

  const double sigma = std::min(psi.source.widths[1], psi.source.widths[0]);
  const double fscale = std::min(sm.t_upper - sm.t_lower, 2 * sm.space_radius);
  modefield::SphericalGrid grid;
  grid.r_panel = std::min({sigma, 6.0 / kmax, fscale / 8}) / res;
  grid.t_panel = std::min({fscale / 8, 6.0 / (2 * psi.tp.mass), 4 * sigma + fscale / 16}) / res;
  grid.theta_nodes = static_cast<int>(std::ceil(48 * res));
  grid.phi_nodes = static_cast<int>(std::ceil(64 * res));
  for (double s : {-4.0, -1.0, 1.0, 4.0}) grid.x0_breaks.push_back(c[0] + s * sigma);

  const double m2 = psi.tp.mass * psi.tp.mass;
  const double c1 = c[1];
  std::array<std::vector<double>, 6> acc;
  modefield::integrate_spherical(
      {prof}, c, sm, grid,
      [&](double x0, double, double r, double w, std::span<const modefield::ModeValue> mv,
          const modefield::AngularMoments& m) {
        const auto& v = mv[0];
        const double A = std::norm(v.ft), C = std::norm(v.fr), F2 = std::norm(v.f);
        const double B = std::real(std::conj(v.ft) * v.fr);
        const double n1 = m.m1[0], n11 = m.m2[0][0], n111 = m.m3[0][0][0];
        acc[0].push_back(w * C * (c1 * m.m2[1][1] + r * m.m3[0][1][1]));
        acc[1].push_back(w * C * (c1 * m.m2[2][2] + r * m.m3[0][2][2]));
        acc[2].push_back(w * m2 * F2 * (c1 * m.m0 + r * n1));
        acc[3].push_back(0.5 * w *
                         ((x0 + c1) * (A * m.m0 - 2 * B * n1 + C * n11) + r * (A * n1 - 2 * B * n11 + C * n111)));
        acc[4].push_back(0.5 * w *
                         ((c1 - x0) * (A * m.m0 + 2 * B * n1 + C * n11) + r * (A * n1 + 2 * B * n11 + C * n111)));
        const double e = A + C + m2 * F2;
        acc[5].push_back(w * ((c1 * m.m0 + r * n1) * e - 2 * x0 * B * n1));
      });
  Channels6 out;
  for (int i = 0; i < 5; ++i) out.ch[i] = pairwise_sum(acc[i]);
  out.cartesian = pairwise_sum(acc[5]);
  return out;
}

// Channel densities at a point from a radial mode value; y = x - c, `t2`/`t3` are the
// weights standing in for y2^2/r^2 and y3^2/r^2.
std::array<double, 5> point_channels(const Vec4& x, const modefield::ModeValue& v, double n1, double t2, double t3,
                                     double m2) {
  const LightconeCoords l = to_lightcone(x);
  const cplx f1 = v.fr * n1;
  const double c = std::norm(v.fr);
  return {x[1] * c * t2, x[1] * c * t3, x[1] * m2 * std::norm(v.f), l.u * std::norm(v.ft - f1),
          -l.v * std::norm(v.ft + f1)};
}

}  // namespace

LightconeCoords to_lightcone(const Vec4& x) { return {0.5 * (x[0] + x[1]), 0.5 * (x[0] - x[1]), x[2], x[3]}; }

Vec4 from_lightcone(const LightconeCoords& l) { return {l.u + l.v, l.u - l.v, l.x2, l.x3}; }

bool in_wedge(const Vec4& x) { return x[1] > std::abs(x[0]); }

Vec4 wedge_reflect(const Vec4& x) { return {-x[0], -x[1], x[2], x[3]}; }

PacketSpec reflect(const PacketSpec& f) {
  f.validate();
  if (!f.has_position_form()) throw std::invalid_argument("reflect: needs a position-space packet");
  PacketSpec r = f;
  r.center = wedge_reflect(f.center);
  return r;
}

double wedge_mass_fraction(const PacketSpec& p) {
  p.validate();
  if (!p.has_position_form()) throw std::invalid_argument("wedge mass: needs a position-space packet");
  const double c0 = p.center[0], c1 = p.center[1], w0 = p.widths[0], w1 = p.widths[1];
  if (p.kind == PacketKind::gaussian) {
    // complement: int phi0(x0) P(x1 <= |x0|) dx0
    const Rule1D r = composite_gauss(c0 - 14 * w0, c0 + 14 * w0, 56, 16);
    std::vector<double> v(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double x0 = r.nodes[i];
      const double y = (x0 - c0) / w0;
      const double dens = std::exp(-0.5 * y * y) / (std::sqrt(2 * kPi) * w0);
      v[i] = r.weights[i] * dens * phi_cdf((std::abs(x0) - c1) / w1);
    }
    return 1.0 - pairwise_sum(v);
  }
  // bump product: exact when the support box clears the wedge boundary
  if (c1 - w1 >= std::abs(c0) + w0) return 1.0;
  auto b = [](double t) { return std::abs(t) < 1.0 ? std::exp(-1.0 / (1.0 - t * t)) : 0.0; };
  const Rule1D r0 = composite_gauss(c0 - w0, c0 + w0, 32, 16);
  const Rule1D& g = gauss_legendre(16);
  double total = 0.0, inside = 0.0;
  // normalization of b on [-1, 1]
  const Rule1D rn = composite_gauss(-1.0, 1.0, 32, 16);
  double z = 0.0;
  for (std::size_t i = 0; i < rn.size(); ++i) z += rn.weights[i] * b(rn.nodes[i]);
  for (std::size_t i = 0; i < r0.size(); ++i) {
    const double x0 = r0.nodes[i];
    const double p0 = b((x0 - c0) / w0) / (w0 * z);
    total += r0.weights[i] * p0;
    const double lo = std::max(std::abs(x0), c1 - w1), hi = c1 + w1;
    if (lo >= hi) continue;
    double cdf = 0.0;
    for (int panel = 0; panel < 32; ++panel) {
      const double a0 = lo + (hi - lo) * panel / 32.0, a1 = lo + (hi - lo) * (panel + 1) / 32.0;
      for (std::size_t k = 0; k < g.size(); ++k) {
        const double x1 = 0.5 * (a0 + a1) + 0.5 * (a1 - a0) * g.nodes[k];
        cdf += 0.5 * (a1 - a0) * g.weights[k] * b((x1 - c1) / w1) / (w1 * z);
      }
    }
    inside += r0.weights[i] * p0 * cdf;
  }
  return inside / total;
}

bool wedge_supported(const PacketSpec& p, double tol) { return wedge_mass_fraction(p) >= 1.0 - tol; }

thermal::ParticleHoleAmplitudes vacuum_state(const PacketSpec& g, double mass) {
  return thermal::one_particle_state(g, {std::numeric_limits<double>::infinity(), mass});
}

double WedgeSmearing::evaluate(const Vec4& x) const {
  const double v = qlp::evaluate(base, x);
  return squared ? v * v : v;
}

modefield::SeparableSmearing WedgeSmearing::separable() const {
  auto s = modefield::separable(base);
  if (squared) {
    auto tf = s.time_factor;
    auto sf = s.space_factor;
    s.time_factor = [tf](double x0) {
      const double v = tf(x0);
      return v * v;
    };
    s.space_factor = [sf](const modefield::Vec3& x) {
      const double v = sf(x);
      return v * v;
    };
  }
  return s;
}

std::array<std::array<double, 2>, 4> WedgeSmearing::box() const { return support_box(base, squared ? 4.5 : 6.5); }

double WedgeSmearing::scale() const {
  const double w = *std::min_element(base.widths.begin(), base.widths.end());
  return squared && base.kind == PacketKind::gaussian ? w / std::numbers::sqrt2 : w;
}

WedgeSmearing smearing_of(const PacketSpec& f) {
  f.validate();
  if (!f.has_position_form()) throw std::invalid_argument("smearing: needs a position-space packet");
  return {f, false};
}

WedgeSmearing square_of(const PacketSpec& g) {
  g.validate();
  if (!g.has_position_form()) throw std::invalid_argument("smearing: needs a position-space packet");
  return {g, true};
}

double BoostChannels::total() const {
  double s = 0.0;
  for (double v : value) s += v;
  return s;
}

double BoostChannels::total_error() const {
  double s = 0.0;
  for (double v : error) s += v;
  return s;
}

IntegrationResult kappa_expectation(const thermal::ParticleHoleAmplitudes& psi, const WedgeSmearing& f,
                                    const QuadratureSpec& q, double resolution) {
  q.validate();
  require_vacuum(psi);
  if (!psi.isotropic()) throw std::invalid_argument("state: the radial pipeline needs a spatially isotropic packet");
  const auto fine = boost_pass(psi, f, resolution);
  const auto coarse = boost_pass(psi, f, 0.5 * resolution);
  return {fine.cartesian, std::abs(fine.cartesian - coarse.cartesian), 0};
}

BoostChannels kappa_channels(const thermal::ParticleHoleAmplitudes& psi, const WedgeSmearing& f,
                             const QuadratureSpec& q, double resolution) {
  q.validate();
  require_vacuum(psi);
  if (!psi.isotropic()) throw std::invalid_argument("state: the radial pipeline needs a spatially isotropic packet");
  const auto fine = boost_pass(psi, f, resolution);
  const auto coarse = boost_pass(psi, f, 0.5 * resolution);
  BoostChannels r;
  r.value = fine.ch;
  for (int i = 0; i < 5; ++i) r.error[i] = std::abs(fine.ch[i] - coarse.ch[i]);
  return r;
}

BoostChannels kappa_lightcone_expectation(const thermal::ParticleHoleAmplitudes& psi, const WedgeSmearing& f,
                                          LightconePath path, const QuadratureSpec& q) {
  q.validate();
  require_vacuum(psi);
  if (!psi.isotropic()) throw std::invalid_argument("state: lightcone evaluation needs a spatially isotropic packet");
  const Vec4& c = psi.source.center;
  const auto box = f.box();
  const double tspan = std::max(std::abs(box[0][0] - c[0]), std::abs(box[0][1] - c[0]));
  double rmax = 0.0;
  for (int i = 1; i < 4; ++i) rmax += std::pow(std::max(std::abs(box[i][0] - c[i]), std::abs(box[i][1] - c[i])), 2);
  rmax = std::sqrt(rmax);
  const Rule1D kr = modefield::radial_k_rule(psi.kmax(), tspan + rmax, 6.0, 16);
  const auto prof = thermal::system_profile(psi, kr);
  const double m2 = psi.tp.mass * psi.tp.mass;

  const double ulo = 0.5 * (box[0][0] + box[1][0]), uhi = 0.5 * (box[0][1] + box[1][1]);
  const double vlo = 0.5 * (box[0][0] - box[1][1]), vhi = 0.5 * (box[0][1] - box[1][0]);

  auto at = [&](const Vec4& x, double t2w, double t3w, bool averaged, std::array<double, 5>& out) {
    out.fill(0.0);
    const double fv = f.evaluate(x);
    if (fv == 0.0) return;
    const modefield::Vec3 y{x[1] - c[1], x[2] - c[2], x[3] - c[3]};
    const double r = norm3(y);
    const auto v = modefield::evaluate(prof, x[0] - c[0], r);
    const double n1 = r > 0 ? y[0] / r : 0.0;
    double t2 = t2w, t3 = t3w;
    if (!averaged) {
      t2 = r > 0 ? y[1] * y[1] / (r * r) : 1.0 / 3.0;
      t3 = r > 0 ? y[2] * y[2] / (r * r) : 1.0 / 3.0;
    }
    out = point_channels(x, v, n1, t2, t3, m2);
    for (double& o : out) o *= fv;
  };

  BoostChannels res;
  if (path == LightconePath::qmc) {
    // Logistic proposals centred on the smearing, matched to its widths in (u, v, x2, x3);
    // heavier tails than the smearing keep the weights bounded.
    const auto& bw = f.base.widths;
    const double wf = f.squared && f.base.kind == PacketKind::gaussian ? 1.0 / std::numbers::sqrt2 : 1.0;
    const LightconeCoords lc = to_lightcone(f.base.center);
    const std::array<double, 4> mu{lc.u, lc.v, lc.x2, lc.x3};
    const double sqrt3_pi = std::sqrt(3.0) / kPi;
    const std::array<double, 4> sc{0.5 * std::hypot(bw[0], bw[1]) * wf * sqrt3_pi,
                                   0.5 * std::hypot(bw[0], bw[1]) * wf * sqrt3_pi, bw[2] * wf * sqrt3_pi,
                                   bw[3] * wf * sqrt3_pi};
    const int shifts = std::max(2, q.qmc_shifts);
    const long n = std::max<long>(q.points, 64);
    std::mt19937_64 rng(q.seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::array<std::vector<double>, 5> est;
    std::array<double, 4> h{};
    std::array<double, 5> val{};
    for (int s = 0; s < shifts; ++s) {
      std::array<double, 4> shift{};
      for (double& z : shift) z = uni(rng);
      std::array<std::vector<double>, 5> terms;
      for (auto& t : terms) t.reserve(static_cast<std::size_t>(n));
      for (long i = 0; i < n; ++i) {
        halton_point(static_cast<std::uint64_t>(i), 4, h);
        std::array<double, 4> y{};
        double w = 2.0;  // du dv -> dx0 dx1
        for (int d = 0; d < 4; ++d) {
          const double p = std::clamp(std::fmod(h[d] + shift[d], 1.0), 1e-300, 1.0 - 1e-16);
          const double z = std::log(p / (1.0 - p));
          y[d] = mu[d] + sc[d] * z;
          // 1 / pdf of the logistic proposal
          w *= sc[d] / (p * (1.0 - p));
        }
        at(from_lightcone({y[0], y[1], y[2], y[3]}), 0, 0, false, val);
        for (int k = 0; k < 5; ++k) terms[k].push_back(w * val[k]);
      }
      for (int k = 0; k < 5; ++k) est[k].push_back(pairwise_sum(terms[k]) / static_cast<double>(n));
    }
    for (int k = 0; k < 5; ++k) {
      double mean = 0.0;
      for (double e : est[k]) mean += e;
      mean /= shifts;
      double var = 0.0;
      for (double e : est[k]) var += (e - mean) * (e - mean);
      res.value[k] = mean;
      res.error[k] = std::sqrt(var / (shifts * (shifts - 1.0)));
    }
    return res;
  }

  // Reduced path: (u, v, rho) with the azimuth integrated analytically when both the
  // state and the smearing are symmetric about the x1 axis, otherwise by Gauss rules.
  const auto& b = f.base;
  const bool axial = c[2] == 0.0 && c[3] == 0.0 && b.center[2] == 0.0 && b.center[3] == 0.0 &&
                     b.widths[2] == b.widths[3] && b.kind == PacketKind::gaussian;
  // transverse polar coordinates about the smearing's axis
  const double t2c = axial ? 0.0 : b.center[2], t3c = axial ? 0.0 : b.center[3];
  double rho_max = 0.0;
  for (int i = 2; i < 4; ++i) {
    const double tc = i == 2 ? t2c : t3c;
    rho_max += std::pow(std::max(std::abs(box[i][0] - tc), std::abs(box[i][1] - tc)), 2);
  }
  rho_max = std::sqrt(rho_max);
  const double fs = f.scale();
  auto pass = [&](double res_factor) {
    const double panel = 2.0 * fs / res_factor;
    auto rule = [&](double lo, double hi) {
      const int panels = std::max(4, static_cast<int>(std::ceil((hi - lo) / panel)));
      return composite_gauss(lo, hi, panels, 8);
    };
    const Rule1D ru = rule(ulo, uhi), rv = rule(vlo, vhi), rr = rule(0.0, rho_max);
    // periodic azimuth: the equal-weight rule converges geometrically
    Rule1D rp{{0.0}, {2 * kPi}};
    if (!axial) {
      const int np = static_cast<int>(std::ceil(12 * res_factor));
      rp.nodes.resize(np);
      rp.weights.assign(np, 2 * kPi / np);
      for (int i = 0; i < np; ++i) rp.nodes[i] = 2 * kPi * i / np;
    }
    std::array<std::vector<double>, 5> terms;
    std::array<double, 5> val{};
    for (std::size_t iu = 0; iu < ru.size(); ++iu)
      for (std::size_t iv = 0; iv < rv.size(); ++iv)
        for (std::size_t ir = 0; ir < rr.size(); ++ir)
          for (std::size_t ip = 0; ip < rp.size(); ++ip) {
            const double rho = rr.nodes[ir];
            const double ph = rp.nodes[ip];
            const LightconeCoords l{ru.nodes[iu], rv.nodes[iv], t2c + rho * std::cos(ph), t3c + rho * std::sin(ph)};
            const Vec4 x = from_lightcone(l);
            const double w = 2.0 * ru.weights[iu] * rv.weights[iv] * rr.weights[ir] * rho * rp.weights[ip];
            if (axial) {
              const double y1 = x[1] - c[1];
              const double r2 = y1 * y1 + rho * rho;
              const double t = r2 > 0 ? 0.5 * rho * rho / r2 : 1.0 / 3.0;
              at(x, t, t, true, val);
            } else {
              at(x, 0, 0, false, val);
            }
            for (int k = 0; k < 5; ++k) terms[k].push_back(w * val[k]);
          }
    std::array<double, 5> out{};
    for (int k = 0; k < 5; ++k) out[k] = pairwise_sum(terms[k]);
    return out;
  };
  const double rf = std::max(1.0, static_cast<double>(q.points) / 32.0);
  const auto fine = pass(rf);
  const auto coarse = pass(0.5 * rf);
  for (int k = 0; k < 5; ++k) {
    res.value[k] = fine[k];
    res.error[k] = std::abs(fine[k] - coarse[k]);
  }
  return res;
}

namespace {

QuadratureSpec cube_spec(const QuadratureSpec& q, double kmax) {
  QuadratureSpec s = q;
  s.scheme = Scheme::adaptive;
  s.points = std::max<long>(16, q.points);
  s.lower = {-kmax, -kmax, -kmax};
  s.upper = {kmax, kmax, kmax};
  return s;
}

}  // namespace

IntegrationResult boost_generator_expectation(const thermal::ParticleHoleAmplitudes& psi, const QuadratureSpec& q) {
  q.validate();
  require_vacuum(psi);
  const PacketSpec& g = psi.source;
  if (!g.has_position_form()) throw std::invalid_argument("state: the boost generator needs a position-space packet");
  const double m2 = psi.tp.mass * psi.tp.mass;
  const double norm = 1.0 / std::pow(2 * kPi, 3);
  auto kern = [&](std::span<const double> k) {
    const double w = std::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2] + m2);
    const Vec4 qv{w, k[0], k[1], k[2]};
    const cplx gh = fourier_transform(g, qv);
    // d/dk1 ghat(omega_k, k) = (k1/omega) i M^0 - i M^1
    const cplx dg = cplx(0, 1) * (k[0] / w * fourier_transform_moment(g, qv, 0) - fourier_transform_moment(g, qv, 1));
    return norm * 0.5 * std::imag(std::conj(dg) * gh);
  };
  return integrate(kern, 3, cube_spec(q, psi.kmax()));
}

IntegrationResult boost_fd_oracle(const thermal::ParticleHoleAmplitudes& psi, const QuadratureSpec& q, double step) {
  q.validate();
  require_vacuum(psi);
  if (!(step > 0.0)) throw std::invalid_argument("step: must be positive");
  const PacketSpec& g = psi.source;
  const double m2 = psi.tp.mass * psi.tp.mass;
  const double norm = 1.0 / std::pow(2 * kPi, 3);
  // <psi, U(s) psi> with (U(s) psi)^(k) = ghat(Lambda_s^{-1} k) / sqrt(2 omega)
  auto overlap_derivative = [&](double h) {
    auto kern = [&](std::span<const double> k) {
      const double w = std::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2] + m2);
      const cplx g0 = std::conj(fourier_transform(g, {w, k[0], k[1], k[2]}));
      auto boosted = [&](double s) {
        const double ch = std::cosh(s), sh = std::sinh(s);
        return fourier_transform(g, {ch * w - sh * k[0], ch * k[0] - sh * w, k[1], k[2]});
      };
      const cplx d = (boosted(h) - boosted(-h)) / (2 * h);
      // -i d/ds <psi, U(s) psi>
      return norm * std::real(cplx(0, -1) * g0 * d) / (2 * w);
    };
    return integrate(kern, 3, cube_spec(q, psi.kmax()));
  };
  const auto a = overlap_derivative(step);
  const auto b = overlap_derivative(0.5 * step);
  // Richardson step on the O(h^2) central difference
  const double v = (4 * b.value - a.value) / 3;
  return {v, std::abs(b.value - a.value) / 3 + b.error, a.evaluations + b.evaluations};
}

SpatialBoostIntegral boost_spatial_integral(const thermal::ParticleHoleAmplitudes& psi,
                                            const modefield::GridOracleSpec& spec, const std::vector<double>& radii) {
  require_vacuum(psi);
  if (radii.empty()) throw std::invalid_argument("radii: need at least one radius");
  const double mass = psi.tp.mass;
  modefield::GridOracle field(
      spec, mass, [&](const modefield::Vec3& k) { return psi.particle(k) / std::sqrt(2 * psi.tp.omega(norm3(k))); },
      [](const modefield::Vec3&) { return cplx(0.0); });
  modefield::GridSlice s;
  field.slice(0.0, s);
  const int n = spec.n;
  const Vec4& c = psi.source.center;
  SpatialBoostIntegral out;
  out.radii = radii;
  std::vector<std::vector<double>> terms(radii.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const std::size_t idx = (static_cast<std::size_t>(i) * n + j) * n + k;
        const double x1 = field.node(i), x2 = field.node(j), x3 = field.node(k);
        const double r = std::sqrt((x1 - c[1]) * (x1 - c[1]) + (x2 - c[2]) * (x2 - c[2]) + (x3 - c[3]) * (x3 - c[3]));
        const double e = std::norm(s.ft[idx]) + std::norm(s.grad[0][idx]) + std::norm(s.grad[1][idx]) +
                         std::norm(s.grad[2][idx]) + mass * mass * std::norm(s.f[idx]);
        for (std::size_t ir = 0; ir < radii.size(); ++ir)
          if (r < radii[ir]) terms[ir].push_back(x1 * e * field.cell_volume());
      }
  for (auto& t : terms) out.values.push_back(pairwise_sum(t));
  return out;
}

WedgeEll ell_wedge_expectation(const thermal::ParticleHoleAmplitudes& psi, const PacketSpec& f,
                               const QuadratureSpec& q) {
  const auto a = kappa_expectation(psi, smearing_of(f), q);
  const auto b = kappa_expectation(psi, smearing_of(reflect(f)), q);
  return {a.value, b.value, a.value + b.value, a.error, b.error};
}

namespace {

// <phi(g1) Omega, phi(g2) Omega> for isotropic packets of equal shape.
double vacuum_overlap(const PacketSpec& g1, const PacketSpec& g2, double mass, const QuadratureSpec& q) {
  if (!g1.spatially_isotropic() || !g2.spatially_isotropic())
    throw std::invalid_argument("overlap: needs isotropic packets");
  const Vec4 d{g2.center[0] - g1.center[0], g2.center[1] - g1.center[1], g2.center[2] - g1.center[2],
               g2.center[3] - g1.center[3]};
  const double ds = std::sqrt(d[1] * d[1] + d[2] * d[2] + d[3] * d[3]);
  const double kmax = vacuum_state(g1, mass).kmax();
  auto sum = [&](int panels) {
    const Rule1D r = composite_gauss(0.0, kmax, panels, 16);
    std::vector<double> v(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double k = r.nodes[i], w = std::sqrt(k * k + mass * mass);
      const cplx a = std::conj(centered_transform(g1, w, k)) * centered_transform(g2, w, k);
      v[i] = r.weights[i] * k * k / (2 * kPi * kPi) * std::real(a * std::polar(1.0, w * d[0])) *
             modefield::sph_j0(k * ds) / (2 * w);
    }
    return pairwise_sum(v);
  };
  int panels = std::max(16, static_cast<int>(q.points / 2));
  double prev = sum(panels);
  for (int it = 0; it < 8; ++it) {
    panels *= 2;
    const double cur = sum(panels);
    if (std::abs(cur - prev) <= std::max(q.target_rel_tol * std::abs(cur), 1e-300)) return cur;
    prev = cur;
  }
  return prev;
}

void check_family(const PacketSpec& chi, const PacketSpec& f, double a, const std::vector<double>& lambdas,
                  double mass) {
  chi.validate();
  f.validate();
  thermal::validate_ladder(lambdas);
  if (!(a > 0.0)) throw std::invalid_argument("a: must be positive");
  if (!(mass > 0.0)) throw std::invalid_argument("mass: must be positive");
  if (!chi.spatially_isotropic() || chi.kind != PacketKind::gaussian)
    throw std::invalid_argument("chi: wedge scans need an isotropic gaussian");
  if (!f.has_position_form()) throw std::invalid_argument("f: needs a position-space packet");
  if (!in_wedge(f.center)) throw std::invalid_argument("f: center must lie in the wedge");
}

}  // namespace

std::vector<QeiReport> scan_boost_l4_violation(const PacketSpec& chi, const PacketSpec& f, double a,
                                               const std::vector<double>& lambdas, double mass,
                                               const QuadratureSpec& q) {
  check_family(chi, f, a, lambdas, mass);
  const bool f_wedge = wedge_supported(f);
  std::vector<QeiReport> rows;
  for (double lam : lambdas) {
    const PacketSpec g = scale_translate(chi, lam, {0, a, 0, 0});
    const auto psi = vacuum_state(g, mass);
    QeiReport r;
    r.lambda = lam;
    const auto n2 = thermal::state_norm(psi, q);
    r.l2_norm_sq = n2.value;
    r.err_n2 = n2.error;
    r.l4_proxy = std::sqrt(6.0) * n2.value;
    const double jo = vacuum_overlap(g, reflect(g), mass, q);
    r.l4_exact = std::sqrt(n2.value * n2.value + 2 * jo * jo);
    const auto ch = kappa_channels(psi, smearing_of(f), q);
    r.h_expect = ch.total();
    r.err_h = ch.total_error();
    r.channel = ch.value[0];
    r.err_channel = ch.error[0];
    r.ratio = r.channel / r.l4_proxy;
    r.wedge = f_wedge && wedge_supported(g);
    rows.push_back(r);
  }
  return rows;
}

std::vector<QeiReport> scan_boost_l2_violation(const PacketSpec& chi, const PacketSpec& f, double a,
                                               const std::vector<double>& lambdas, double mass,
                                               const QuadratureSpec& q) {
  check_family(chi, f, a, lambdas, mass);
  const bool f_wedge = wedge_supported(f);
  std::vector<QeiReport> rows;
  for (double lam : lambdas) {
    const PacketSpec g = reflect(scale_translate(chi, lam, {0, a, 0, 0}));
    const auto psi = vacuum_state(g, mass);
    QeiReport r;
    r.lambda = lam;
    const auto n2 = thermal::state_norm(psi, q);
    r.l2_norm_sq = n2.value;
    r.err_n2 = n2.error;
    r.l4_proxy = std::sqrt(6.0) * n2.value;
    const auto e = ell_wedge_expectation(psi, f, q);
    r.h_expect = e.kappa;
    r.err_h = e.err_kappa;
    r.bath_expect = e.kappa_reflected;
    r.err_bath = e.err_reflected;
    r.ell_expect = e.ell;
    r.err_ell = e.err_kappa + e.err_reflected;
    r.channel = e.kappa_reflected;
    r.err_channel = e.err_reflected;
    r.ratio = r.channel / r.l2_norm_sq;
    // the mirror family lives in the left wedge
    r.wedge = f_wedge && wedge_supported(reflect(g));
    rows.push_back(r);
  }
  return rows;
}

QeiProbe qei_lower_probe(const PacketSpec& f, double mass, const quadform::ModeGrid& grid, int channel, int probes,
                         std::uint64_t seed) {
  if (probes < 1) throw std::invalid_argument("probes: need at least one probe");
  const auto form = quadform::assemble(quadform::boost_lightcone_terms(mass, channel), quadform::Smearing::of(f), grid);
  const auto ge = quadform::ground_energy(form);
  QeiProbe out;
  out.bound = ge.energy;
  out.stable = ge.stable;
  out.modes = grid.size();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  const auto n = static_cast<Eigen::Index>(grid.size());
  std::vector<Eigen::VectorXcd> one;
  std::vector<quadform::CMatrix> two;
  for (int p = 0; p < probes; ++p) {
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = cplx(nd(rng), nd(rng));
    one.push_back(v);
    quadform::CMatrix t(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) t(i, j) = cplx(nd(rng), nd(rng));
    two.push_back(t);
  }
  // First-order squeezed direction: T = -B / 2 scaled (perturbative ground state).
  two.push_back(-0.25 * form.pair);
  const auto pr = quadform::variational_probe(form, one, two);
  out.probe_min = pr.min_value;
  out.one_particle_min = pr.one_particle_min;
  const double scale = std::max(1.0, form.number.cwiseAbs().maxCoeff());
  out.respected = !ge.stable || pr.min_value >= ge.energy - 1e-10 * scale;
  return out;
}

}  // namespace qlp::rindler
