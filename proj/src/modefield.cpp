#include "qlp/modefield.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fftw3.h>

namespace qlp::modefield {

namespace {

constexpr double kPi = std::numbers::pi;

Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
double norm3(const Vec3& a) { return std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]); }

// Orthonormal frame (e, u1, u2) with e along `axis`.
std::array<Vec3, 3> frame(const Vec3& axis) {
  Vec3 e = axis;
  double n = norm3(e);
  if (n == 0.0) e = {0, 0, 1};
  else for (auto& v : e) v /= n;
  Vec3 t = std::abs(e[0]) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  // u1 = t - (t.e) e
  double te = t[0] * e[0] + t[1] * e[1] + t[2] * e[2];
  Vec3 u1{t[0] - te * e[0], t[1] - te * e[1], t[2] - te * e[2]};
  double n1 = norm3(u1);
  for (auto& v : u1) v /= n1;
  Vec3 u2{e[1] * u1[2] - e[2] * u1[1], e[2] * u1[0] - e[0] * u1[2], e[0] * u1[1] - e[1] * u1[0]};
  return {e, u1, u2};
}

}  // namespace

double sph_j0(double z) {
  if (std::abs(z) < 1e-3) {
    double z2 = z * z;
    return 1.0 - z2 / 6.0 + z2 * z2 / 120.0;
  }
  return std::sin(z) / z;
}

double sph_j0_prime(double z) {
  if (std::abs(z) < 1e-3) {
    double z2 = z * z;
    return -z / 3.0 + z * z2 / 30.0;
  }
  return (z * std::cos(z) - std::sin(z)) / (z * z);
}

RadialProfile make_profile(const Rule1D& krule, double mass, const std::function<cplx(double)>& pos,
                           const std::function<cplx(double)>& neg) {
  RadialProfile p;
  const std::size_t n = krule.size();
  p.k = krule.nodes;
  p.weight.resize(n);
  p.omega.resize(n);
  p.pos.resize(n);
  p.neg.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double k = krule.nodes[i];
    p.weight[i] = krule.weights[i] * k * k / (2.0 * kPi * kPi);
    p.omega[i] = std::sqrt(k * k + mass * mass);
    p.pos[i] = pos ? pos(k) : cplx{};
    p.neg[i] = neg ? neg(k) : cplx{};
  }
  return p;
}

Rule1D radial_k_rule(double kmax, double extent, double phase_per_panel, int order) {
  if (!(kmax > 0) || !(extent >= 0)) throw std::invalid_argument("radial_k_rule: kmax must be positive");
  int panels = static_cast<int>(std::ceil(kmax * extent / phase_per_panel));
  panels = std::max(panels, 16);
  return composite_gauss(0.0, kmax, panels, order);
}

ModeValue evaluate(const RadialProfile& p, double t, double r) {
  ModeValue v;
  for (std::size_t i = 0; i < p.k.size(); ++i) {
    const double w = p.weight[i];
    const cplx e = std::polar(1.0, -p.omega[i] * t);
    const cplx a = p.pos[i] * e + p.neg[i] * std::conj(e);
    const cplx b = cplx(0, -p.omega[i]) * (p.pos[i] * e - p.neg[i] * std::conj(e));
    const double kr = p.k[i] * r;
    const double j0 = sph_j0(kr);
    v.f += w * j0 * a;
    v.ft += w * j0 * b;
    v.fr += w * p.k[i] * sph_j0_prime(kr) * a;
  }
  return v;
}

RadialSlicer::RadialSlicer(std::vector<RadialProfile> profiles, std::vector<double> radii)
    : profiles_(std::move(profiles)), radii_(std::move(radii)) {
  if (profiles_.empty()) throw std::invalid_argument("RadialSlicer: no profiles");
  const auto& k = profiles_.front().k;
  for (const auto& p : profiles_)
    if (p.k != k) throw std::invalid_argument("RadialSlicer: profiles must share one k-grid");
  const auto nr = static_cast<Eigen::Index>(radii_.size());
  const auto nk = static_cast<Eigen::Index>(k.size());
  j0_.resize(nr, nk);
  dj0_.resize(nr, nk);
  for (Eigen::Index i = 0; i < nr; ++i)
    for (Eigen::Index j = 0; j < nk; ++j) {
      const double z = k[j] * radii_[i];
      j0_(i, j) = sph_j0(z);
      dj0_(i, j) = k[j] * sph_j0_prime(z);
    }
}

void RadialSlicer::slice(double t, std::vector<ModeValue>& out) const {
  const auto np = static_cast<Eigen::Index>(profiles_.size());
  const auto nk = j0_.cols();
  const auto nr = j0_.rows();
  Eigen::MatrixXd m(nk, 4 * np), a(nk, 2 * np);
  for (Eigen::Index p = 0; p < np; ++p) {
    const auto& pr = profiles_[p];
    for (Eigen::Index i = 0; i < nk; ++i) {
      const cplx e = std::polar(1.0, -pr.omega[i] * t);
      const cplx av = pr.weight[i] * (pr.pos[i] * e + pr.neg[i] * std::conj(e));
      const cplx bv = pr.weight[i] * cplx(0, -pr.omega[i]) * (pr.pos[i] * e - pr.neg[i] * std::conj(e));
      m(i, 4 * p) = av.real();
      m(i, 4 * p + 1) = av.imag();
      m(i, 4 * p + 2) = bv.real();
      m(i, 4 * p + 3) = bv.imag();
      a(i, 2 * p) = av.real();
      a(i, 2 * p + 1) = av.imag();
    }
  }
  Eigen::MatrixXd x = j0_ * m;
  Eigen::MatrixXd y = dj0_ * a;
  out.resize(static_cast<std::size_t>(np * nr));
  for (Eigen::Index p = 0; p < np; ++p)
    for (Eigen::Index i = 0; i < nr; ++i) {
      ModeValue& v = out[p * nr + i];
      v.f = {x(i, 4 * p), x(i, 4 * p + 1)};
      v.ft = {x(i, 4 * p + 2), x(i, 4 * p + 3)};
      v.fr = {y(i, 2 * p), y(i, 2 * p + 1)};
    }
}

SeparableSmearing separable(const PacketSpec& f, double nsigma) {
  f.validate();
  if (!f.has_position_form()) throw std::invalid_argument("smearing: needs a position-space packet");
  SeparableSmearing s;
  const PacketSpec p = f;
  s.space_center = {p.center[1], p.center[2], p.center[3]};
  if (p.kind == PacketKind::gaussian) {
    s.time_factor = [p](double x0) {
      const double y = (x0 - p.center[0]) / p.widths[0];
      return p.amplitude * std::exp(-0.5 * y * y);
    };
    s.space_factor = [p](const Vec3& x) {
      double e = 0.0;
      for (int i = 0; i < 3; ++i) {
        const double y = (x[i] - p.center[i + 1]) / p.widths[i + 1];
        e += 0.5 * y * y;
      }
      return std::exp(-e);
    };
    s.t_lower = p.center[0] - nsigma * p.widths[0];
    s.t_upper = p.center[0] + nsigma * p.widths[0];
    s.space_radius = nsigma * std::max({p.widths[1], p.widths[2], p.widths[3]});
  } else {
    auto b = [](double t) { return std::abs(t) < 1.0 ? std::exp(-1.0 / (1.0 - t * t)) : 0.0; };
    s.time_factor = [p, b](double x0) { return p.amplitude * b((x0 - p.center[0]) / p.widths[0]); };
    s.space_factor = [p, b](const Vec3& x) {
      double v = 1.0;
      for (int i = 0; i < 3 && v != 0.0; ++i) v *= b((x[i] - p.center[i + 1]) / p.widths[i + 1]);
      return v;
    };
    s.t_lower = p.center[0] - p.widths[0];
    s.t_upper = p.center[0] + p.widths[0];
    s.space_radius = std::sqrt(p.widths[1] * p.widths[1] + p.widths[2] * p.widths[2] + p.widths[3] * p.widths[3]);
  }
  return s;
}

void integrate_spherical(const std::vector<RadialProfile>& profiles, const Vec4& c, const SeparableSmearing& f,
                         const SphericalGrid& grid, const SmearCallback& cb) {
  if (grid.theta_nodes < 2 || grid.phi_nodes < 4 || !(grid.r_panel > 0) || !(grid.t_panel > 0))
    throw std::invalid_argument("spherical grid: resolution parameters must be positive");
  const Vec3 cs{c[1], c[2], c[3]};
  const Vec3 off = sub(f.space_center, cs);
  const double d = norm3(off);
  const double R = f.space_radius;
  double r0 = 0.0, r1 = d + R, cos_lo = -1.0;
  if (d > R * (1.0 + 1e-9)) {
    r0 = d - R;
    cos_lo = std::sqrt(1.0 - (R / d) * (R / d));
  }
  const auto fr = frame(off);

  // angular rule: Gauss in cos(theta) about the axis, trapezoid in phi
  const Rule1D& gl = gauss_legendre(grid.theta_nodes);
  std::vector<Vec3> dirs;
  std::vector<double> dw;
  for (std::size_t i = 0; i < gl.size(); ++i) {
    const double ct = cos_lo + (1.0 - cos_lo) * 0.5 * (gl.nodes[i] + 1.0);
    const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    const double wt = gl.weights[i] * 0.5 * (1.0 - cos_lo);
    for (int j = 0; j < grid.phi_nodes; ++j) {
      const double ph = 2.0 * kPi * (j + 0.5) / grid.phi_nodes;
      Vec3 n;
      for (int a = 0; a < 3; ++a) n[a] = ct * fr[0][a] + st * (std::cos(ph) * fr[1][a] + std::sin(ph) * fr[2][a]);
      dirs.push_back(n);
      dw.push_back(wt * 2.0 * kPi / grid.phi_nodes);
    }
  }

  const int rpan = std::max(1, static_cast<int>(std::ceil((r1 - r0) / grid.r_panel)));
  Rule1D rr = composite_gauss(r0, r1, rpan, grid.order);
  std::vector<double> radii, rweight;
  std::vector<AngularMoments> moments;
  for (std::size_t i = 0; i < rr.size(); ++i) {
    const double r = rr.nodes[i];
    AngularMoments m;
    bool any = false;
    for (std::size_t a = 0; a < dirs.size(); ++a) {
      const Vec3& n = dirs[a];
      const double s = f.space_factor({cs[0] + r * n[0], cs[1] + r * n[1], cs[2] + r * n[2]});
      if (s == 0.0) continue;
      any = true;
      const double w = s * dw[a];
      m.m0 += w;
      for (int p = 0; p < 3; ++p) {
        m.m1[p] += w * n[p];
        for (int q = 0; q < 3; ++q) {
          m.m2[p][q] += w * n[p] * n[q];
          for (int u = 0; u < 3; ++u) m.m3[p][q][u] += w * n[p] * n[q] * n[u];
        }
      }
    }
    if (!any) continue;
    radii.push_back(r);
    rweight.push_back(rr.weights[i] * r * r);
    moments.push_back(m);
  }
  if (radii.empty()) return;

  // time rule in x0, with breakpoints at the shell origin and requested windows
  std::vector<double> br{f.t_lower, f.t_upper};
  for (double b : grid.x0_breaks)
    if (b > f.t_lower && b < f.t_upper) br.push_back(b);
  if (c[0] > f.t_lower && c[0] < f.t_upper) br.push_back(c[0]);
  std::sort(br.begin(), br.end());
  br.erase(std::unique(br.begin(), br.end()), br.end());
  Rule1D tr;
  for (std::size_t i = 0; i + 1 < br.size(); ++i) {
    const int np = std::max(1, static_cast<int>(std::ceil((br[i + 1] - br[i]) / grid.t_panel)));
    Rule1D part = composite_gauss(br[i], br[i + 1], np, grid.order);
    tr.nodes.insert(tr.nodes.end(), part.nodes.begin(), part.nodes.end());
    tr.weights.insert(tr.weights.end(), part.weights.begin(), part.weights.end());
  }

  RadialSlicer slicer(profiles, radii);
  const std::size_t nr = radii.size();
  const std::size_t np = profiles.size();
  std::vector<ModeValue> out;
  std::vector<ModeValue> at(np);
  for (std::size_t it = 0; it < tr.size(); ++it) {
    const double x0 = tr.nodes[it];
    const double f0 = f.time_factor(x0);
    if (f0 == 0.0) continue;
    const double t = x0 - c[0];
    slicer.slice(t, out);
    for (std::size_t ir = 0; ir < nr; ++ir) {
      for (std::size_t p = 0; p < np; ++p) at[p] = out[p * nr + ir];
      cb(x0, t, radii[ir], tr.weights[it] * rweight[ir] * f0, at, moments[ir]);
    }
  }
}

GridOracle::GridOracle(const GridOracleSpec& spec, double mass, Amplitude3 pos, Amplitude3 neg)
    : spec_(spec), mass_(mass) {
  if (spec.n < 8 || spec.n % 2) throw std::invalid_argument("grid oracle: n must be even and at least 8");
  if (!(spec.half_length > 0)) throw std::invalid_argument("grid oracle: half_length must be positive");
  const int n = spec.n;
  step_ = 2.0 * spec.half_length / n;
  const double dk = kPi / spec.half_length;
  const std::size_t total = static_cast<std::size_t>(n) * n * n;
  p_.resize(total);
  nm_.resize(total);
  omega_.resize(total);
  kvec_.resize(total);
  const double norm = 1.0 / std::pow(2.0 * spec.half_length, 3);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) {
        const int mi = i < n / 2 ? i : i - n, mj = j < n / 2 ? j : j - n, ml = l < n / 2 ? l : l - n;
        const Vec3 k{mi * dk, mj * dk, ml * dk};
        const std::size_t idx = (static_cast<std::size_t>(i) * n + j) * n + l;
        // x_j starts at -L: e^{i k.x} = e^{-i k.(L,L,L)} e^{2 pi i m j / n}
        const double sgn = ((mi + mj + ml) % 2 == 0) ? 1.0 : -1.0;
        kvec_[idx] = k;
        omega_[idx] = std::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2] + mass * mass);
        p_[idx] = pos ? sgn * norm * pos(k) : cplx{};
        nm_[idx] = neg ? sgn * norm * neg({-k[0], -k[1], -k[2]}) : cplx{};
      }
  buf_.resize(total);
  auto* b = reinterpret_cast<fftw_complex*>(buf_.data());
  plan_ = fftw_plan_dft_3d(n, n, n, b, b, FFTW_BACKWARD, FFTW_ESTIMATE);
}

GridOracle::~GridOracle() {
  if (plan_) fftw_destroy_plan(static_cast<fftw_plan>(plan_));
}

void GridOracle::slice(double x0, GridSlice& out) const {
  const std::size_t total = p_.size();
  std::vector<cplx> c(total), ct(total);
  for (std::size_t i = 0; i < total; ++i) {
    const cplx e = std::polar(1.0, -omega_[i] * x0);
    c[i] = p_[i] * e + nm_[i] * std::conj(e);
    ct[i] = cplx(0, -omega_[i]) * (p_[i] * e - nm_[i] * std::conj(e));
  }
  auto run = [&](const std::vector<cplx>& in, std::vector<cplx>& res, int deriv) {
    for (std::size_t i = 0; i < total; ++i) buf_[i] = deriv < 0 ? in[i] : cplx(0, kvec_[i][deriv]) * in[i];
    fftw_execute(static_cast<fftw_plan>(plan_));
    res = buf_;
  };
  run(c, out.f, -1);
  run(ct, out.ft, -1);
  for (int a = 0; a < 3; ++a) run(c, out.grad[a], a);
}

double grid_smear(const std::vector<const GridOracle*>& fields, const PacketSpec& f,
                  const std::function<double(const Vec4& x, std::span<const cplx> f, std::span<const cplx> ft,
                                             std::span<const std::array<cplx, 3>> grad)>& density,
                  double nsigma) {
  if (fields.empty()) throw std::invalid_argument("grid_smear: no fields");
  const GridOracleSpec& spec = fields.front()->spec();
  const auto box = support_box(f, nsigma);
  Rule1D tr = composite_gauss(box[0][0], box[0][1], spec.time_panels, spec.time_order);
  const int n = spec.n;
  const std::size_t nf = fields.size();
  std::vector<GridSlice> sl(nf);
  std::vector<cplx> fv(nf), ftv(nf);
  std::vector<std::array<cplx, 3>> gv(nf);
  std::vector<double> per_t(tr.size());
  for (std::size_t it = 0; it < tr.size(); ++it) {
    const double x0 = tr.nodes[it];
    for (std::size_t q = 0; q < nf; ++q) fields[q]->slice(x0, sl[q]);
    std::vector<double> acc;
    acc.reserve(static_cast<std::size_t>(n) * n * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) {
          const Vec4 x{x0, fields.front()->node(i), fields.front()->node(j), fields.front()->node(l)};
          const double fx = evaluate(f, x);
          if (fx == 0.0) continue;
          const std::size_t idx = (static_cast<std::size_t>(i) * n + j) * n + l;
          for (std::size_t q = 0; q < nf; ++q) {
            fv[q] = sl[q].f[idx];
            ftv[q] = sl[q].ft[idx];
            gv[q] = {sl[q].grad[0][idx], sl[q].grad[1][idx], sl[q].grad[2][idx]};
          }
          acc.push_back(fx * density(x, fv, ftv, gv));
        }
    per_t[it] = tr.weights[it] * pairwise_sum(acc) * fields.front()->cell_volume();
  }
  return pairwise_sum(per_t);
}

}  // namespace qlp::modefield
