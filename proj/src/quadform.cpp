#include "qlp/quadform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>

#include "qlp/report.hpp"
#include "qlp/thermal.hpp"

namespace qlp::quadform {

namespace {

constexpr double kTwoPi3 = 8.0 * std::numbers::pi * std::numbers::pi * std::numbers::pi;

double omega_of(const Vec3& k, double m) { return std::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2] + m * m); }

struct ModeCoeff {
  double amp = 0.0;
  double sigma = -1.0;  // E(x) = exp(i sigma k.x)
  Vec4 k4{};
};

ModeCoeff coefficient(const ModeGrid& g, std::size_t i, FieldSel field) {
  const Mode& m = g.modes[i];
  const double w = omega_of(m.k, g.mass);
  const double base = std::sqrt(m.weight / (2.0 * w));
  ModeCoeff c;
  c.k4 = {w, m.k[0], m.k[1], m.k[2]};
  if (g.species == Species::single) {
    c.amp = base;
    c.sigma = -1.0;
    return c;
  }
  const double bp = thermal::thermal_factor(thermal::Sign::plus, w, g.beta);
  const double bm = thermal::thermal_factor(thermal::Sign::minus, w, g.beta);
  const bool particle = m.channel == 0;
  c.sigma = particle ? -1.0 : 1.0;
  if (field == FieldSel::system) c.amp = base * (particle ? bp : bm);
  else c.amp = base * (particle ? bm : bp);
  return c;
}

// Factor picked up by L acting on exp(i sigma k.x).
cplx derivative_factor(const Derivative& d, const ModeCoeff& c) {
  const double spatial = d[2] * c.k4[1] + d[3] * c.k4[2] + d[4] * c.k4[3];
  return cplx(d[0], c.sigma * (d[1] * c.k4[0] - spatial));
}

Vec4 combine(double a, const Vec4& p, double b, const Vec4& q) {
  return {a * p[0] + b * q[0], a * p[1] + b * q[1], a * p[2] + b * q[2], a * p[3] + b * q[3]};
}

}  // namespace

void ModeGrid::validate() const {
  if (modes.empty()) throw std::invalid_argument("mode grid is empty");
  if (!(mass >= 0.0)) throw std::invalid_argument("mode grid mass must be non-negative");
  if (species == Species::doubled && !(beta > 0.0)) throw std::invalid_argument("doubled grid needs beta > 0");
  for (const auto& m : modes) {
    if (!(m.weight > 0.0) || !std::isfinite(m.weight)) throw std::invalid_argument("mode weights must be positive");
    if (m.channel != 0 && !(species == Species::doubled && m.channel == 1))
      throw std::invalid_argument("mode channel does not match species");
    if (mass == 0.0 && m.k[0] == 0.0 && m.k[1] == 0.0 && m.k[2] == 0.0)
      throw std::invalid_argument("massless grid contains k = 0");
  }
}

int ModeGrid::partner(std::size_t i) const {
  const Mode& m = modes[i];
  for (std::size_t j = 0; j < modes.size(); ++j) {
    const Mode& o = modes[j];
    if (o.channel != m.channel) continue;
    if (std::abs(o.k[0] + m.k[0]) < 1e-12 && std::abs(o.k[1] + m.k[1]) < 1e-12 && std::abs(o.k[2] + m.k[2]) < 1e-12)
      return static_cast<int>(j);
  }
  return -1;
}

ModeGrid box_grid(int n, double kmax, double mass, Species species, double beta) {
  if (n < 1) throw std::invalid_argument("box grid needs at least one node per axis");
  if (!(kmax > 0.0)) throw std::invalid_argument("box grid needs kmax > 0");
  const Rule1D& r = gauss_legendre(n);
  ModeGrid g;
  g.species = species;
  g.mass = mass;
  g.beta = beta;
  const int channels = species == Species::doubled ? 2 : 1;
  for (int c = 0; c < channels; ++c)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int e = 0; e < n; ++e) {
          Mode m;
          m.k = {kmax * r.nodes[a], kmax * r.nodes[b], kmax * r.nodes[e]};
          m.weight = kmax * kmax * kmax * r.weights[a] * r.weights[b] * r.weights[e] / kTwoPi3;
          m.channel = c;
          g.modes.push_back(m);
        }
  g.validate();
  return g;
}

ModeGrid grid_from_spec(const QuadratureSpec& q, double mass, Species species, double beta) {
  q.validate();
  if (q.scheme != Scheme::tensor_gauss) throw std::invalid_argument("mode grids need a tensor-gauss spec");
  const int n = static_cast<int>(std::max<long>(1, q.points));
  return box_grid(n, q.cutoff, mass, species, beta);
}

std::vector<QuadraticTerm> energy_density_terms(double mass, FieldSel field, double sign) {
  std::vector<QuadraticTerm> t;
  for (int mu = 0; mu < 4; ++mu) {
    QuadraticTerm q;
    q.coef = 0.5 * sign;
    q.left[1 + mu] = 1.0;
    q.right[1 + mu] = 1.0;
    q.field = field;
    t.push_back(q);
  }
  if (mass > 0.0) {
    QuadraticTerm q;
    q.coef = 0.5 * sign * mass * mass;
    q.left[0] = q.right[0] = 1.0;
    q.field = field;
    t.push_back(q);
  }
  return t;
}

std::vector<QuadraticTerm> liouville_density_terms(double mass) {
  auto t = energy_density_terms(mass, FieldSel::system, 1.0);
  auto b = energy_density_terms(mass, FieldSel::bath, -1.0);
  t.insert(t.end(), b.begin(), b.end());
  return t;
}

std::vector<QuadraticTerm> boost_lightcone_terms(double mass, int channel) {
  if (channel < -1 || channel > 4) throw std::invalid_argument("boost channel must be in -1..4");
  std::vector<QuadraticTerm> all(5);
  // x1 |d2 phi|^2, x1 |d3 phi|^2, x1 m^2 |phi|^2
  for (int c = 0; c < 3; ++c) {
    all[c].coef = c == 2 ? 0.5 * mass * mass : 0.5;
    all[c].weight = {0, 0, 1, 0, 0};
    const int idx = c == 2 ? 0 : 3 + c;
    all[c].left[idx] = all[c].right[idx] = 1.0;
  }
  // u |d_v phi|^2 with u = (x0 + x1)/2, d_v = d0 - d1
  all[3].coef = 0.5;
  all[3].weight = {0, 0.5, 0.5, 0, 0};
  all[3].left = all[3].right = {0, 1, -1, 0, 0};
  // -v |d_u phi|^2 with -v = (x1 - x0)/2, d_u = d0 + d1
  all[4].coef = 0.5;
  all[4].weight = {0, -0.5, 0.5, 0, 0};
  all[4].left = all[4].right = {0, 1, 1, 0, 0};
  if (channel >= 0) return {all[channel]};
  if (mass == 0.0) all.erase(all.begin() + 2);
  return all;
}

CMatrix QuadraticBosonForm::bdg() const {
  const Eigen::Index n = number.rows();
  CMatrix m(2 * n, 2 * n);
  m.topLeftCorner(n, n) = number;
  m.topRightCorner(n, n) = pair;
  m.bottomLeftCorner(n, n) = pair.conjugate();
  m.bottomRightCorner(n, n) = number.conjugate();
  return m;
}

void QuadraticBosonForm::validate(double tol) const {
  if (number.rows() != number.cols() || pair.rows() != pair.cols() || number.rows() != pair.rows())
    throw std::invalid_argument("quadratic form blocks must be square and of equal size");
  const double scale = std::max(1.0, std::max(number.cwiseAbs().maxCoeff(), pair.cwiseAbs().maxCoeff()));
  if ((number - number.adjoint()).cwiseAbs().maxCoeff() > tol * scale)
    throw std::invalid_argument("number block is not Hermitian");
  if ((pair - pair.transpose()).cwiseAbs().maxCoeff() > tol * scale)
    throw std::invalid_argument("pair block is not symmetric");
}

QuadraticBosonForm assemble(const std::vector<QuadraticTerm>& terms, const Smearing& s, const ModeGrid& grid) {
  grid.validate();
  if (terms.empty()) throw std::invalid_argument("no quadratic terms");
  if (s.packet) {
    s.packet->validate();
    if (!s.packet->has_position_form()) throw std::invalid_argument("smearing must have a position form");
  } else {
    for (const auto& t : terms)
      if (t.weight[1] != 0 || t.weight[2] != 0 || t.weight[3] != 0 || t.weight[4] != 0)
        throw std::invalid_argument("formal unit smearing does not support moment weights");
  }
  const std::size_t n = grid.size();
  bool need_moment[4] = {false, false, false, false};
  for (const auto& t : terms)
    for (int mu = 0; mu < 4; ++mu) need_moment[mu] = need_moment[mu] || t.weight[1 + mu] != 0.0;

  std::vector<ModeCoeff> sys(n), bath(n);
  for (std::size_t i = 0; i < n; ++i) {
    sys[i] = coefficient(grid, i, FieldSel::system);
    bath[i] = coefficient(grid, i, FieldSel::bath);
  }

  // Bump products factor over axes; the 1D transforms are memoized per axis since
  // the grid produces few distinct arguments.
  const bool product = s.packet && s.packet->kind == PacketKind::bump_product;
  std::array<std::unordered_map<double, std::array<cplx, 2>>, 4> memo;
  auto axis = [&](int mu, double qmu) -> const std::array<cplx, 2>& {
    const double arg = (mu == 0 ? 1.0 : -1.0) * qmu * s.packet->widths[mu];
    auto it = memo[mu].find(arg);
    if (it != memo[mu].end()) return it->second;
    const bool need = need_moment[mu];
    return memo[mu].emplace(arg, std::array<cplx, 2>{bump_transform_1d(arg, 0),
                                                     need ? bump_transform_1d(arg, 1) : cplx(0.0)}).first->second;
  };

  auto transform = [&](const Vec4& q, std::size_t i, std::array<cplx, 5>& out) {
    out.fill(0.0);
    if (product) {
      const PacketSpec& p = *s.packet;
      const double phase = minkowski_dot(q, p.center);
      std::array<const std::array<cplx, 2>*, 4> b{};
      cplx base = p.amplitude * cplx(std::cos(phase), std::sin(phase));
      for (int mu = 0; mu < 4; ++mu) {
        b[mu] = &axis(mu, q[mu]);
        base *= p.widths[mu];
      }
      cplx prod = 1.0;
      for (int mu = 0; mu < 4; ++mu) prod *= (*b[mu])[0];
      out[0] = base * prod;
      for (int mu = 0; mu < 4; ++mu) {
        if (!need_moment[mu]) continue;
        cplx v = base * (p.center[mu] * (*b[mu])[0] + p.widths[mu] * (*b[mu])[1]);
        for (int nu = 0; nu < 4; ++nu)
          if (nu != mu) v *= (*b[nu])[0];
        out[1 + mu] = v;
      }
      return;
    }
    if (!s.packet) {
      const double qs = std::hypot(q[1], q[2], q[3]);
      const double scale = 1.0 + std::hypot(grid.modes[i].k[0], grid.modes[i].k[1], grid.modes[i].k[2]);
      if (qs < 1e-10 * scale) out[0] = 1.0 / grid.modes[i].weight;
      return;
    }
    out[0] = fourier_transform(*s.packet, q);
    for (int mu = 0; mu < 4; ++mu)
      if (need_moment[mu]) out[1 + mu] = fourier_transform_moment(*s.packet, q, mu);
  };

  QuadraticBosonForm f;
  f.number = CMatrix::Zero(n, n);
  f.pair = CMatrix::Zero(n, n);
  f.channel.resize(n);
  for (std::size_t i = 0; i < n; ++i) f.channel[i] = grid.modes[i].channel;

  std::array<cplx, 5> wn{}, wp{};
  for (const FieldSel field : {FieldSel::system, FieldSel::bath}) {
    bool any = false;
    for (const auto& t : terms) any = any || t.field == field;
    if (!any) continue;
    const auto& cf = field == FieldSel::system ? sys : bath;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const ModeCoeff& a = cf[i];
        const ModeCoeff& b = cf[j];
        const double amp = a.amp * b.amp;
        if (amp == 0.0) continue;
        transform(combine(b.sigma, b.k4, -a.sigma, a.k4), i, wn);
        const bool do_pair = j >= i;
        if (do_pair) transform(combine(-a.sigma, a.k4, -b.sigma, b.k4), i, wp);
        cplx num = 0.0, pr = 0.0;
        for (const auto& t : terms) {
          if (t.field != field) continue;
          cplx wnv = 0.0, wpv = 0.0;
          for (int c = 0; c < 5; ++c) {
            wnv += t.weight[c] * wn[c];
            if (do_pair) wpv += t.weight[c] * wp[c];
          }
          const cplx li = derivative_factor(t.left, a), ri = derivative_factor(t.right, a);
          const cplx lj = derivative_factor(t.left, b), rj = derivative_factor(t.right, b);
          num += t.coef * (std::conj(li) * rj + std::conj(ri) * lj) * wnv;
          if (do_pair) pr += t.coef * (std::conj(li) * std::conj(rj) + std::conj(ri) * std::conj(lj)) * wpv;
        }
        f.number(i, j) += amp * num;
        if (do_pair) {
          f.pair(i, j) += amp * pr;
          if (j != i) f.pair(j, i) += amp * pr;
        }
      }
  }
  // Remove rounding asymmetry.
  f.number = 0.5 * (f.number + f.number.adjoint()).eval();

  if (s.packet) {
    // Resolution diagnostic: node spacing against the packet's spatial extent.
    double kspan = 0.0;
    for (const auto& m : grid.modes) kspan = std::max(kspan, std::abs(m.k[0]));
    const int per_axis = static_cast<int>(std::round(std::cbrt(static_cast<double>(
        grid.species == Species::doubled ? n / 2 : n))));
    const double spacing = per_axis > 1 ? 2.0 * kspan / (per_axis - 1) : 2.0 * kspan;
    const auto box = support_box(*s.packet, 4.0);
    double extent = 0.0;
    for (int mu = 1; mu < 4; ++mu) extent = std::max(extent, std::max(std::abs(box[mu][0]), std::abs(box[mu][1])));
    if (spacing * extent > std::numbers::pi) {
      std::ostringstream os;
      os << "mode spacing " << spacing << " under-resolves smearing extent " << extent;
      f.warnings.push_back(os.str());
    }
  }
  return f;
}

double commutator_norm(const QuadraticBosonForm& a, const QuadraticBosonForm& b) {
  const CMatrix m1 = a.bdg(), m2 = b.bdg();
  const Eigen::Index n = a.number.rows();
  Eigen::VectorXd eta(2 * n);
  eta.head(n).setOnes();
  eta.tail(n).setConstant(-1.0);
  const CMatrix c = m1 * eta.asDiagonal() * m2 - m2 * eta.asDiagonal() * m1;
  return c.norm();
}

QuadraticBosonForm restrict_channel(const QuadraticBosonForm& f, int channel) {
  std::vector<Eigen::Index> idx;
  for (std::size_t i = 0; i < f.channel.size(); ++i)
    if (f.channel[i] == channel) idx.push_back(static_cast<Eigen::Index>(i));
  if (idx.empty()) throw std::invalid_argument("no modes in requested channel");
  QuadraticBosonForm r;
  const auto m = static_cast<Eigen::Index>(idx.size());
  r.number.resize(m, m);
  r.pair.resize(m, m);
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b < m; ++b) {
      r.number(a, b) = f.number(idx[a], idx[b]);
      r.pair(a, b) = f.pair(idx[a], idx[b]);
    }
  r.channel.assign(idx.size(), channel);
  return r;
}

Eigen::MatrixXd quadrature_matrix(const QuadraticBosonForm& f) {
  // x = (c + c^dag)/sqrt2, p = (c - c^dag)/(i sqrt2): H = 1/2 xi^T M_r xi - tr(A)/2.
  const Eigen::Index n = f.number.rows();
  const Eigen::MatrixXd ra = f.number.real(), ia = f.number.imag();
  const Eigen::MatrixXd rb = f.pair.real(), ib = f.pair.imag();
  Eigen::MatrixXd m(2 * n, 2 * n);
  m.topLeftCorner(n, n) = ra + rb;
  m.topRightCorner(n, n) = ib - ia;
  m.bottomLeftCorner(n, n) = ia + ib;
  m.bottomRightCorner(n, n) = ra - rb;
  return 0.5 * (m + m.transpose());
}

GroundEnergyResult ground_energy(const QuadraticBosonForm& f) {
  f.validate(1e-9);
  const Eigen::Index n = f.number.rows();
  const Eigen::MatrixXd m = quadrature_matrix(f);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  const double tol = 1e-11 * scale;
  GroundEnergyResult r;
  r.min_bdg_eigenvalue = ev.minCoeff();
  if (r.min_bdg_eigenvalue < -tol) {
    r.stable = false;
    r.energy = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd eta(2 * n);
    eta.head(n).setOnes();
    eta.tail(n).setConstant(-1.0);
    Eigen::ComplexEigenSolver<CMatrix> ce(eta.asDiagonal() * f.bdg());
    for (Eigen::Index i = 0; i < ce.eigenvalues().size(); ++i)
      r.offending = std::max(r.offending, std::abs(ce.eigenvalues()[i].imag()));
    if (r.offending == 0.0) r.offending = -r.min_bdg_eigenvalue;
    return r;
  }
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev[i] <= tol) ++r.zero_modes;
  // Williamson: S = M^{1/2} J M^{1/2} is antisymmetric, S^T S has eigenvalues nu^2 twice.
  const Eigen::VectorXd sq = ev.cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd root = es.eigenvectors() * sq.asDiagonal() * es.eigenvectors().transpose();
  Eigen::MatrixXd rj(2 * n, 2 * n);
  rj.leftCols(n) = -root.rightCols(n);
  rj.rightCols(n) = root.leftCols(n);
  const Eigen::MatrixXd s = rj * root;
  const Eigen::MatrixXd sts = s.transpose() * s;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ss(0.5 * (sts + sts.transpose()), Eigen::EigenvaluesOnly);
  std::vector<double> nu2(ss.eigenvalues().data(), ss.eigenvalues().data() + ss.eigenvalues().size());
  std::sort(nu2.begin(), nu2.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < nu2.size(); ++i) {
    const double v = std::sqrt(std::max(nu2[i], 0.0));
    sum += 0.5 * v;
    if (i % 2 == 1) r.symplectic.push_back(0.5 * (v + std::sqrt(std::max(nu2[i - 1], 0.0))));
  }
  r.energy = 0.5 * (sum - f.number.trace().real());
  return r;
}

namespace {

double lanczos_min(const Eigen::SparseMatrix<cplx>& h, int max_iter) {
  const Eigen::Index dim = h.rows();
  const int kmax = static_cast<int>(std::min<Eigen::Index>(dim, max_iter));
  std::vector<Eigen::VectorXcd> basis;
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
  v[0] = 1.0;  // Fock vacuum
  for (Eigen::Index i = 1; i < dim; ++i) v[i] = 1e-3 / std::sqrt(1.0 + static_cast<double>(i));
  v.normalize();
  std::vector<double> alpha, beta;
  double last = std::numeric_limits<double>::infinity();
  for (int k = 0; k < kmax; ++k) {
    basis.push_back(v);
    Eigen::VectorXcd w = h * v;
    const double a = v.dot(w).real();
    alpha.push_back(a);
    for (const auto& b : basis) w -= b.dot(w) * b;
    for (const auto& b : basis) w -= b.dot(w) * b;
    const double bn = w.norm();
    const int m = static_cast<int>(alpha.size());
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      t(i, i) = alpha[i];
      if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t, Eigen::EigenvaluesOnly);
    const double cur = es.eigenvalues().minCoeff();
    if (bn < 1e-13 || std::abs(cur - last) < 1e-14 * std::max(1.0, std::abs(cur))) return cur;
    last = cur;
    beta.push_back(bn);
    v = w / bn;
  }
  return last;
}

}  // namespace

double exact_diag_oracle(const QuadraticBosonForm& f, int occupancy, long dimension_limit) {
  f.validate(1e-9);
  if (occupancy < 1) throw std::invalid_argument("occupancy cutoff must be >= 1");
  const int modes = static_cast<int>(f.modes());
  double dimd = std::pow(occupancy + 1.0, modes);
  if (dimd > static_cast<double>(dimension_limit))
    throw std::invalid_argument("truncated Fock space exceeds dimension limit");
  const long dim = static_cast<long>(std::llround(dimd));
  const int base = occupancy + 1;
  std::vector<long> stride(modes);
  for (int i = 0; i < modes; ++i) stride[i] = i == 0 ? 1 : stride[i - 1] * base;

  std::vector<Eigen::Triplet<cplx>> trip;
  std::vector<int> occ(modes);
  for (long s = 0; s < dim; ++s) {
    long rem = s;
    for (int i = 0; i < modes; ++i) {
      occ[i] = static_cast<int>(rem % base);
      rem /= base;
    }
    double diag = 0.0;
    for (int i = 0; i < modes; ++i) diag += f.number(i, i).real() * occ[i];
    trip.emplace_back(s, s, diag);
    for (int i = 0; i < modes; ++i)
      for (int j = 0; j < modes; ++j) {
        // A_ij a_i^dag a_j, i != j
        if (i != j && occ[j] > 0 && occ[i] < occupancy) {
          const long t = s - stride[j] + stride[i];
          trip.emplace_back(t, s, f.number(i, j) * std::sqrt(occ[j] * (occ[i] + 1.0)));
        }
        // pair creation (i <= j) and its conjugate
        if (j < i) continue;
        cplx c;
        long t;
        if (i == j) {
          if (occ[i] + 2 > occupancy) continue;
          c = 0.5 * f.pair(i, i) * std::sqrt((occ[i] + 1.0) * (occ[i] + 2.0));
          t = s + 2 * stride[i];
        } else {
          if (occ[i] + 1 > occupancy || occ[j] + 1 > occupancy) continue;
          c = f.pair(i, j) * std::sqrt((occ[i] + 1.0) * (occ[j] + 1.0));
          t = s + stride[i] + stride[j];
        }
        trip.emplace_back(t, s, c);
        trip.emplace_back(s, t, std::conj(c));
      }
  }
  Eigen::SparseMatrix<cplx> h(dim, dim);
  h.setFromTriplets(trip.begin(), trip.end());
  if (dim <= 3000) {
    CMatrix dense(h);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(dense, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }
  return lanczos_min(h, 400);
}

QuadraticBosonForm single_mode(double eps, double mu) {
  QuadraticBosonForm f;
  f.number = CMatrix::Constant(1, 1, eps);
  f.pair = CMatrix::Constant(1, 1, mu);
  f.channel = {0};
  return f;
}

PurificationReport purification_crosscheck(double beta, double omega, int d) {
  if (!(beta > 0.0) || !(omega > 0.0) || d < 2) throw std::invalid_argument("purification needs beta, omega > 0, d >= 2");
  using modlp::Matrix;
  // Gibbs state is diagonal; Delta^s acts on E_nm by (p_n / p_m)^s. Deep levels sit
  // below the faithfulness floor of StandardForm, so the standard form is built here.
  const Matrix rho = modlp::gibbs_state(beta, omega, d);
  const Matrix a = modlp::lowering(d);
  Eigen::VectorXd p = rho.diagonal().real();
  const Matrix om = p.cwiseSqrt().cast<cplx>().asDiagonal();
  auto delta = [&](const Matrix& x, double s) {
    Matrix y = x;
    for (int n = 0; n < d; ++n)
      for (int m = 0; m < d; ++m) y(n, m) *= std::exp(-s * beta * omega * (n - m));
    return y;
  };
  PurificationReport r;
  r.occupation = (rho * a.adjoint() * a).trace().real();
  r.bose = 1.0 / std::expm1(beta * omega);
  r.occupation_residual = std::abs(r.occupation - r.bose);
  r.tail_bound = std::exp(-beta * omega * d);

  // Spectrum check against the modular operator of the (faithful) leading block.
  double dres = 0.0;
  const int dl = std::min(d, 8);
  const modlp::StandardForm sf(modlp::gibbs_state(beta, omega, dl));
  for (int n = 0; n < dl; ++n)
    for (int m = 0; m < dl; ++m) {
      Matrix e = Matrix::Zero(dl, dl);
      e(n, m) = 1.0;
      const Matrix de = sf.delta_power(e, 1.0);
      const double expect = std::exp(-beta * omega * (n - m));
      dres = std::max(dres, (de - expect * e).cwiseAbs().maxCoeff() / std::max(1.0, expect));
    }
  r.delta_spectrum_residual = dres;

  const Matrix adag_om = a.adjoint() * om;
  const double lhs = modlp::hs_norm(delta(adag_om, 0.5));
  const double rhs = modlp::hs_norm(a * om);
  r.kms_residual = std::abs(lhs * lhs - rhs * rhs);

  const double bp = thermal::thermal_factor(thermal::Sign::plus, omega, beta);
  const double bm = thermal::thermal_factor(thermal::Sign::minus, omega, beta);
  // c acts by left multiplication with a; ctilde^dag by right multiplication with a.
  r.annihilation_residual = modlp::hs_norm(bp * a * om - bm * om * a);
  const double tilde = modlp::hs_norm(om * a.adjoint());
  const double plain = modlp::hs_norm(a * om);
  r.swap_residual = std::abs(tilde * tilde - plain * plain);
  return r;
}

ProbeResult variational_probe(const QuadraticBosonForm& f, const std::vector<Eigen::VectorXcd>& one,
                              const std::vector<CMatrix>& two) {
  const CMatrix& A = f.number;
  const CMatrix& B = f.pair;
  const Eigen::Index n = A.rows();
  for (const auto& v : one)
    if (v.size() != n) throw std::invalid_argument("one-particle probe has wrong size");
  for (const auto& t : two)
    if (t.rows() != n || t.cols() != n) throw std::invalid_argument("two-particle probe has wrong size");
  // Basis: vacuum, one-particle a^dag(alpha) Omega, two-particle sum T_ij a_i^dag a_j^dag Omega.
  const Eigen::Index n1 = static_cast<Eigen::Index>(one.size());
  const Eigen::Index n2 = static_cast<Eigen::Index>(two.size());
  const Eigen::Index dim = 1 + n1 + n2;
  CMatrix H = CMatrix::Zero(dim, dim), G = CMatrix::Zero(dim, dim);
  G(0, 0) = 1.0;
  std::vector<CMatrix> sym(two.size());
  for (std::size_t i = 0; i < two.size(); ++i) sym[i] = 0.5 * (two[i] + two[i].transpose());
  for (Eigen::Index i = 0; i < n1; ++i)
    for (Eigen::Index j = 0; j < n1; ++j) {
      G(1 + i, 1 + j) = one[i].dot(one[j]);
      H(1 + i, 1 + j) = one[i].dot(A * one[j]);
    }
  for (Eigen::Index i = 0; i < n2; ++i) {
    const Eigen::Index ii = 1 + n1 + i;
    // <Omega|H|chi> = sum conj(B_ij) T_ij
    const cplx h0 = (B.conjugate().cwiseProduct(sym[i])).sum();
    H(0, ii) = h0;
    H(ii, 0) = std::conj(h0);
    for (Eigen::Index j = 0; j < n2; ++j) {
      const Eigen::Index jj = 1 + n1 + j;
      G(ii, jj) = 2.0 * (sym[i].conjugate().cwiseProduct(sym[j])).sum();
      H(ii, jj) = 4.0 * (sym[i].adjoint() * A * sym[j]).trace();
    }
  }
  ProbeResult r;
  Eigen::SelfAdjointEigenSolver<CMatrix> gs(0.5 * (G + G.adjoint()));
  const double gmax = std::max(1e-300, gs.eigenvalues().maxCoeff());
  const double cut = 1e-12 * gmax;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < dim; ++i)
    if (gs.eigenvalues()[i] > cut) keep.push_back(i);
  r.rank = static_cast<int>(keep.size());
  r.regularization = cut;
  CMatrix P(dim, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c)
    P.col(static_cast<Eigen::Index>(c)) = gs.eigenvectors().col(keep[c]) / std::sqrt(gs.eigenvalues()[keep[c]]);
  const CMatrix Hr = P.adjoint() * H * P;
  Eigen::SelfAdjointEigenSolver<CMatrix> hs(0.5 * (Hr + Hr.adjoint()), Eigen::EigenvaluesOnly);
  r.min_value = hs.eigenvalues().minCoeff();
  r.one_particle_min = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n1; ++i) {
    const double g = G(1 + i, 1 + i).real();
    if (g > 0) r.one_particle_min = std::min(r.one_particle_min, H(1 + i, 1 + i).real() / g);
  }
  return r;
}

std::string ground_energy_csv_header() { return "modes,energy,stable,zero_modes,min_bdg,offending"; }

std::string ground_energy_csv_row(std::size_t grid_size, const GroundEnergyResult& r) {
  std::ostringstream os;
  os << grid_size << ',' << format_number(r.energy) << ',' << (r.stable ? "true" : "false") << ',' << r.zero_modes
     << ',' << format_number(r.min_bdg_eigenvalue) << ',' << format_number(r.offending);
  return os.str();
}

void to_json(nlohmann::json& j, const QuadraticBosonForm& f) {
  auto dump = [](const CMatrix& m) {
    nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      nlohmann::json rr = nlohmann::json::array(), ir = nlohmann::json::array();
      for (Eigen::Index k = 0; k < m.cols(); ++k) {
        rr.push_back(m(i, k).real());
        ir.push_back(m(i, k).imag());
      }
      re.push_back(rr);
      im.push_back(ir);
    }
    return nlohmann::json{{"re", re}, {"im", im}};
  };
  j = nlohmann::json{{"number", dump(f.number)}, {"pair", dump(f.pair)}, {"channel", f.channel},
                     {"warnings", f.warnings}};
}

QuadraticBosonForm form_from_json(const nlohmann::json& j) {
  auto load = [](const nlohmann::json& m) {
    const auto& re = m.at("re");
    const auto& im = m.at("im");
    const auto n = static_cast<Eigen::Index>(re.size());
    CMatrix out(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (static_cast<Eigen::Index>(re[i].size()) != n) throw std::invalid_argument("form matrix is not square");
      for (Eigen::Index k = 0; k < n; ++k) out(i, k) = cplx(re[i][k].get<double>(), im[i][k].get<double>());
    }
    return out;
  };
  QuadraticBosonForm f;
  f.number = load(j.at("number"));
  f.pair = load(j.at("pair"));
  f.channel = j.value("channel", std::vector<int>(static_cast<std::size_t>(f.number.rows()), 0));
  f.warnings = j.value("warnings", std::vector<std::string>{});
  f.validate(1e-9);
  return f;
}

}  // namespace qlp::quadform
