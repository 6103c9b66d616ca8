#include "qlp/testfn.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace qlp {

namespace {

constexpr double kSqrt2Pi = 2.5066282746310002;  // sqrt(2 pi)

// Metric sign of each coordinate in q.x.
constexpr double kSigma[4] = {1.0, -1.0, -1.0, -1.0};

double bump(double t) {
  if (std::abs(t) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - t * t));
}

// Frequency window normalized to 1 at its midpoint.
double window_value(const FrequencyWindow& w, double q0) {
  const double mid = 0.5 * (w.lower + w.upper);
  const double half = 0.5 * (w.upper - w.lower);
  const double t = (q0 - mid) / half;
  if (std::abs(t) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - t * t));
}

// Precomputed nodes of b(t) t^m on [-1, 1] for the 1D transforms.
struct BumpTable {
  std::vector<double> t;
  std::vector<double> wb;
};

const BumpTable& bump_table(int n) {
  static std::mutex mu;
  static std::map<int, BumpTable> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  const Rule1D& gl = gauss_legendre(n);
  BumpTable tab;
  for (std::size_t i = 0; i < gl.size(); ++i) {
    tab.t.push_back(gl.nodes[i]);
    tab.wb.push_back(gl.weights[i] * bump(gl.nodes[i]));
  }
  return cache.emplace(n, std::move(tab)).first->second;
}

}  // namespace

double minkowski_dot(const Vec4& a, const Vec4& b) {
  return a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3];
}

std::string to_string(PacketKind k) {
  switch (k) {
    case PacketKind::gaussian: return "gaussian";
    case PacketKind::bump_product: return "bump-product";
    case PacketKind::momentum_window: return "momentum-window";
  }
  return "?";
}

PacketKind packet_kind_from_string(const std::string& s) {
  if (s == "gaussian") return PacketKind::gaussian;
  if (s == "bump-product") return PacketKind::bump_product;
  if (s == "momentum-window") return PacketKind::momentum_window;
  throw std::invalid_argument("unknown packet kind '" + s + "'");
}

void PacketSpec::validate() const {
  for (int mu = 0; mu < 4; ++mu) {
    if (kind == PacketKind::momentum_window && mu == 0) continue;
    if (!(widths[mu] > 0.0) || !std::isfinite(widths[mu]))
      throw std::invalid_argument("PacketSpec.widths must be strictly positive");
  }
  for (double c : center)
    if (!std::isfinite(c)) throw std::invalid_argument("PacketSpec.center must be finite");
  if (!std::isfinite(amplitude)) throw std::invalid_argument("PacketSpec.amplitude must be finite");
  if (kind == PacketKind::momentum_window) {
    if (!window) throw std::invalid_argument("momentum-window packet requires PacketSpec.window");
    if (!(window->upper > window->lower))
      throw std::invalid_argument("PacketSpec.window requires lower < upper");
  }
}

bool PacketSpec::spatially_isotropic() const {
  if (kind == PacketKind::bump_product) return false;
  return widths[1] == widths[2] && widths[2] == widths[3];
}

double evaluate(const PacketSpec& p, const Vec4& x) {
  switch (p.kind) {
    case PacketKind::gaussian: {
      double e = 0.0;
      for (int mu = 0; mu < 4; ++mu) {
        const double y = (x[mu] - p.center[mu]) / p.widths[mu];
        e += 0.5 * y * y;
      }
      return p.amplitude * std::exp(-e);
    }
    case PacketKind::bump_product: {
      double v = p.amplitude;
      for (int mu = 0; mu < 4 && v != 0.0; ++mu) v *= bump((x[mu] - p.center[mu]) / p.widths[mu]);
      return v;
    }
    case PacketKind::momentum_window:
      throw std::invalid_argument("momentum-window packets have no position-space form");
  }
  return 0.0;
}

cplx bump_transform_1d(double s, int moment) {
  int n = 256;
  while (n < 0.75 * std::abs(s) + 64) n *= 2;
  const BumpTable& tab = bump_table(n);
  std::vector<cplx> terms(tab.t.size());
  for (std::size_t i = 0; i < tab.t.size(); ++i) {
    const double t = tab.t[i];
    const double w = moment == 0 ? tab.wb[i] : tab.wb[i] * std::pow(t, moment);
    terms[i] = w * cplx(std::cos(s * t), std::sin(s * t));
  }
  return pairwise_sum(terms);
}

cplx fourier_transform(const PacketSpec& p, const Vec4& q) {
  const double phase = minkowski_dot(q, p.center);
  const cplx ph(std::cos(phase), std::sin(phase));
  switch (p.kind) {
    case PacketKind::gaussian: {
      double v = p.amplitude;
      double e = 0.0;
      for (int mu = 0; mu < 4; ++mu) {
        v *= kSqrt2Pi * p.widths[mu];
        e += 0.5 * p.widths[mu] * p.widths[mu] * q[mu] * q[mu];
      }
      return v * std::exp(-e) * ph;
    }
    case PacketKind::bump_product: {
      cplx v = p.amplitude;
      for (int mu = 0; mu < 4; ++mu) v *= p.widths[mu] * bump_transform_1d(kSigma[mu] * q[mu] * p.widths[mu]);
      return v * ph;
    }
    case PacketKind::momentum_window: {
      double e = 0.0;
      for (int i = 1; i < 4; ++i) e += 0.5 * p.widths[i] * p.widths[i] * q[i] * q[i];
      return p.amplitude * window_value(*p.window, q[0]) * std::exp(-e) * ph;
    }
  }
  return 0.0;
}

cplx fourier_transform_moment(const PacketSpec& p, const Vec4& q, int mu) {
  if (mu < 0 || mu > 3) throw std::invalid_argument("fourier_transform_moment: index out of range");
  const cplx base = fourier_transform(p, q);
  switch (p.kind) {
    case PacketKind::gaussian: {
      // int (c + y) e^{-y^2/2w^2} e^{i s q y} dy = (c + i s w^2 q) * G
      const double w = p.widths[mu];
      return base * cplx(p.center[mu], kSigma[mu] * w * w * q[mu]);
    }
    case PacketKind::bump_product: {
      const double w = p.widths[mu];
      const double s = kSigma[mu] * q[mu] * w;
      const cplx b0 = bump_transform_1d(s, 0);
      const cplx b1 = bump_transform_1d(s, 1);
      if (std::abs(b0) == 0.0) {
        // exact zero of the axis transform: rebuild without dividing
        cplx v = p.amplitude * w * (p.center[mu] * b0 + w * b1);
        for (int nu = 0; nu < 4; ++nu)
          if (nu != mu) v *= p.widths[nu] * bump_transform_1d(kSigma[nu] * q[nu] * p.widths[nu]);
        const double phase = minkowski_dot(q, p.center);
        return v * cplx(std::cos(phase), std::sin(phase));
      }
      return base * (p.center[mu] + w * b1 / b0);
    }
    case PacketKind::momentum_window:
      throw std::invalid_argument("momentum-window packets have no position-space moments");
  }
  return 0.0;
}

cplx centered_transform(const PacketSpec& p, double q0, double qmag) {
  if (!p.spatially_isotropic())
    throw std::invalid_argument("centered_transform requires a spatially isotropic packet");
  const double w = p.widths[1];
  switch (p.kind) {
    case PacketKind::gaussian: {
      const double v = p.amplitude * std::pow(kSqrt2Pi, 4) * p.widths[0] * w * w * w;
      return v * std::exp(-0.5 * p.widths[0] * p.widths[0] * q0 * q0 - 0.5 * w * w * qmag * qmag);
    }
    case PacketKind::momentum_window:
      return p.amplitude * window_value(*p.window, q0) * std::exp(-0.5 * w * w * qmag * qmag);
    case PacketKind::bump_product: break;
  }
  throw std::invalid_argument("centered_transform: unsupported packet kind");
}

PacketSpec scale_translate(const PacketSpec& p, double lambda, const Vec4& a) {
  if (!(lambda > 0.0)) throw std::invalid_argument("scale_translate: lambda must be positive");
  PacketSpec r = p;
  for (int mu = 0; mu < 4; ++mu) {
    r.center[mu] = a[mu] + p.center[mu] / lambda;
    r.widths[mu] = p.widths[mu] / lambda;
  }
  if (p.kind == PacketKind::momentum_window) {
    r.amplitude = p.amplitude / lambda;
    r.window->lower = p.window->lower * lambda;
    r.window->upper = p.window->upper * lambda;
  } else {
    r.amplitude = p.amplitude * lambda * lambda * lambda;
  }
  return r;
}

std::array<std::array<double, 2>, 4> support_box(const PacketSpec& p, double nsigma) {
  if (!p.has_position_form()) throw std::invalid_argument("support_box: no position-space form");
  std::array<std::array<double, 2>, 4> box{};
  const double reach = p.kind == PacketKind::bump_product ? 1.0 : nsigma;
  for (int mu = 0; mu < 4; ++mu)
    box[mu] = {p.center[mu] - reach * p.widths[mu], p.center[mu] + reach * p.widths[mu]};
  return box;
}

Vec4 FourierTable::node(std::size_t flat) const {
  Vec4 q{};
  for (int mu = 3; mu >= 0; --mu) {
    const std::size_t c = static_cast<std::size_t>(grid[mu].count);
    q[mu] = grid[mu].start + grid[mu].step * static_cast<double>(flat % c);
    flat /= c;
  }
  return q;
}

std::string FourierTable::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "q0,q1,q2,q3,Re,Im\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    const Vec4 q = node(i);
    os << q[0] << ',' << q[1] << ',' << q[2] << ',' << q[3] << ',' << values[i].real() << ','
       << values[i].imag() << '\n';
  }
  return os.str();
}

FourierTable tabulate(const PacketSpec& p, const std::array<FourierTable::Axis, 4>& grid) {
  p.validate();
  FourierTable t;
  t.grid = grid;
  std::size_t total = 1;
  for (const auto& ax : grid) {
    if (ax.count < 1) throw std::invalid_argument("FourierTable axis count must be positive");
    total *= static_cast<std::size_t>(ax.count);
  }
  t.values.resize(total);
  for (std::size_t i = 0; i < total; ++i) t.values[i] = fourier_transform(p, t.node(i));
  t.provenance = p.kind == PacketKind::bump_product ? "quadrature" : "closed-form";
  return t;
}

void to_json(nlohmann::json& j, const PacketSpec& p) {
  j = nlohmann::json{{"kind", to_string(p.kind)},
                     {"center", p.center},
                     {"widths", p.widths},
                     {"amplitude", p.amplitude}};
  if (p.window) j["window"] = {{"lower", p.window->lower}, {"upper", p.window->upper}};
}

void from_json(const nlohmann::json& j, PacketSpec& p) {
  p = PacketSpec{};
  p.kind = packet_kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("center")) p.center = j.at("center").get<Vec4>();
  if (j.contains("widths")) p.widths = j.at("widths").get<Vec4>();
  if (j.contains("amplitude")) p.amplitude = j.at("amplitude").get<double>();
  if (j.contains("window"))
    p.window = FrequencyWindow{j.at("window").at("lower").get<double>(), j.at("window").at("upper").get<double>()};
  p.validate();
}

void to_json(nlohmann::json& j, const QuadratureSpec& q) {
  j = nlohmann::json{{"scheme", to_string(q.scheme)},
                     {"points", q.points},
                     {"target_rel_tol", q.target_rel_tol},
                     {"cutoff", q.cutoff},
                     {"seed", q.seed},
                     {"qmc_shifts", q.qmc_shifts}};
  if (!q.lower.empty()) {
    j["lower"] = q.lower;
    j["upper"] = q.upper;
  }
}

void from_json(const nlohmann::json& j, QuadratureSpec& q) {
  q = QuadratureSpec{};
  if (j.contains("scheme")) q.scheme = scheme_from_string(j.at("scheme").get<std::string>());
  if (j.contains("points")) q.points = j.at("points").get<long>();
  if (j.contains("target_rel_tol")) q.target_rel_tol = j.at("target_rel_tol").get<double>();
  if (j.contains("cutoff")) q.cutoff = j.at("cutoff").get<double>();
  if (j.contains("seed")) q.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("qmc_shifts")) q.qmc_shifts = j.at("qmc_shifts").get<int>();
  if (j.contains("lower")) q.lower = j.at("lower").get<std::vector<double>>();
  if (j.contains("upper")) q.upper = j.at("upper").get<std::vector<double>>();
  q.validate();
}

}  // namespace qlp
