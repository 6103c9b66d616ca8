#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "qlp/quadrature.hpp"
#include "qlp/testfn.hpp"

using namespace qlp;

namespace {

constexpr double kSig[4] = {1, -1, -1, -1};

// int_{a}^{b} h(x) e^{i s x} dx by the trapezoid rule (h vanishes smoothly at the ends).
cplx trap(const std::function<double(double)>& h, double a, double b, double s, int n = 4000) {
  const double dx = (b - a) / n;
  cplx acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = a + i * dx;
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    acc += w * h(x) * std::exp(cplx(0, s * x));
  }
  return acc * dx;
}

// Separable oracle for position-space packets: product of 1D transforms, with an
// optional x^mu weight on one axis.
cplx separable_transform(const PacketSpec& p, const Vec4& q, int moment_axis = -1) {
  cplx out = p.amplitude;
  for (int mu = 0; mu < 4; ++mu) {
    const double c = p.center[mu], w = p.widths[mu];
    std::function<double(double)> h;
    if (p.kind == PacketKind::gaussian)
      h = [=](double x) { return std::exp(-(x - c) * (x - c) / (2 * w * w)); };
    else
      h = [=](double x) {
        const double t = (x - c) / w;
        return std::abs(t) < 1 ? std::exp(-1.0 / (1 - t * t)) : 0.0;
      };
    std::function<double(double)> hw = h;
    if (mu == moment_axis) hw = [=](double x) { return x * h(x); };
    const double half = p.kind == PacketKind::gaussian ? 12 * w : w;
    out *= trap(hw, c - half, c + half, kSig[mu] * q[mu]);
  }
  return out;
}

}  // namespace

TEST_CASE("gaussian transform matches the separable quadrature oracle") {
  PacketSpec g;
  g.center = {0.3, -0.2, 0.5, 0.1};
  g.widths = {0.7, 1.1, 0.9, 1.3};
  g.amplitude = 1.7;
  for (const Vec4& q : {Vec4{0, 0, 0, 0}, Vec4{1.2, -0.4, 2.0, 0.3}, Vec4{-2.5, 1.0, -1.0, 0.7}}) {
    const cplx got = fourier_transform(g, q);
    const cplx want = separable_transform(g, q);
    CHECK(std::abs(got - want) <= 1e-10 * std::max(1.0, std::abs(want)));
  }
}

TEST_CASE("bump-product transform matches the separable quadrature oracle") {
  PacketSpec b;
  b.kind = PacketKind::bump_product;
  b.center = {0.0, 2.0, -0.3, 0.4};
  b.widths = {0.5, 0.6, 0.8, 1.0};
  for (const Vec4& q : {Vec4{0, 0, 0, 0}, Vec4{3.0, -1.0, 4.0, 0.5}, Vec4{-6.0, 5.0, -2.0, 9.0}}) {
    const cplx got = fourier_transform(b, q);
    const cplx want = separable_transform(b, q);
    CHECK(std::abs(got - want) <= 1e-9 * std::max(1e-3, std::abs(want)));
  }
}

TEST_CASE("moments are the q-derivatives of the transform") {
  // x^0 moment = -i d/dq0, x^i moment = +i d/dq_i for exp(+i q.x)
  PacketSpec g;
  g.center = {0.2, 1.5, 0.0, -0.4};
  g.widths = {0.6, 0.5, 0.7, 0.8};
  const Vec4 q{0.9, -1.3, 0.4, 2.1};
  const double h = 1e-5;
  for (int mu = 0; mu < 4; ++mu) {
    Vec4 qp = q, qm = q;
    qp[mu] += h;
    qm[mu] -= h;
    const cplx d = (fourier_transform(g, qp) - fourier_transform(g, qm)) / (2 * h);
    const cplx want = (mu == 0 ? cplx(0, -1) : cplx(0, 1)) * d;
    CHECK(std::abs(fourier_transform_moment(g, q, mu) - want) <= 1e-7 * std::max(1.0, std::abs(want)));
  }
  PacketSpec b = g;
  b.kind = PacketKind::bump_product;
  for (int mu = 0; mu < 4; ++mu) {
    const cplx want = separable_transform(b, q, mu);
    CHECK(std::abs(fourier_transform_moment(b, q, mu) - want) <= 1e-9 * std::max(1e-3, std::abs(want)));
  }
}

TEST_CASE("1D bump transform against direct quadrature") {
  auto b = [](double t) { return std::abs(t) < 1 ? std::exp(-1.0 / (1 - t * t)) : 0.0; };
  for (double s : {0.0, 0.7, 5.0, 23.0}) {
    for (int m : {0, 1}) {
      auto h = [&](double t) { return (m ? t : 1.0) * b(t); };
      const cplx want = trap(h, -1, 1, s, 20000);
      CHECK(std::abs(bump_transform_1d(s, m) - want) <= 1e-12);
    }
  }
}

TEST_CASE("scale_translate acts on the Fourier side as lambda^-1 phat(k/lambda) e^{ik.a}") {
  PacketSpec g;
  g.widths = {0.8, 1.0, 1.2, 0.9};
  g.center = {0.1, 0.2, 0.0, 0.0};
  const Vec4 a{0.5, 2.0, -1.0, 0.0};
  const Vec4 q{1.0, 0.3, -0.6, 1.4};
  for (double lambda : {0.5, 2.0, 8.0}) {
    const PacketSpec s = scale_translate(g, lambda, a);
    const Vec4 qs{q[0] / lambda, q[1] / lambda, q[2] / lambda, q[3] / lambda};
    const cplx want = fourier_transform(g, qs) / lambda * std::exp(cplx(0, minkowski_dot(q, a)));
    CHECK(std::abs(fourier_transform(s, q) - want) <= 1e-12 * std::max(1.0, std::abs(want)));
    // pointwise: lambda^3 g(lambda (x - a))
    const Vec4 x{0.6, 2.1, -0.9, 0.05};
    const Vec4 y{lambda * (x[0] - a[0]), lambda * (x[1] - a[1]), lambda * (x[2] - a[2]), lambda * (x[3] - a[3])};
    CHECK(evaluate(s, x) == doctest::Approx(lambda * lambda * lambda * evaluate(g, y)).epsilon(1e-13));
  }
}

TEST_CASE("momentum-window packets vanish outside the window and have no position form") {
  PacketSpec w;
  w.kind = PacketKind::momentum_window;
  w.window = FrequencyWindow{-2.0, -1.0};
  CHECK(std::abs(fourier_transform(w, {-1.5, 0, 0, 0}) - cplx(1.0, 0.0)) < 1e-15);
  CHECK(fourier_transform(w, {-0.5, 0, 0, 0}) == cplx(0.0));
  CHECK(fourier_transform(w, {1.5, 0.2, 0, 0}) == cplx(0.0));
  CHECK_FALSE(w.has_position_form());
  CHECK_THROWS(evaluate(w, {0, 0, 0, 0}));
  const PacketSpec s = scale_translate(w, 4.0, {0, 0, 0, 0});
  CHECK(s.window->lower == -8.0);
  CHECK(s.window->upper == -4.0);
}

TEST_CASE("centered transform removes the center phase for isotropic packets") {
  PacketSpec g;
  g.center = {0.0, 1.0, -0.5, 0.25};
  g.widths = {0.7, 0.9, 0.9, 0.9};
  REQUIRE(g.spatially_isotropic());
  const Vec4 q{0.8, 0.6, 0.0, 0.8};
  const double qm = std::sqrt(q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
  const cplx want = fourier_transform(g, q);
  const cplx got = std::exp(cplx(0, minkowski_dot(q, g.center))) * centered_transform(g, q[0], qm);
  CHECK(std::abs(got - want) < 1e-13);
}

TEST_CASE("packet validation and support boxes") {
  PacketSpec g;
  g.widths = {1, 0, 1, 1};
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  PacketSpec b;
  b.kind = PacketKind::bump_product;
  b.center = {0, 2, 0, 0};
  b.widths = {0.5, 0.5, 0.5, 0.5};
  const auto box = support_box(b);
  CHECK(box[1][0] == doctest::Approx(1.5));
  CHECK(box[1][1] == doctest::Approx(2.5));
  CHECK(evaluate(b, {0, 2.6, 0, 0}) == 0.0);
  CHECK(evaluate(b, {0, 2.0, 0, 0}) == doctest::Approx(std::exp(-4.0)));
}

TEST_CASE("JSON round trip of packets and quadrature specs") {
  PacketSpec w;
  w.kind = PacketKind::momentum_window;
  w.window = FrequencyWindow{-3.0, -1.5};
  w.widths = {1, 0.5, 0.6, 0.7};
  nlohmann::json j = w;
  const auto back = j.get<PacketSpec>();
  CHECK(back.kind == w.kind);
  CHECK(back.widths == w.widths);
  CHECK(back.window->lower == -3.0);

  QuadratureSpec q;
  q.scheme = Scheme::quasi_monte_carlo;
  q.points = 4096;
  q.seed = 99;
  nlohmann::json jq = q;
  const auto qb = jq.get<QuadratureSpec>();
  CHECK(qb.scheme == Scheme::quasi_monte_carlo);
  CHECK(qb.points == 4096);
  CHECK(qb.seed == 99u);
  CHECK_THROWS(nlohmann::json({{"kind", "lorentzian"}}).get<PacketSpec>());
}

TEST_CASE("Fourier table records its metric and provenance") {
  PacketSpec g;
  std::array<FourierTable::Axis, 4> grid{};
  for (auto& a : grid) a = {-1.0, 1.0, 3};
  const auto t = tabulate(g, grid);
  CHECK(t.values.size() == 81);
  CHECK(t.metric == "(+,-,-,-);exp(+i q.x)");
  CHECK(t.provenance == "closed-form");
  const Vec4 n = t.node(80);
  CHECK(n == Vec4{1, 1, 1, 1});
  CHECK(std::abs(t.values[80] - fourier_transform(g, n)) == 0.0);
}
