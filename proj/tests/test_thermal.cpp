#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "qlp/thermal.hpp"

using namespace qlp;
using namespace qlp::thermal;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// ||phi(g) Omega||^2 by composite Simpson in |k| from the closed-form transform.
double norm_oracle(const PacketSpec& g, const ThermalParams& tp, double kmax = 30.0, int n = 6000) {
  const double h = kmax / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double k = i * h;
    const double w = std::sqrt(k * k + tp.mass * tp.mass);
    const double bp = thermal_factor(Sign::plus, w, tp.beta), bm = thermal_factor(Sign::minus, w, tp.beta);
    const double p = std::norm(fourier_transform(g, {w, k, 0, 0}));
    const double hh = std::norm(fourier_transform(g, {-w, -k, 0, 0}));
    const double f = k * k * (bp * bp * p + bm * bm * hh) / (2 * w);
    acc += (i == 0 || i == n ? 1 : (i % 2 ? 4 : 2)) * f;
  }
  return acc * h / 3.0 * 4 * std::numbers::pi / std::pow(2 * std::numbers::pi, 3);
}

}  // namespace

TEST_CASE("thermal factors at beta omega = ln 2 and in the vacuum") {
  const double w = std::log(2.0);
  CHECK(thermal_factor(Sign::plus, w, 1.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(thermal_factor(Sign::minus, w, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(thermal_factor(Sign::plus, 2.0, kInf) == 1.0);
  CHECK(thermal_factor(Sign::minus, 2.0, kInf) == 0.0);
}

TEST_CASE("thermal factor identity and ordering on a grid") {
  std::vector<double> om, be;
  for (int i = 0; i < 30; ++i) {
    om.push_back(1.0 + 0.5 * i);
    be.push_back(0.2 + 0.3 * i);
  }
  const auto r = thermal_factor_check(1.0, om, be);
  CHECK(r.points == 900);
  CHECK(r.max_identity_residual <= 1e-12);
  CHECK(r.max_order_violation <= 1e-12);
  CHECK_THROWS(thermal_factor_check(1.0, {0.5}, {1.0}));
}

TEST_CASE("state norm against an independent radial quadrature") {
  const ThermalParams tp{0.7, 1.0};
  PacketSpec g;
  g.widths = {0.6, 0.8, 0.8, 0.8};
  const auto a = one_particle_state(g, tp);
  const double got = state_norm(a, QuadratureSpec{}).value;
  CHECK(got == doctest::Approx(norm_oracle(g, tp)).epsilon(1e-9));
  // real g: phi(g)^* Omega = phi(g) Omega
  CHECK(hole_dominance(a, QuadratureSpec{}).value == doctest::Approx(got).epsilon(1e-10));
}

TEST_CASE("smeared energy: radial pipeline against the momentum-kernel and grid oracles") {
  const ThermalParams tp{1.0, 1.0};
  PacketSpec g;
  g.widths = {0.7, 0.6, 0.6, 0.6};
  PacketSpec f;
  f.widths = {0.8, 1.0, 1.0, 1.0};
  const auto a = one_particle_state(g, tp);
  const auto e = smeared_energy(a, f, QuadratureSpec{});
  const auto k = kernel_space_oracle(a, f, 64);
  CHECK(e.h == doctest::Approx(k.h).epsilon(1e-8));
  CHECK(e.bath == doctest::Approx(k.bath).epsilon(1e-8));
  CHECK(std::abs(k.h_imag) < 1e-12);
  CHECK(e.ell == doctest::Approx(e.h - e.bath).epsilon(1e-14));
  modefield::GridOracleSpec gs;
  gs.n = 48;
  gs.half_length = 8.0;
  const auto go = grid_oracle_energy(a, f, gs);
  CHECK(go.h == doctest::Approx(e.h).epsilon(1e-5));
  CHECK(go.bath == doctest::Approx(e.bath).epsilon(1e-5));
}

TEST_CASE("energy density expectations are positive for positive smearings") {
  const ThermalParams tp{2.0, 0.5};
  PacketSpec g;
  g.widths = {0.5, 0.5, 0.5, 0.5};
  g.center = {0.0, 0.3, 0.0, 0.0};
  PacketSpec f;
  f.kind = PacketKind::bump_product;
  f.widths = {1.0, 1.0, 1.0, 1.0};
  const auto e = smeared_energy(one_particle_state(g, tp), f, QuadratureSpec{});
  CHECK(e.h > 0.0);
  CHECK(e.bath > 0.0);
}

TEST_CASE("L4 proxy and the Wick-contraction norm") {
  const ThermalParams tp{1.0, 1.0};
  PacketSpec g;
  g.widths = {0.7, 0.6, 0.6, 0.6};
  const auto r = l4_proxy(g, tp, QuadratureSpec{});
  CHECK(r.proxy == doctest::Approx(std::sqrt(6.0) * r.n2).epsilon(1e-14));
  // ||A Omega||_2 <= ||A Omega||_4
  CHECK(r.exact >= r.n2);
  CHECK(r.phi_sq_norm_sq >= r.n2 * r.n2);
  CHECK(l4_exact(one_particle_state(g, tp), QuadratureSpec{}) == doctest::Approx(r.exact).epsilon(1e-10));
  PacketSpec w;
  w.kind = PacketKind::momentum_window;
  w.window = FrequencyWindow{-2.0, -1.0};
  CHECK_THROWS_AS(l4_proxy(w, tp, QuadratureSpec{}), UnsupportedInput);
}

TEST_CASE("inverse hole factor gives a pure-hole state for negative-frequency windows") {
  const ThermalParams tp{1.0, 1.0};
  PacketSpec w;
  w.kind = PacketKind::momentum_window;
  w.window = FrequencyWindow{-2.0, -1.1};
  const auto a = one_particle_state(w, tp, StateOptions{true});
  for (double k : {0.0, 0.5, 1.0, 1.5}) {
    CHECK(std::abs(a.particle({k, 0, 0})) == 0.0);
  }
  CHECK(std::abs(a.hole({0.7, 0, 0})) > 0.0);
}

TEST_CASE("Liouvillian kernel cancellations") {
  const ThermalParams tp{0.5, 1.0};
  std::vector<modefield::Vec3> ks;
  for (int i = 0; i < 50; ++i) ks.push_back({0.1 * i, -0.05 * i, 0.3});
  const auto r = liouville_cancellation_check(tp, ks);
  CHECK(r.samples == 50);
  CHECK(r.max_pair_coefficient <= 1e-12);
  CHECK(r.max_mixed_coefficient <= 1e-12);
  CHECK(r.max_diagonal_residual <= 1e-12);
}

TEST_CASE("ladder validation") {
  CHECK_THROWS(validate_ladder({}));
  CHECK_THROWS(validate_ladder({1, 2, 2}));
  CHECK_THROWS(validate_ladder({-1, 2}));
  CHECK_NOTHROW(validate_ladder({1, 2, 4}));
}

TEST_CASE("short thermal-l4 scan reports one row per lambda") {
  const ThermalParams tp{1.0, 1.0};
  PacketSpec chi;
  PacketSpec f;
  f.kind = PacketKind::bump_product;
  const auto rows = scan_l4_violation(chi, f, {1, 4, 16}, tp, QuadratureSpec{});
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) {
    CHECK(r.ratio == doctest::Approx(r.h_expect / r.l4_proxy).epsilon(1e-12));
    CHECK(r.ell_expect == doctest::Approx(r.h_expect - r.bath_expect).epsilon(1e-12));
  }
  CHECK(rows[2].ratio > rows[0].ratio);
  const auto csv = to_csv(rows);
  CHECK(csv.rfind("lambda,n2,l4proxy,l4exact,h,bath,ell,ratio", 0) == 0);
}

TEST_CASE("invalid parameters are rejected") {
  CHECK_THROWS((ThermalParams{-1.0, 1.0}.validate()));
  CHECK_THROWS((ThermalParams{1.0, -1.0}.validate()));
}
