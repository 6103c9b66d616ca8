#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qlp/rindler.hpp"

using namespace qlp;
using namespace qlp::rindler;

namespace {

QuadratureSpec tight() {
  QuadratureSpec q;
  q.points = 32;
  q.target_rel_tol = 1e-9;
  return q;
}

PacketSpec gauss(Vec4 c, Vec4 w) {
  PacketSpec g;
  g.center = c;
  g.widths = w;
  return g;
}

PacketSpec wedge_bump() { return {PacketKind::bump_product, {0, 2, 0, 0}, {0.5, 0.5, 0.5, 0.5}, std::nullopt}; }

}  // namespace

TEST_CASE("lightcone coordinates and the wedge reflection") {
  const Vec4 x{0.3, 1.7, -0.4, 0.9};
  const auto l = to_lightcone(x);
  CHECK(l.u == doctest::Approx(1.0));
  CHECK(l.v == doctest::Approx(-0.7));
  const Vec4 y = from_lightcone(l);
  for (int i = 0; i < 4; ++i) CHECK(y[i] == doctest::Approx(x[i]));
  CHECK(in_wedge(x));
  CHECK_FALSE(in_wedge({1.0, 0.5, 0, 0}));
  CHECK_FALSE(in_wedge(wedge_reflect(x)));
  CHECK(wedge_reflect(x) == Vec4{-0.3, -1.7, -0.4, 0.9});
}

TEST_CASE("wedge mass fraction: a quarter for a centered round gaussian, all of an interior bump") {
  // the wedge is a right-angle sector of the (x0, x1) plane
  CHECK(wedge_mass_fraction(gauss({0, 0, 0, 0}, {0.7, 0.7, 1.0, 2.0})) == doctest::Approx(0.25).epsilon(1e-8));
  CHECK(wedge_mass_fraction(wedge_bump()) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(wedge_supported(wedge_bump()));
  CHECK_FALSE(wedge_supported(gauss({0, 2, 0, 0}, {0.3, 0.3, 0.3, 0.3})));
  PacketSpec crossing = wedge_bump();
  crossing.center = {0, 0.6, 0, 0};
  CHECK_FALSE(wedge_supported(crossing));
}

TEST_CASE("Cartesian density equals the sum of the five lightcone channels") {
  const PacketSpec g = gauss({0, 2, 0, 0}, {0.3, 0.3, 0.3, 0.3});
  const auto psi = vacuum_state(g, 1.0);
  const auto k = kappa_expectation(psi, square_of(g), tight());
  const auto ch = kappa_channels(psi, square_of(g), tight());
  CHECK(ch.total() == doctest::Approx(k.value).epsilon(1e-12));
}

TEST_CASE("channels are non-negative for positive smearings inside the wedge") {
  const auto psi = vacuum_state(gauss({0.1, 2.1, 0, 0}, {0.3, 0.35, 0.35, 0.35}), 1.0);
  const auto ch = kappa_channels(psi, smearing_of(wedge_bump()), tight());
  for (int i = 0; i < 5; ++i) {
    INFO("channel " << i);
    CHECK(ch.value[i] >= 0.0);
  }
  CHECK(ch.total() > 0.0);
}

TEST_CASE("lightcone paths reproduce the Cartesian evaluation") {
  const PacketSpec g = gauss({0, 2, 0, 0}, {0.3, 0.3, 0.3, 0.3});
  const auto psi = vacuum_state(g, 1.0);
  const double cart = kappa_expectation(psi, square_of(g), tight()).value;
  const auto red = kappa_lightcone_expectation(psi, square_of(g), LightconePath::reduced, tight());
  CHECK(red.total() == doctest::Approx(cart).epsilon(1e-6));
  QuadratureSpec qq = tight();
  qq.scheme = Scheme::quasi_monte_carlo;
  qq.points = 4000;
  qq.qmc_shifts = 8;
  const auto qmc = kappa_lightcone_expectation(psi, square_of(g), LightconePath::qmc, qq);
  CHECK(qmc.total() == doctest::Approx(cart).epsilon(1e-2));
  CHECK(qmc.total_error() < 1e-2 * cart);
  // same seed, same numbers
  const auto again = kappa_lightcone_expectation(psi, square_of(g), LightconePath::qmc, qq);
  CHECK(again.total() == qmc.total());
}

TEST_CASE("boost generator against the finite-difference boost derivative") {
  for (const auto& g : {gauss({0, 2, 0, 0}, {0.3, 0.3, 0.3, 0.3}), gauss({0.2, 1.8, 0.1, 0}, {0.25, 0.3, 0.35, 0.4})}) {
    const auto psi = vacuum_state(g, 1.0);
    const double k = boost_generator_expectation(psi, tight()).value;
    const double fd = boost_fd_oracle(psi, tight()).value;
    CHECK(k > 0.0);
    CHECK(fd == doctest::Approx(k).epsilon(1e-8));
  }
}

TEST_CASE("boost generator vanishes on x1-parity-symmetric states") {
  const auto psi = vacuum_state(gauss({0.3, 0, 0, 0}, {0.4, 0.5, 0.6, 0.7}), 1.0);
  const double k = boost_generator_expectation(psi, tight()).value;
  CHECK(std::abs(k) < 1e-12);
}

TEST_CASE("reflected smearing on the mirror state flips the sign") {
  const PacketSpec g = gauss({0, 1.8, 0, 0}, {0.3, 0.3, 0.3, 0.3});
  const PacketSpec f = wedge_bump();
  const auto e = ell_wedge_expectation(vacuum_state(g, 1.0), f, tight());
  const auto m = ell_wedge_expectation(vacuum_state(reflect(g), 1.0), f, tight());
  CHECK(m.kappa_reflected == doctest::Approx(-e.kappa).epsilon(1e-10));
  CHECK(e.ell == doctest::Approx(e.kappa + e.kappa_reflected).epsilon(1e-14));
}

TEST_CASE("the wedge Liouvillian density vanishes on j-symmetric states") {
  const auto psi = vacuum_state(gauss({0, 0, 0, 0}, {0.4, 0.4, 0.4, 0.4}), 1.0);
  const PacketSpec f = gauss({0.2, 1.0, 0, 0}, {0.5, 0.5, 0.5, 0.5});
  const auto e = ell_wedge_expectation(psi, f, tight());
  CHECK(std::abs(e.kappa) > 1e-6);
  CHECK(std::abs(e.ell) < 1e-10 * std::abs(e.kappa));
}

TEST_CASE("wedge scans validate the family") {
  const PacketSpec chi = gauss({0, 0, 0, 0}, {0.2, 0.2, 0.2, 0.2});
  const PacketSpec f = wedge_bump();
  CHECK_THROWS(scan_boost_l4_violation(gauss({0, 0, 0, 0}, {0.2, 0.2, 0.3, 0.2}), f, 2.0, {1, 2}, 1.0, tight()));
  PacketSpec out = f;
  out.center = {0, -2, 0, 0};
  CHECK_THROWS(scan_boost_l4_violation(chi, out, 2.0, {1, 2}, 1.0, tight()));
  CHECK_THROWS(scan_boost_l4_violation(chi, f, 0.0, {1, 2}, 1.0, tight()));
  CHECK_THROWS(scan_boost_l2_violation(chi, f, 2.0, {2, 1}, 1.0, tight()));
}

TEST_CASE("short boost scan: wedge flags and K2 growth") {
  const PacketSpec chi = gauss({0, 0, 0, 0}, {0.2, 0.2, 0.2, 0.2});
  const auto rows = scan_boost_l4_violation(chi, wedge_bump(), 2.0, {1, 8}, 1.0, tight());
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    REQUIRE(r.wedge.has_value());
    CHECK(*r.wedge);
    CHECK(r.l4_exact >= r.l2_norm_sq);
  }
  CHECK(rows[1].ratio > rows[0].ratio);
}

TEST_CASE("variational probes respect the channel ground energy") {
  const auto grid = quadform::box_grid(3, 6.0, 1.0, quadform::Species::single);
  const auto p = qei_lower_probe(wedge_bump(), 1.0, grid, -1, 20, 4);
  CHECK(p.stable);
  CHECK(p.respected);
  CHECK(p.bound <= 0.0);
  CHECK(p.probe_min >= p.bound);
  CHECK(p.modes == 27);
}
