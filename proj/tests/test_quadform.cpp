#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "qlp/quadform.hpp"

using namespace qlp;
using namespace qlp::quadform;

namespace {

QuadraticBosonForm random_form(int n, std::uint64_t seed, double pair_scale) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  CMatrix a(n, n), b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      a(i, j) = {nd(rng), nd(rng)};
      b(i, j) = {nd(rng), nd(rng)};
    }
  a = 0.5 * (a + a.adjoint()).eval();
  b = 0.5 * (b + b.transpose()).eval();
  // shift A so the form is comfortably stable
  const double shift = 3.0 + pair_scale * b.norm();
  a += shift * CMatrix::Identity(n, n);
  QuadraticBosonForm f;
  f.number = a;
  f.pair = pair_scale * b;
  f.channel.assign(static_cast<std::size_t>(n), 0);
  return f;
}

}  // namespace

TEST_CASE("single-mode Bogoliubov closed form") {
  // E0 = (sqrt(eps^2 - mu^2) - eps) / 2
  for (auto [eps, mu] : {std::pair{1.0, 0.6}, std::pair{2.0, 0.3}, std::pair{1.5, -1.2}}) {
    const auto r = ground_energy(single_mode(eps, mu));
    CHECK(r.stable);
    CHECK(std::abs(r.energy - 0.5 * (std::sqrt(eps * eps - mu * mu) - eps)) < 1e-12);
    REQUIRE(r.symplectic.size() == 1);
    CHECK(r.symplectic[0] == doctest::Approx(std::sqrt(eps * eps - mu * mu)).epsilon(1e-12));
  }
  CHECK(std::abs(ground_energy(single_mode(1.0, 0.6)).energy + 0.1) < 1e-12);
}

TEST_CASE("single mode against truncated exact diagonalization") {
  const auto f = single_mode(1.0, 0.6);
  CHECK(std::abs(exact_diag_oracle(f, 40) - ground_energy(f).energy) < 1e-8);
}

TEST_CASE("two-mode random form against exact diagonalization") {
  const auto f = random_form(2, 7, 0.4);
  f.validate();
  const auto r = ground_energy(f);
  REQUIRE(r.stable);
  CHECK(std::abs(exact_diag_oracle(f, 30) - r.energy) < 1e-6);
}

TEST_CASE("pairing-free forms have zero ground energy") {
  auto f = random_form(4, 3, 0.0);
  const auto r = ground_energy(f);
  CHECK(r.stable);
  CHECK(std::abs(r.energy) < 1e-12);
}

TEST_CASE("overcritical pairing is flagged unstable") {
  const auto r = ground_energy(single_mode(1.0, 1.5));
  CHECK_FALSE(r.stable);
  CHECK(std::isinf(r.energy));
  CHECK(r.energy < 0);
  CHECK(r.offending > 0.0);
  CHECK(r.min_bdg_eigenvalue < 0.0);
}

TEST_CASE("form validation catches non-Hermitian A and non-symmetric B") {
  auto f = single_mode(1.0, 0.2);
  f.number(0, 0) = {1.0, 0.5};
  CHECK_THROWS(f.validate());
  auto g = random_form(2, 1, 0.3);
  g.pair(0, 1) += cplx(0.1, 0.0);
  CHECK_THROWS(g.validate());
}

TEST_CASE("formal Liouvillian is diagonal with weights +-omega") {
  const auto grid = box_grid(3, 3.0, 1.0, Species::doubled, 1.0);
  const auto l = assemble(liouville_density_terms(1.0), Smearing::formal_unit(), grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& m = grid.modes[i];
    const double w = std::sqrt(m.k[0] * m.k[0] + m.k[1] * m.k[1] + m.k[2] * m.k[2] + 1.0);
    const auto ii = static_cast<Eigen::Index>(i);
    CHECK(std::abs(l.number(ii, ii) - (m.channel == 0 ? w : -w)) < 1e-10);
  }
  CMatrix off = l.number;
  off.diagonal().setZero();
  CHECK(off.cwiseAbs().maxCoeff() < 1e-10);
  CHECK(l.pair.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("smeared Liouvillian: system and bath densities commute, full form unbounded below") {
  PacketSpec f;
  f.widths = {0.5, 0.7, 0.7, 0.7};
  const auto grid = box_grid(3, 4.0, 1.0, Species::doubled, 1.0);
  const auto hs = assemble(energy_density_terms(1.0), Smearing::of(f), grid);
  const auto hb = assemble(energy_density_terms(1.0, FieldSel::bath), Smearing::of(f), grid);
  CHECK(commutator_norm(hs, hb) <= 1e-12 * hs.bdg().norm() * hb.bdg().norm());
  CHECK(ground_energy(hs).stable);
  const auto ell = assemble(liouville_density_terms(1.0), Smearing::of(f), grid);
  const auto ge = ground_energy(ell);
  CHECK_FALSE(ge.stable);
  // the particle sector alone is bounded below
  CHECK(ground_energy(restrict_channel(ell, 0)).stable);
}

TEST_CASE("variational probe: vacuum gives zero, probes never undercut the bound") {
  const auto f = random_form(3, 11, 0.5);
  const auto ge = ground_energy(f);
  const auto vac = variational_probe(f, {}, {});
  CHECK(std::abs(vac.min_value) < 1e-14);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  std::vector<Eigen::VectorXcd> one;
  std::vector<CMatrix> two;
  for (int k = 0; k < 4; ++k) {
    Eigen::VectorXcd v(3);
    for (int i = 0; i < 3; ++i) v(i) = {nd(rng), nd(rng)};
    one.push_back(v);
    CMatrix t(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) t(i, j) = {nd(rng), nd(rng)};
    two.push_back(0.5 * (t + t.transpose()));
  }
  const auto pr = variational_probe(f, one, two);
  CHECK(pr.min_value >= ge.energy - 1e-10);
  CHECK(pr.min_value <= 1e-12);
}

TEST_CASE("purification reproduces the Bose occupation") {
  const auto p = purification_crosscheck(1.0, 1.0, 40);
  CHECK(p.bose == doctest::Approx(1.0 / (std::exp(1.0) - 1.0)).epsilon(1e-15));
  CHECK(p.tail_bound < 1e-10);
  CHECK(p.occupation_residual < 1e-10);
  CHECK(p.kms_residual < 1e-10);
  CHECK(p.annihilation_residual < 1e-10);
  CHECK(p.swap_residual < 1e-10);
  CHECK(p.delta_spectrum_residual < 1e-10);
}

TEST_CASE("mode grids") {
  const auto g = box_grid(4, 2.0, 1.0, Species::single);
  CHECK(g.size() == 64);
  double vol = 0.0;
  for (const auto& m : g.modes) vol += m.weight;
  CHECK(vol == doctest::Approx(64.0 / std::pow(2 * M_PI, 3)).epsilon(1e-13));
  for (std::size_t i = 0; i < g.size(); ++i) {
    const int j = g.partner(i);
    REQUIRE(j >= 0);
    CHECK(g.modes[static_cast<std::size_t>(j)].k[0] == doctest::Approx(-g.modes[i].k[0]));
  }
  const auto d = box_grid(2, 2.0, 1.0, Species::doubled, 1.0);
  CHECK(d.size() == 16);
  CHECK_THROWS(box_grid(0, 2.0, 1.0, Species::single));
}

TEST_CASE("boost channel terms and the massless case") {
  CHECK(boost_lightcone_terms(1.0).size() == 5);
  CHECK(boost_lightcone_terms(1.0, 0).size() == 1);
  // the mass channel drops out of the full list and carries zero weight when selected
  CHECK(boost_lightcone_terms(0.0).size() == 4);
  CHECK(boost_lightcone_terms(0.0, 2).front().coef == 0.0);
  CHECK_THROWS(boost_lightcone_terms(1.0, 5));
}

TEST_CASE("form JSON round trip and CSV rows") {
  const auto f = random_form(2, 9, 0.3);
  nlohmann::json j;
  to_json(j, f);
  const auto back = form_from_json(j);
  CHECK((back.number - f.number).norm() == 0.0);
  CHECK((back.pair - f.pair).norm() == 0.0);
  const auto r = ground_energy(f);
  CHECK(ground_energy_csv_header() == "modes,energy,stable,zero_modes,min_bdg,offending");
  CHECK(ground_energy_csv_row(2, r).rfind("2,", 0) == 0);
}
