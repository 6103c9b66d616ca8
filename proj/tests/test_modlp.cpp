#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "qlp/modlp.hpp"

using namespace qlp::modlp;

namespace {

Matrix diag_state(const std::vector<double>& p) {
  Matrix r = Matrix::Zero(static_cast<Eigen::Index>(p.size()), static_cast<Eigen::Index>(p.size()));
  for (std::size_t i = 0; i < p.size(); ++i) r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = p[i];
  return r;
}

}  // namespace

TEST_CASE("modular operator of a diagonal state acts entrywise") {
  const std::vector<double> p{0.5, 0.3, 0.2};
  StandardForm sf(diag_state(p));
  std::mt19937_64 rng(3);
  const Matrix x = random_matrix(3, rng);
  for (double s : {0.5, -0.25, 1.0}) {
    const Matrix d = sf.delta_power(x, s);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(std::abs(d(i, j) - std::pow(p[i] / p[j], s) * x(i, j)) < 1e-14);
  }
  // S (A Omega) = A^* Omega
  const Matrix a = random_matrix(3, rng);
  const Matrix s = sf.apply_s(a * sf.omega());
  CHECK((s - a.adjoint() * sf.omega()).norm() < 1e-13);
}

TEST_CASE("Lp norms of commuting elements have the classical closed form") {
  const std::vector<double> p{0.4, 0.35, 0.25};
  StandardForm sf(diag_state(p));
  const std::vector<std::complex<double>> av{{1.0, 0.5}, {-2.0, 0.0}, {0.3, -0.7}};
  AlgebraElement a{Matrix::Zero(3, 3)};
  double s2 = 0, s4 = 0, sinf = 0;
  for (int i = 0; i < 3; ++i) {
    a.matrix(i, i) = av[i];
    const double m = std::abs(av[i]);
    s2 += p[i] * m * m;
    s4 += p[i] * std::pow(m, 4);
    sinf = std::max(sinf, m);
  }
  CHECK(lp_norm(sf, a, LpIndex::two) == doctest::Approx(std::sqrt(s2)).epsilon(1e-13));
  CHECK(lp_norm(sf, a, LpIndex::four) == doctest::Approx(std::pow(s4, 0.25)).epsilon(1e-13));
  CHECK(lp_norm(sf, a, LpIndex::infinity) == doctest::Approx(sinf).epsilon(1e-13));
  CHECK(l4_via_positive_cone(sf, a) == doctest::Approx(std::pow(s4, 0.25)).epsilon(1e-12));
}

TEST_CASE("unit element has norm one in every Lp") {
  std::mt19937_64 rng(11);
  StandardForm sf(random_density(4, rng));
  AlgebraElement one{Matrix::Identity(4, 4)};
  for (auto p : {LpIndex::two, LpIndex::four, LpIndex::infinity}) CHECK(lp_norm(sf, one, p) == doctest::Approx(1.0));
}

TEST_CASE("L4 norm is unitarily covariant") {
  std::mt19937_64 rng(5);
  const Matrix rho = random_density(4, rng);
  const Matrix u = random_unitary(4, rng);
  const Matrix a = random_matrix(4, rng);
  StandardForm s1(rho), s2(u * rho * u.adjoint());
  const double n1 = lp_norm(s1, AlgebraElement{a}, LpIndex::four);
  const double n2 = lp_norm(s2, AlgebraElement{u * a * u.adjoint()}, LpIndex::four);
  CHECK(n1 == doctest::Approx(n2).epsilon(1e-12));
}

TEST_CASE("modular Hamiltonian of a Gibbs state is the energy difference") {
  // rho = e^{-beta H}/Z with H = diag(e): K e_ij = (e_i - e_j) e_ij
  const double beta = 0.8;
  const std::vector<double> e{0.0, 0.7, 1.9};
  std::vector<double> p;
  double z = 0;
  for (double x : e) z += std::exp(-beta * x);
  for (double x : e) p.push_back(std::exp(-beta * x) / z);
  StandardForm sf(diag_state(p));
  ModularHamiltonian mh(sf, beta);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Matrix x = Matrix::Zero(3, 3);
      x(i, j) = 1.0;
      const Matrix kx = mh.apply(x);
      CHECK(std::abs(kx(i, j) - (e[i] - e[j])) < 1e-12);
    }
  const Matrix sup = mh.superoperator();
  CHECK((sup - sup.adjoint()).norm() < 1e-12);
}

TEST_CASE("passivity and the commutant bound on a single draw") {
  std::mt19937_64 rng(17);
  StandardForm sf(random_density(4, rng));
  ModularHamiltonian mh(sf, 1.3);
  const auto herm = passivity_gap(sf, mh, AlgebraElement{random_hermitian(4, rng)});
  CHECK(herm.form_value >= -1e-12);
  const auto gen = passivity_gap(sf, mh, AlgebraElement{random_matrix(4, rng)});
  CHECK(gen.gap >= -1e-12);
  const auto cb = commutant_l4_bound(sf, AlgebraElement{random_matrix(4, rng), Side::commutant},
                                     AlgebraElement{random_matrix(4, rng)});
  CHECK(cb.lhs <= cb.rhs);
}

TEST_CASE("Araki-Masuda variational value approaches the L4 norm from below") {
  std::mt19937_64 rng(23);
  StandardForm sf(random_density(3, rng));
  AlgebraElement a{random_matrix(3, rng)};
  const auto am = araki_masuda_l4(sf, a);
  const double exact = lp_norm(sf, a, LpIndex::four);
  CHECK(am.value <= exact * (1 + 1e-9));
  CHECK(am.value == doctest::Approx(exact).epsilon(1e-5));
}

TEST_CASE("non-faithful states are rejected with the offending eigenvalue") {
  Matrix rho = diag_state({0.7, 0.3, 0.0});
  try {
    StandardForm sf(rho);
    FAIL("expected NonFaithfulState");
  } catch (const NonFaithfulState& e) {
    CHECK(std::abs(e.eigenvalue()) < 1e-12);
  }
  CHECK_THROWS(StandardForm(diag_state({0.7, 0.7})));
}

TEST_CASE("truncated oscillator helpers") {
  const Matrix a = lowering(5);
  const Matrix n = a.adjoint() * a;
  for (int k = 0; k < 5; ++k) CHECK(n(k, k).real() == doctest::Approx(k));
  const Matrix g = gibbs_state(1.0, 1.0, 6);
  CHECK(g.trace().real() == doctest::Approx(1.0));
  CHECK(g(1, 1).real() / g(0, 0).real() == doctest::Approx(std::exp(-1.0)));
}

TEST_CASE("property suite on a reduced corpus passes") {
  SuiteOptions o;
  o.dims = {2, 3};
  o.pair_draws = 40;
  o.bound_draws = 20;
  o.araki_masuda_seeds = 3;
  const auto rows = run_property_suite(o);
  CHECK(rows.size() == 2 * 4 + 2 + 1 + 2);
  for (const auto& r : rows) {
    INFO(r.property << " n=" << r.dim << " slack=" << r.min_slack);
    CHECK(r.passed);
  }
  const auto csv = property_rows_csv(rows);
  CHECK(csv.rfind("property,dim,draws,min_slack,threshold,passed\n", 0) == 0);
}

TEST_CASE("standard form JSON round trip") {
  std::mt19937_64 rng(2);
  StandardForm sf(random_density(3, rng));
  nlohmann::json j;
  to_json(j, sf);
  const StandardForm back = standard_form_from_json(j);
  CHECK((back.rho() - sf.rho()).norm() < 1e-15);
  CHECK_THROWS(standard_form_from_json(nlohmann::json::object()));
}
