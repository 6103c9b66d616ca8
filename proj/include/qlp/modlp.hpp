#pragma once

// Finite-dimensional modular theory in the Hilbert-Schmidt standard form.
//
// The algebra M_n acts on n x n matrices X by left multiplication, the commutant
// by right multiplication, with inner product <X, Y> = tr(X^* Y). For a faithful
// density matrix rho the cyclic separating vector is Omega = rho^{1/2}; then
//   J X = X^*,   Delta X = rho X rho^{-1},   S = J Delta^{1/2}.

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace qlp::modlp {

using Matrix = Eigen::MatrixXcd;

class NonFaithfulState : public std::invalid_argument {
 public:
  NonFaithfulState(const std::string& what, double eigenvalue)
      : std::invalid_argument(what), eigenvalue_(eigenvalue) {}
  double eigenvalue() const { return eigenvalue_; }

 private:
  double eigenvalue_;
};

inline constexpr double kFaithfulnessFloor = 1e-12;

class StandardForm {
 public:
  /// Validates rho (Hermitian, trace one, eigenvalues above the faithfulness floor).
  explicit StandardForm(const Matrix& rho);

  int dim() const { return static_cast<int>(rho_.rows()); }
  const Matrix& rho() const { return rho_; }
  const Eigen::VectorXd& spectrum() const { return evals_; }
  /// rho^s for any real s.
  Matrix rho_power(double s) const;
  const Matrix& omega() const { return sqrt_rho_; }
  const Matrix& log_rho() const { return log_rho_; }

  /// Delta^s X = rho^s X rho^{-s}.
  Matrix delta_power(const Matrix& x, double s) const;
  Matrix apply_j(const Matrix& x) const { return x.adjoint(); }
  /// S X = J Delta^{1/2} X.
  Matrix apply_s(const Matrix& x) const { return apply_j(delta_power(x, 0.5)); }

 private:
  Matrix rho_;
  Matrix evecs_;
  Eigen::VectorXd evals_;
  Matrix sqrt_rho_, quarter_rho_, inv_quarter_rho_, inv_sqrt_rho_, log_rho_;
};

double hs_norm(const Matrix& x);
std::complex<double> hs_inner(const Matrix& x, const Matrix& y);

enum class Side { system, commutant };

/// System elements act as X -> M X, commutant elements as X -> X M.
struct AlgebraElement {
  Matrix matrix;
  Side side = Side::system;

  Matrix act(const Matrix& x) const { return side == Side::system ? Matrix(matrix * x) : Matrix(x * matrix); }
};

/// K = -(1/beta) log Delta acting on the standard-form vectors.
class ModularHamiltonian {
 public:
  ModularHamiltonian(const StandardForm& sf, double beta);
  double beta() const { return beta_; }
  Matrix apply(const Matrix& x) const;
  /// n^2 x n^2 matrix of K on column-major vec(X).
  Matrix superoperator() const;

 private:
  double beta_;
  Matrix log_rho_;
};

enum class LpIndex { two, four, infinity };

double lp_norm(const StandardForm& sf, const AlgebraElement& a, LpIndex p);

/// ||A J A Omega||_2^{1/2}.
double l4_via_positive_cone(const StandardForm& sf, const AlgebraElement& a);

struct OptimizerBudget {
  int starts = 8;
  int max_iterations = 400;
  std::uint64_t seed = 7;
};

struct ArakiMasudaResult {
  double value = 0.0;  ///< best objective found; a lower estimate of the supremum
  double gap = 0.0;    ///< final objective change plus gradient-norm bound
  bool converged = false;
  int iterations = 0;
};

/// sup over densities sigma of ||sigma^{1/4} A rho^{1/4}||_2, by multi-start BFGS
/// over sigma = B B^* / tr(B B^*).
ArakiMasudaResult araki_masuda_l4(const StandardForm& sf, const AlgebraElement& a,
                                  const OptimizerBudget& budget = {});

/// |(A Omega, T' A Omega)| <= c^2 ||A Omega||_4^2 with c^2 = ||Delta^{-1/4} T' Omega||.
struct CommutantBound {
  double lhs = 0.0;
  double rhs = 0.0;
  double constant = 0.0;
};

CommutantBound commutant_l4_bound(const StandardForm& sf, const AlgebraElement& tp, const AlgebraElement& a);

struct PassivityResult {
  double form_value = 0.0;  ///< beta (A Omega, K A Omega)
  double gap = 0.0;         ///< form_value - (||A Omega||^2 - ||A^* Omega||^2)
};

PassivityResult passivity_gap(const StandardForm& sf, const ModularHamiltonian& mh, const AlgebraElement& a);

/// diag(exp(-beta omega n)), n < d, normalized.
Matrix gibbs_state(double beta, double omega, int d);

/// Truncated oscillator lowering operator on C^d.
Matrix lowering(int d);

// Random draws for property suites.
Matrix random_matrix(int n, std::mt19937_64& rng);
Matrix random_hermitian(int n, std::mt19937_64& rng);
Matrix random_density(int n, std::mt19937_64& rng);
Matrix random_unitary(int n, std::mt19937_64& rng);

struct PropertyRow {
  std::string property;
  int dim = 0;
  int draws = 0;
  double min_slack = 0.0;   ///< worst slack over draws (negative = violated)
  double threshold = 0.0;   ///< pass iff min_slack >= threshold
  bool passed = false;
};

struct SuiteOptions {
  std::vector<int> dims{2, 3, 4, 6};
  int pair_draws = 500;
  int bound_draws = 200;
  int araki_masuda_seeds = 50;
  int araki_masuda_max_dim = 4;
  std::uint64_t seed = 1;
};

/// Norm axioms, JAJ identity, Araki-Masuda equivalence, commutant bound and
/// passivity over random draws.
std::vector<PropertyRow> run_property_suite(const SuiteOptions& opts);
std::string property_rows_csv(const std::vector<PropertyRow>& rows);

void to_json(nlohmann::json& j, const StandardForm& sf);
StandardForm standard_form_from_json(const nlohmann::json& j);

}  // namespace qlp::modlp
