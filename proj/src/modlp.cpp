#include "qlp/modlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace qlp::modlp {

namespace {

Matrix spectral_function(const Matrix& vecs, const Eigen::VectorXd& vals, double (*fn)(double, double), double s) {
  Eigen::VectorXcd d(vals.size());
  for (Eigen::Index i = 0; i < vals.size(); ++i) d(i) = fn(vals(i), s);
  return vecs * d.asDiagonal() * vecs.adjoint();
}

double pow_fn(double x, double s) { return std::pow(x, s); }
double log_fn(double x, double) { return std::log(x); }

/// Fractional power of a positive semidefinite matrix; tiny negative eigenvalues are clamped.
Matrix psd_power(const Matrix& m, double s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()));
  Eigen::VectorXcd d(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    double v = std::max(es.eigenvalues()(i), 0.0);
    d(i) = v > 0 ? std::pow(v, s) : 0.0;
  }
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

StandardForm::StandardForm(const Matrix& rho) : rho_(rho) {
  if (rho.rows() != rho.cols() || rho.rows() < 1) throw std::invalid_argument("rho: must be a non-empty square matrix");
  double scale = std::max(1.0, rho.norm());
  if ((rho - rho.adjoint()).norm() > 1e-10 * scale) throw std::invalid_argument("rho: not Hermitian");
  if (std::abs(rho.trace() - 1.0) > 1e-9) throw std::invalid_argument("rho: trace differs from one");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()));
  evals_ = es.eigenvalues();
  evecs_ = es.eigenvectors();
  double lo = evals_.minCoeff();
  if (lo < kFaithfulnessFloor) {
    std::ostringstream os;
    os << "rho: not faithful, smallest eigenvalue " << lo << " below " << kFaithfulnessFloor;
    throw NonFaithfulState(os.str(), lo);
  }
  sqrt_rho_ = rho_power(0.5);
  quarter_rho_ = rho_power(0.25);
  inv_quarter_rho_ = rho_power(-0.25);
  inv_sqrt_rho_ = rho_power(-0.5);
  log_rho_ = spectral_function(evecs_, evals_, log_fn, 0.0);
}

Matrix StandardForm::rho_power(double s) const {
  if (s == 0.5 && sqrt_rho_.size()) return sqrt_rho_;
  if (s == 0.25 && quarter_rho_.size()) return quarter_rho_;
  if (s == -0.25 && inv_quarter_rho_.size()) return inv_quarter_rho_;
  if (s == -0.5 && inv_sqrt_rho_.size()) return inv_sqrt_rho_;
  return spectral_function(evecs_, evals_, pow_fn, s);
}

Matrix StandardForm::delta_power(const Matrix& x, double s) const { return rho_power(s) * x * rho_power(-s); }

double hs_norm(const Matrix& x) { return x.norm(); }

std::complex<double> hs_inner(const Matrix& x, const Matrix& y) { return (x.adjoint() * y).trace(); }

ModularHamiltonian::ModularHamiltonian(const StandardForm& sf, double beta) : beta_(beta), log_rho_(sf.log_rho()) {
  if (!(beta > 0) || !std::isfinite(beta)) throw std::invalid_argument("beta: must be positive and finite");
}

Matrix ModularHamiltonian::apply(const Matrix& x) const { return -(log_rho_ * x - x * log_rho_) / beta_; }

Matrix ModularHamiltonian::superoperator() const {
  const auto n = log_rho_.rows();
  Matrix id = Matrix::Identity(n, n);
  Matrix out(n * n, n * n);
  // vec(L X - X L) = (I (x) L - L^T (x) I) vec(X)
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b)
      for (Eigen::Index c = 0; c < n; ++c)
        for (Eigen::Index d = 0; d < n; ++d)
          out(a * n + c, b * n + d) = id(a, b) * log_rho_(c, d) - log_rho_(b, a) * id(c, d);
  return -out / beta_;
}

double lp_norm(const StandardForm& sf, const AlgebraElement& a, LpIndex p) {
  if (a.matrix.rows() != sf.dim() || a.matrix.cols() != sf.dim())
    throw std::invalid_argument("A: dimension does not match rho");
  switch (p) {
    case LpIndex::two:
      return hs_norm(a.act(sf.omega()));
    case LpIndex::four: {
      // ||Delta^{1/4} A^* A Omega||^{1/2}
      Matrix q = sf.rho_power(0.25);
      return std::sqrt(hs_norm(q * a.matrix.adjoint() * a.matrix * q));
    }
    case LpIndex::infinity: {
      Eigen::JacobiSVD<Matrix> svd(a.matrix);
      return svd.singularValues()(0);
    }
  }
  return 0.0;
}

double l4_via_positive_cone(const StandardForm& sf, const AlgebraElement& a) {
  Matrix v = a.act(sf.omega());      // A Omega
  Matrix w = a.act(sf.apply_j(v));   // A J A Omega
  return std::sqrt(hs_norm(w));
}

namespace {

struct Objective {
  Matrix x;  // A rho^{1/4}
  int n;

  double operator()(const Eigen::VectorXd& p) const {
    Matrix b(n, n);
    for (int i = 0; i < n * n; ++i) b(i % n, i / n) = {p(2 * i), p(2 * i + 1)};
    Matrix s = b * b.adjoint();
    double tr = s.trace().real();
    if (!(tr > 0)) return 0.0;
    Matrix q = psd_power(s / tr, 0.25);
    return hs_norm(q * x);
  }
};

Eigen::VectorXd fd_gradient(const Objective& f, const Eigen::VectorXd& p, double fp) {
  (void)fp;
  Eigen::VectorXd g(p.size());
  Eigen::VectorXd q = p;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    double h = 1e-6 * std::max(1.0, std::abs(p(i)));
    q(i) = p(i) + h;
    double up = f(q);
    q(i) = p(i) - h;
    double dn = f(q);
    q(i) = p(i);
    g(i) = (up - dn) / (2 * h);
  }
  return g;
}

}  // namespace

ArakiMasudaResult araki_masuda_l4(const StandardForm& sf, const AlgebraElement& a, const OptimizerBudget& budget) {
  if (a.side != Side::system) throw std::invalid_argument("A: Araki-Masuda norm is defined for system elements");
  if (budget.starts < 1 || budget.max_iterations < 1) throw std::invalid_argument("budget: starts and iterations must be positive");
  const int n = sf.dim();
  Objective f{a.matrix * sf.rho_power(0.25), n};
  std::mt19937_64 rng(budget.seed);
  std::normal_distribution<double> nd;
  const long dim = 2L * n * n;

  ArakiMasudaResult best;
  best.value = -1.0;
  for (int s = 0; s < budget.starts; ++s) {
    Eigen::VectorXd p(dim);
    for (long i = 0; i < dim; ++i) p(i) = nd(rng);
    p /= p.norm();
    double fp = f(p);
    Eigen::VectorXd g = fd_gradient(f, p, fp);
    Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(dim, dim);
    double last_change = std::numeric_limits<double>::infinity();
    int it = 0;
    bool converged = false;
    for (; it < budget.max_iterations; ++it) {
      // ascent direction
      Eigen::VectorXd d = hinv * g;
      if (d.dot(g) <= 0) {
        hinv.setIdentity();
        d = g;
      }
      double step = 1.0;
      Eigen::VectorXd pn;
      double fn = fp;
      bool accepted = false;
      for (int ls = 0; ls < 40; ++ls) {
        pn = p + step * d;
        fn = f(pn);
        if (fn >= fp + 1e-4 * step * d.dot(g)) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) {
        converged = g.norm() < 1e-6;
        break;
      }
      // the objective is scale free in B; renormalize to keep the iterate bounded
      double scale = pn.norm();
      pn /= scale;
      Eigen::VectorXd gn = fd_gradient(f, pn, fn);
      Eigen::VectorXd sv = pn - p;
      Eigen::VectorXd yv = -(gn - g);  // curvature of -f
      double sy = sv.dot(yv);
      if (sy > 1e-14) {
        double rho = 1.0 / sy;
        Eigen::MatrixXd id = Eigen::MatrixXd::Identity(dim, dim);
        hinv = (id - rho * sv * yv.transpose()) * hinv * (id - rho * yv * sv.transpose()) + rho * sv * sv.transpose();
      }
      last_change = fn - fp;
      p = pn;
      fp = fn;
      g = gn;
      if (last_change < 1e-15 * std::max(1.0, fp) && g.norm() < 1e-7) {
        converged = true;
        ++it;
        break;
      }
    }
    if (fp > best.value) {
      best.value = fp;
      best.gap = std::abs(last_change == std::numeric_limits<double>::infinity() ? 0.0 : last_change) + g.squaredNorm();
      best.converged = converged;
    }
    best.iterations += it;
  }
  return best;
}

CommutantBound commutant_l4_bound(const StandardForm& sf, const AlgebraElement& tp, const AlgebraElement& a) {
  if (tp.side != Side::commutant) throw std::invalid_argument("T': must be a commutant element");
  if (a.side != Side::system) throw std::invalid_argument("A: must be a system element");
  Matrix ao = a.act(sf.omega());
  CommutantBound out;
  out.lhs = std::abs(hs_inner(ao, tp.act(ao)));
  // Delta^{-1/4} T' Omega = rho^{-1/4} rho^{1/2} T rho^{1/4}
  out.constant = hs_norm(sf.delta_power(tp.act(sf.omega()), -0.25));
  double l4 = lp_norm(sf, a, LpIndex::four);
  out.rhs = out.constant * l4 * l4;
  return out;
}

PassivityResult passivity_gap(const StandardForm& sf, const ModularHamiltonian& mh, const AlgebraElement& a) {
  if (a.side != Side::system) throw std::invalid_argument("A: must be a system element");
  Matrix ao = a.act(sf.omega());
  Matrix aso = a.matrix.adjoint() * sf.omega();
  PassivityResult out;
  out.form_value = mh.beta() * hs_inner(ao, mh.apply(ao)).real();
  out.gap = out.form_value - (ao.squaredNorm() - aso.squaredNorm());
  return out;
}

Matrix gibbs_state(double beta, double omega, int d) {
  if (d < 1) throw std::invalid_argument("d: truncation must be at least 1");
  if (!(beta > 0) || !(omega > 0)) throw std::invalid_argument("beta, omega: must be positive");
  Matrix rho = Matrix::Zero(d, d);
  double z = 0.0;
  for (int k = 0; k < d; ++k) z += std::exp(-beta * omega * k);
  for (int k = 0; k < d; ++k) rho(k, k) = std::exp(-beta * omega * k) / z;
  return rho;
}

Matrix lowering(int d) {
  Matrix a = Matrix::Zero(d, d);
  for (int k = 1; k < d; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  return a;
}

Matrix random_matrix(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = {nd(rng), nd(rng)};
  return m / std::sqrt(2.0 * n);
}

Matrix random_hermitian(int n, std::mt19937_64& rng) {
  Matrix m = random_matrix(n, rng);
  return 0.5 * (m + m.adjoint());
}

Matrix random_density(int n, std::mt19937_64& rng) {
  Matrix g = random_matrix(n, rng);
  Matrix r = g * g.adjoint();
  r = 0.5 * (r + r.adjoint());
  r /= r.trace().real();
  // keep the draw comfortably faithful
  r = 0.95 * r + 0.05 * Matrix::Identity(n, n) / n;
  return r;
}

Matrix random_unitary(int n, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(n, rng));
  return qr.householderQ() * Matrix::Identity(n, n);
}

std::vector<PropertyRow> run_property_suite(const SuiteOptions& opts) {
  std::vector<PropertyRow> rows;
  std::mt19937_64 rng(opts.seed);
  auto add = [&](std::string name, int n, int draws, double slack, double thr) {
    rows.push_back({std::move(name), n, draws, slack, thr, slack >= thr});
  };
  for (int n : opts.dims) {
    double tri = std::numeric_limits<double>::infinity();
    double chain = tri, jaj = tri, defin = tri;
    for (int k = 0; k < opts.pair_draws; ++k) {
      StandardForm sf(random_density(n, rng));
      AlgebraElement a{random_matrix(n, rng)}, b{random_matrix(n, rng)};
      // every other pair is nearly parallel, where the triangle inequality is tight
      if (k % 2) b.matrix = 0.5 * a.matrix + 1e-3 * b.matrix;
      AlgebraElement ab{a.matrix + b.matrix};
      double na = lp_norm(sf, a, LpIndex::four), nb = lp_norm(sf, b, LpIndex::four);
      tri = std::min(tri, na + nb - lp_norm(sf, ab, LpIndex::four));
      double n2 = lp_norm(sf, a, LpIndex::two), ninf = lp_norm(sf, a, LpIndex::infinity);
      chain = std::min({chain, na - n2, ninf - na});
      jaj = std::min(jaj, -std::abs(na * na - std::pow(l4_via_positive_cone(sf, a), 2)));
      // homogeneity and definiteness
      std::complex<double> z{0.3, -1.7};
      double hom = std::abs(lp_norm(sf, AlgebraElement{z * a.matrix}, LpIndex::four) - std::abs(z) * na);
      double zero = lp_norm(sf, AlgebraElement{Matrix::Zero(n, n)}, LpIndex::four);
      defin = std::min(defin, -(hom + zero) + (na > 0 ? 0.0 : -1.0));
    }
    add("l4-triangle", n, opts.pair_draws, tri, -1e-10);
    add("l2-l4-linf-chain", n, opts.pair_draws, chain, -1e-12);
    add("l4-homogeneity-definiteness", n, opts.pair_draws, defin, -1e-12);
    add("jaj-identity", n, opts.pair_draws, jaj, -1e-10);
  }
  for (int n : opts.dims) {
    if (n > opts.araki_masuda_max_dim) continue;
    double worst = std::numeric_limits<double>::infinity();
    for (int s = 0; s < opts.araki_masuda_seeds; ++s) {
      StandardForm sf(random_density(n, rng));
      AlgebraElement a{random_matrix(n, rng)};
      auto am = araki_masuda_l4(sf, a, OptimizerBudget{8, 400, opts.seed * 1000 + s});
      worst = std::min(worst, -std::abs(am.value - lp_norm(sf, a, LpIndex::four)));
    }
    add("araki-masuda-sup", n, opts.araki_masuda_seeds, worst, -1e-5);
  }
  {
    const int n = 4;
    double worst = std::numeric_limits<double>::infinity();
    for (int k = 0; k < opts.bound_draws; ++k) {
      StandardForm sf(random_density(n, rng));
      AlgebraElement a{random_matrix(n, rng)};
      AlgebraElement tp{random_matrix(n, rng), Side::commutant};
      auto cb = commutant_l4_bound(sf, tp, a);
      worst = std::min(worst, cb.rhs - cb.lhs);
    }
    add("commutant-l4-bound", n, opts.bound_draws, worst, 0.0);
  }
  {
    const int n = 4;
    double herm = std::numeric_limits<double>::infinity(), gen = herm;
    for (int k = 0; k < opts.bound_draws; ++k) {
      StandardForm sf(random_density(n, rng));
      std::uniform_real_distribution<double> ub(0.2, 5.0);
      ModularHamiltonian mh(sf, ub(rng));
      auto ph = passivity_gap(sf, mh, AlgebraElement{random_hermitian(n, rng)});
      herm = std::min(herm, ph.form_value / mh.beta());
      auto pg = passivity_gap(sf, mh, AlgebraElement{random_matrix(n, rng)});
      gen = std::min(gen, pg.gap / mh.beta());
    }
    add("passivity-hermitian", n, opts.bound_draws, herm, -1e-10);
    add("passivity-general", n, opts.bound_draws, gen, -1e-10);
  }
  return rows;
}

std::string property_rows_csv(const std::vector<PropertyRow>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "property,dim,draws,min_slack,threshold,passed\n";
  for (const auto& r : rows)
    os << r.property << ',' << r.dim << ',' << r.draws << ',' << r.min_slack << ',' << r.threshold << ','
       << (r.passed ? "true" : "false") << '\n';
  return os.str();
}

void to_json(nlohmann::json& j, const StandardForm& sf) {
  nlohmann::json rho = nlohmann::json::array();
  for (int i = 0; i < sf.dim(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int k = 0; k < sf.dim(); ++k) row.push_back({sf.rho()(i, k).real(), sf.rho()(i, k).imag()});
    rho.push_back(row);
  }
  j = nlohmann::json{{"dim", sf.dim()}, {"rho", rho}};
}

StandardForm standard_form_from_json(const nlohmann::json& j) {
  if (!j.contains("rho")) throw std::invalid_argument("rho: missing");
  const auto& rj = j.at("rho");
  const int n = static_cast<int>(rj.size());
  Matrix rho(n, n);
  for (int i = 0; i < n; ++i) {
    if (rj[i].size() != static_cast<std::size_t>(n)) throw std::invalid_argument("rho: rows must have equal length");
    for (int k = 0; k < n; ++k) {
      const auto& e = rj[i][k];
      rho(i, k) = e.is_array() ? std::complex<double>(e.at(0).get<double>(), e.at(1).get<double>())
                               : std::complex<double>(e.get<double>(), 0.0);
    }
  }
  return StandardForm(rho);
}

}  // namespace qlp::modlp
