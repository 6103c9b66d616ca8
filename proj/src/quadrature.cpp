#include "qlp/quadrature.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <random>

namespace qlp {

namespace {

Rule1D compute_gauss_legendre(int n) {
  Rule1D r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0, p1 = 0.0;
    for (int j = 0; j < n; ++j) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    r.nodes[i] = -z;
    r.nodes[n - 1 - i] = z;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  return r;
}

double radical_inverse(std::uint64_t i, unsigned base) {
  double inv = 1.0 / base, f = inv, result = 0.0;
  while (i > 0) {
    result += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return result;
}

constexpr unsigned kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

struct Box {
  std::vector<double> lo, hi;
};

Box box_of(const QuadratureSpec& spec, int dim) {
  Box b;
  if (!spec.lower.empty()) {
    if (static_cast<int>(spec.lower.size()) != dim || static_cast<int>(spec.upper.size()) != dim)
      throw std::invalid_argument("QuadratureSpec bounds do not match dimension");
    b.lo = spec.lower;
    b.hi = spec.upper;
  } else {
    b.lo.assign(dim, -spec.cutoff);
    b.hi.assign(dim, spec.cutoff);
  }
  return b;
}

struct TensorSums {
  double value = 0.0;
  double l1 = 0.0;
  long evals = 0;
};

TensorSums tensor_sum(const Kernel& kernel, int dim, const Box& box, int n) {
  const Rule1D& gl = gauss_legendre(n);
  std::vector<std::vector<double>> x(dim), w(dim);
  for (int d = 0; d < dim; ++d) {
    const double half = 0.5 * (box.hi[d] - box.lo[d]);
    const double mid = 0.5 * (box.hi[d] + box.lo[d]);
    for (int i = 0; i < n; ++i) {
      x[d].push_back(mid + half * gl.nodes[i]);
      w[d].push_back(half * gl.weights[i]);
    }
  }
  long outer = 1;
  for (int d = 0; d + 1 < dim; ++d) outer *= n;
  std::vector<double> rows(outer), rows_abs(outer), row(n), row_abs(n);
  std::vector<int> idx(dim, 0);
  std::vector<double> pt(dim);
  for (long o = 0; o < outer; ++o) {
    long rem = o;
    double wo = 1.0;
    for (int d = dim - 2; d >= 0; --d) {
      idx[d] = static_cast<int>(rem % n);
      rem /= n;
      pt[d] = x[d][idx[d]];
      wo *= w[d][idx[d]];
    }
    for (int i = 0; i < n; ++i) {
      pt[dim - 1] = x[dim - 1][i];
      const double v = kernel(pt) * w[dim - 1][i];
      row[i] = v;
      row_abs[i] = std::abs(v);
    }
    rows[o] = wo * pairwise_sum(row);
    rows_abs[o] = wo * pairwise_sum(row_abs);
  }
  return {pairwise_sum(rows), pairwise_sum(rows_abs), outer * n};
}

double scale_of(double value, double l1) { return std::max(std::abs(value), 1e-3 * l1); }

}  // namespace

const Rule1D& gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
  static std::mutex mu;
  static std::map<int, Rule1D> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
  return it->second;
}

Rule1D composite_gauss(double a, double b, int panels, int order) {
  const Rule1D& gl = gauss_legendre(order);
  Rule1D r;
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    for (int i = 0; i < order; ++i) {
      r.nodes.push_back(lo + 0.5 * h * (gl.nodes[i] + 1.0));
      r.weights.push_back(0.5 * h * gl.weights[i]);
    }
  }
  return r;
}

Rule1D composite_gauss(std::span<const double> breaks, int per_interval, int order) {
  Rule1D r;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (!(breaks[i + 1] > breaks[i])) continue;
    Rule1D part = composite_gauss(breaks[i], breaks[i + 1], per_interval, order);
    r.nodes.insert(r.nodes.end(), part.nodes.begin(), part.nodes.end());
    r.weights.insert(r.weights.end(), part.weights.begin(), part.weights.end());
  }
  return r;
}

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 16) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t h = v.size() / 2;
  return pairwise_sum(v.first(h)) + pairwise_sum(v.subspan(h));
}

cplx pairwise_sum(std::span<const cplx> v) {
  if (v.size() <= 16) {
    cplx s = 0.0;
    for (const cplx& x : v) s += x;
    return s;
  }
  const std::size_t h = v.size() / 2;
  return pairwise_sum(v.first(h)) + pairwise_sum(v.subspan(h));
}

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::tensor_gauss: return "tensor-gauss";
    case Scheme::adaptive: return "adaptive";
    case Scheme::quasi_monte_carlo: return "quasi-monte-carlo";
  }
  return "?";
}

Scheme scheme_from_string(const std::string& s) {
  if (s == "tensor-gauss") return Scheme::tensor_gauss;
  if (s == "adaptive") return Scheme::adaptive;
  if (s == "quasi-monte-carlo") return Scheme::quasi_monte_carlo;
  throw std::invalid_argument("unknown quadrature scheme '" + s + "'");
}

void QuadratureSpec::validate() const {
  if (!(target_rel_tol > 0.0 && target_rel_tol < 0.5))
    throw std::invalid_argument("QuadratureSpec.target_rel_tol must lie in (0, 0.5)");
  if (!(cutoff > 0.0) || !std::isfinite(cutoff))
    throw std::invalid_argument("QuadratureSpec.cutoff must be positive and finite");
  if (points < 1) throw std::invalid_argument("QuadratureSpec.points must be positive");
  if (lower.size() != upper.size())
    throw std::invalid_argument("QuadratureSpec.lower/upper size mismatch");
  for (std::size_t i = 0; i < lower.size(); ++i)
    if (!(upper[i] > lower[i]) || !std::isfinite(lower[i]) || !std::isfinite(upper[i]))
      throw std::invalid_argument("QuadratureSpec bounds must be finite with upper > lower");
}

QuadratureSpec QuadratureSpec::refined() const {
  QuadratureSpec r = *this;
  r.points *= 2;
  return r;
}

void halton_point(std::uint64_t index, int dim, std::span<double> out) {
  if (dim > static_cast<int>(std::size(kPrimes)))
    throw std::invalid_argument("halton_point: dimension too large");
  for (int d = 0; d < dim; ++d) out[d] = radical_inverse(index + 1, kPrimes[d]);
}

IntegrationResult integrate(const Kernel& kernel, int dim, const QuadratureSpec& spec) {
  spec.validate();
  if (dim < 1) throw std::invalid_argument("integrate: dimension must be positive");
  const Box box = box_of(spec, dim);

  switch (spec.scheme) {
    case Scheme::tensor_gauss: {
      const int n = static_cast<int>(spec.points);
      const TensorSums fine = tensor_sum(kernel, dim, box, n);
      const TensorSums coarse = tensor_sum(kernel, dim, box, std::max(1, n / 2));
      IntegrationResult r{fine.value, std::abs(fine.value - coarse.value), fine.evals + coarse.evals};
      if (r.error > spec.target_rel_tol * scale_of(fine.value, fine.l1))
        throw ToleranceNotMet("tensor-gauss quadrature did not reach target tolerance", r.value, r.error);
      return r;
    }
    case Scheme::adaptive: {
      int n = static_cast<int>(std::max<long>(2, spec.points));
      TensorSums prev = tensor_sum(kernel, dim, box, n);
      long evals = prev.evals;
      const double budget = 1.5e8;
      while (true) {
        const int n2 = 2 * n;
        if (std::pow(static_cast<double>(n2), dim) > budget)
          throw ToleranceNotMet("adaptive quadrature exhausted its evaluation budget", prev.value,
                                std::numeric_limits<double>::infinity());
        TensorSums next = tensor_sum(kernel, dim, box, n2);
        evals += next.evals;
        const double err = std::abs(next.value - prev.value);
        if (err <= spec.target_rel_tol * scale_of(next.value, next.l1))
          return {next.value, err, evals};
        prev = next;
        n = n2;
      }
    }
    case Scheme::quasi_monte_carlo: {
      const int shifts = std::max(2, spec.qmc_shifts);
      const long per_shift = std::max<long>(1, spec.points / shifts);
      std::mt19937_64 rng(spec.seed);
      std::uniform_real_distribution<double> uni(0.0, 1.0);
      std::vector<double> estimates(shifts), estimates_abs(shifts);
      std::vector<double> u(dim), pt(dim), vals(per_shift), vals_abs(per_shift), shift(dim);
      double volume = 1.0;
      for (int d = 0; d < dim; ++d) volume *= box.hi[d] - box.lo[d];
      for (int s = 0; s < shifts; ++s) {
        for (int d = 0; d < dim; ++d) shift[d] = uni(rng);
        for (long i = 0; i < per_shift; ++i) {
          halton_point(static_cast<std::uint64_t>(i), dim, u);
          for (int d = 0; d < dim; ++d) {
            double t = u[d] + shift[d];
            t -= std::floor(t);
            pt[d] = box.lo[d] + (box.hi[d] - box.lo[d]) * t;
          }
          vals[i] = kernel(pt);
          vals_abs[i] = std::abs(vals[i]);
        }
        estimates[s] = volume * pairwise_sum(vals) / static_cast<double>(per_shift);
        estimates_abs[s] = volume * pairwise_sum(vals_abs) / static_cast<double>(per_shift);
      }
      const double mean = pairwise_sum(estimates) / shifts;
      double var = 0.0;
      for (double e : estimates) var += (e - mean) * (e - mean);
      var /= (shifts - 1);
      IntegrationResult r{mean, std::sqrt(var / shifts), per_shift * shifts};
      const double l1 = pairwise_sum(estimates_abs) / shifts;
      if (r.error > spec.target_rel_tol * scale_of(mean, l1))
        throw ToleranceNotMet("quasi-Monte-Carlo integration did not reach target tolerance", r.value,
                              r.error);
      return r;
    }
  }
  throw std::logic_error("unreachable");
}

IntegrationResult integrate_radial(const std::function<double(double)>& f, double rmax,
                                   const QuadratureSpec& spec) {
  spec.validate();
  const int panels = std::max<int>(1, static_cast<int>(spec.points / 8));
  auto sum_with = [&](int p) {
    Rule1D rule = composite_gauss(0.0, rmax, p, 8);
    std::vector<double> v(rule.size()), va(rule.size());
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const double r = rule.nodes[i];
      v[i] = rule.weights[i] * r * r * f(r);
      va[i] = std::abs(v[i]);
    }
    return std::pair{4.0 * std::numbers::pi * pairwise_sum(v), 4.0 * std::numbers::pi * pairwise_sum(va)};
  };
  const auto [fine, l1] = sum_with(panels);
  const auto coarse = sum_with(std::max(1, panels / 2)).first;
  IntegrationResult r{fine, std::abs(fine - coarse), static_cast<long>(12 * panels)};
  if (r.error > spec.target_rel_tol * scale_of(fine, l1))
    throw ToleranceNotMet("radial quadrature did not reach target tolerance", r.value, r.error);
  return r;
}

}  // namespace qlp
