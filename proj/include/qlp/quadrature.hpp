#pragma once

// Deterministic quadrature engines: Gauss-Legendre tensor rules, refinement-driven
// adaptive tensor rules and randomly shifted Halton quasi-Monte-Carlo. All
// reductions use pairwise summation over a fixed node ordering, so a given spec
// reproduces its result bit-for-bit.

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qlp {

using cplx = std::complex<double>;

/// Raised when a quadrature cannot reach its target tolerance. Carries the best
/// available estimate so callers can still report it.
class ToleranceNotMet : public std::runtime_error {
 public:
  ToleranceNotMet(const std::string& what, double best, double achieved_error)
      : std::runtime_error(what), best_(best), achieved_(achieved_error) {}
  double best() const { return best_; }
  double achieved_error() const { return achieved_; }

 private:
  double best_;
  double achieved_;
};

struct Rule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::size_t size() const { return nodes.size(); }
};

/// n-point Gauss-Legendre rule on [-1, 1]; cached per n.
const Rule1D& gauss_legendre(int n);

/// Composite Gauss-Legendre rule on [a, b] with equal panels.
Rule1D composite_gauss(double a, double b, int panels, int order = 8);

/// Composite rule over consecutive breakpoints; each interval gets `per_interval`
/// panels of the given order.
Rule1D composite_gauss(std::span<const double> breaks, int per_interval, int order = 8);

double pairwise_sum(std::span<const double> values);
cplx pairwise_sum(std::span<const cplx> values);

enum class Scheme { tensor_gauss, adaptive, quasi_monte_carlo };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

struct QuadratureSpec {
  Scheme scheme = Scheme::tensor_gauss;
  /// Points per axis (tensor/adaptive) or sample count (QMC).
  long points = 32;
  double target_rel_tol = 1e-8;
  /// Half-width of the integration box [-cutoff, cutoff]^d when no explicit
  /// bounds are supplied.
  double cutoff = 10.0;
  std::vector<double> lower;
  std::vector<double> upper;
  std::uint64_t seed = 20240611;
  int qmc_shifts = 8;

  /// Throws std::invalid_argument on a violated invariant.
  void validate() const;
  /// Same spec with twice the resolution.
  QuadratureSpec refined() const;
};

struct IntegrationResult {
  double value = 0.0;
  double error = 0.0;
  long evaluations = 0;
};

using Kernel = std::function<double(std::span<const double>)>;

/// Integrates `kernel` over the d-dimensional box described by `spec`.
IntegrationResult integrate(const Kernel& kernel, int dim, const QuadratureSpec& spec);

/// 4*pi * int_0^rmax r^2 f(r) dr with a composite Gauss rule of `points` nodes.
IntegrationResult integrate_radial(const std::function<double(double)>& f, double rmax,
                                   const QuadratureSpec& spec);

/// Halton point `index` (0-based, skipping the origin) in `dim` dimensions.
void halton_point(std::uint64_t index, int dim, std::span<double> out);

}  // namespace qlp
