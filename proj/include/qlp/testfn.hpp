#pragma once

// Test functions on Minkowski space and their Fourier transforms.
//
// Conventions (fixed for the whole library):
//   signature (+,-,-,-), q.x = q0 x0 - q.x,
//   ghat(q) = int g(x) exp(i q.x) d^4x.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qlp/quadrature.hpp"

namespace qlp {

using Vec4 = std::array<double, 4>;

double minkowski_dot(const Vec4& a, const Vec4& b);

enum class PacketKind { gaussian, bump_product, momentum_window };

std::string to_string(PacketKind k);
PacketKind packet_kind_from_string(const std::string& s);

/// Smooth compactly supported cutoff on the frequency axis, supported in [lower, upper].
struct FrequencyWindow {
  double lower = -2.0;
  double upper = -1.0;
};

/// A test function.
///
/// * gaussian:         A exp(-sum_mu (x_mu - c_mu)^2 / (2 w_mu^2))
/// * bump-product:     A prod_mu b((x_mu - c_mu) / w_mu), b(t) = exp(-1/(1-t^2)) on |t|<1.
///                     Since b = (exp(-1/(2(1-t^2))))^2 every such packet is the square
///                     of a smooth compactly supported real function.
/// * momentum-window:  defined on the Fourier side only,
///                     ghat(q) = A W(q0) exp(-sum_i w_i^2 q_i^2 / 2) exp(i q.c),
///                     W a smooth bump on [window.lower, window.upper] with W(mid)=1.
///                     widths[0] is unused for this kind.
struct PacketSpec {
  PacketKind kind = PacketKind::gaussian;
  Vec4 center{0, 0, 0, 0};
  Vec4 widths{1, 1, 1, 1};
  std::optional<FrequencyWindow> window;
  double amplitude = 1.0;

  void validate() const;
  bool has_position_form() const { return kind != PacketKind::momentum_window; }
  /// Equal spatial widths: the transform depends on the spatial momentum only
  /// through its modulus (after removing the center phase).
  bool spatially_isotropic() const;
};

/// Position-space value; throws for momentum-window packets.
double evaluate(const PacketSpec& p, const Vec4& x);

/// ghat(q) = int p(x) e^{i q.x} d^4x.
cplx fourier_transform(const PacketSpec& p, const Vec4& q);

/// int x^mu p(x) e^{i q.x} d^4x for one coordinate index mu (contravariant,
/// so mu=1 weights by x^1). Position-space kinds only.
cplx fourier_transform_moment(const PacketSpec& p, const Vec4& q, int mu);

/// Transform with the center phase removed, for spatially isotropic packets:
/// ghat(q) = exp(i q.c) * centered_transform(p, q0, |q|).
cplx centered_transform(const PacketSpec& p, double q0, double qmag);

/// x -> lambda^3 p(lambda (x - a)). Fourier side: lambda^{-1} phat(k/lambda) e^{i k.a}.
PacketSpec scale_translate(const PacketSpec& p, double lambda, const Vec4& a);

/// Support box (position kinds): bump-product exact, gaussian truncated at `nsigma`.
std::array<std::array<double, 2>, 4> support_box(const PacketSpec& p, double nsigma = 8.0);

/// 1D building block: int_{-1}^{1} t^moment b(t) e^{i s t} dt.
cplx bump_transform_1d(double s, int moment = 0);

struct FourierTable {
  struct Axis {
    double start = 0.0;
    double step = 1.0;
    int count = 1;
  };
  std::array<Axis, 4> grid;
  std::vector<cplx> values;  // row-major, axis 3 fastest
  std::string provenance;    // "closed-form" | "quadrature"
  std::string metric = "(+,-,-,-);exp(+i q.x)";

  Vec4 node(std::size_t flat) const;
  std::string to_csv() const;
};

FourierTable tabulate(const PacketSpec& p, const std::array<FourierTable::Axis, 4>& grid);

void to_json(nlohmann::json& j, const PacketSpec& p);
void from_json(const nlohmann::json& j, PacketSpec& p);
void to_json(nlohmann::json& j, const QuadratureSpec& q);
void from_json(const nlohmann::json& j, QuadratureSpec& q);

}  // namespace qlp
