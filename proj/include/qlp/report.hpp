#pragma once

// Scan reports shared by the thermal and wedge engines, and their CSV/JSON forms.

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace qlp {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct QeiReport {
  double lambda = 1.0;
  double l2_norm_sq = 0.0;
  double l4_proxy = kNaN;  ///< sqrt(6) N^2; NaN when the proxy does not apply
  double l4_exact = kNaN;  ///< ||psi||_4^2 from Wick contractions, when computed
  double h_expect = 0.0;
  double bath_expect = 0.0;
  double ell_expect = 0.0;
  double ratio = kNaN;     ///< h_expect / l4_proxy (wedge scans: channel / l4_proxy)
  double h_window = kNaN;  ///< h restricted to the x0 window [-R, R]
  double bath_window = kNaN;
  double adjoint_norm_sq = kNaN;  ///< ||phi(g)^* Omega||^2
  double channel = kNaN;          ///< isolated channel (wedge scans)
  double err_n2 = 0.0;
  double err_h = 0.0;
  double err_bath = 0.0;
  double err_ell = 0.0;
  double err_channel = 0.0;
  std::optional<bool> wedge;      ///< wedge-support flag (wedge scans only)
};

std::vector<std::string> qei_columns(bool with_wedge);
std::string to_csv(const std::vector<QeiReport>& rows);
nlohmann::json to_json_rows(const std::vector<QeiReport>& rows);

/// Minimal CSV reader for report files: header row plus numeric/boolean cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  int column(const std::string& name) const;  ///< -1 if absent
};

CsvTable read_csv(const std::string& text);

/// Formats a double with round-trip precision; NaN as "nan".
std::string format_number(double v);

}  // namespace qlp
