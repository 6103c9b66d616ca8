#include "qlp/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace qlp {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> qei_columns(bool with_wedge) {
  std::vector<std::string> c{"lambda", "n2", "l4proxy", "l4exact", "h", "bath", "ell", "ratio", "h_window",
                             "bath_window", "adjoint_n2", "channel", "err_n2", "err_h", "err_bath", "err_ell",
                             "err_channel"};
  if (with_wedge) c.push_back("wedge");
  return c;
}

namespace {

std::vector<double> values(const QeiReport& r) {
  return {r.lambda,   r.l2_norm_sq,  r.l4_proxy,        r.l4_exact, r.h_expect, r.bath_expect,
          r.ell_expect, r.ratio,     r.h_window,        r.bath_window, r.adjoint_norm_sq, r.channel,
          r.err_n2,   r.err_h,       r.err_bath,        r.err_ell,  r.err_channel};
}

}  // namespace

std::string to_csv(const std::vector<QeiReport>& rows) {
  const bool wedge = !rows.empty() && rows.front().wedge.has_value();
  std::ostringstream os;
  const auto cols = qei_columns(wedge);
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const auto& r : rows) {
    const auto v = values(r);
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << format_number(v[i]);
    if (wedge) os << ',' << (r.wedge.value_or(false) ? "true" : "false");
    os << '\n';
  }
  return os.str();
}

nlohmann::json to_json_rows(const std::vector<QeiReport>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    const bool wedge = r.wedge.has_value();
    const auto cols = qei_columns(wedge);
    const auto v = values(r);
    nlohmann::json row;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (std::isfinite(v[i])) row[cols[i]] = v[i];
      else row[cols[i]] = nullptr;
    }
    if (wedge) row["wedge"] = *r.wedge;
    out.push_back(row);
  }
  return out;
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

CsvTable read_csv(const std::string& text) {
  CsvTable t;
  std::istringstream is(text);
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      t.rows.push_back(std::move(cells));
    }
  }
  return t;
}

}  // namespace qlp
