#include "qlp/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "qlp/report.hpp"
#include "qlp/thermal.hpp"

namespace qlp::cli {

namespace {

const std::vector<std::pair<ExperimentId, std::string>>& id_names() {
  static const std::vector<std::pair<ExperimentId, std::string>> names{
      {ExperimentId::modlp_verify, "modlp-verify"},     {ExperimentId::thermal_l4, "thermal-l4"},
      {ExperimentId::thermal_l2, "thermal-l2"},         {ExperimentId::liouville_check, "liouville-check"},
      {ExperimentId::rindler_equiv, "rindler-equiv"},   {ExperimentId::rindler_l4, "rindler-l4"},
      {ExperimentId::rindler_l2, "rindler-l2"},         {ExperimentId::qei_bound, "qei-bound"},
      {ExperimentId::purification, "purification"},
  };
  return names;
}

bool needs_ladder(ExperimentId id) {
  switch (id) {
    case ExperimentId::thermal_l4:
    case ExperimentId::thermal_l2:
    case ExperimentId::rindler_l4:
    case ExperimentId::rindler_l2:
      return true;
    default:
      return false;
  }
}

const PacketSpec& require_packet(const ExperimentConfig& c, const std::string& name) {
  auto it = c.packets.find(name);
  if (it == c.packets.end()) throw ValidationError("packets." + name, "required by " + to_string(c.experiment));
  return it->second;
}

void require_position(const PacketSpec& p, const std::string& field) {
  if (!p.has_position_form()) throw ValidationError(field, "needs a position-space packet kind");
}

double number_field(const nlohmann::json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (v.is_string() && (v.get<std::string>() == "inf" || v.get<std::string>() == "infinity"))
    return std::numeric_limits<double>::infinity();
  if (!v.is_number()) throw ValidationError(key, "expected a number");
  return v.get<double>();
}

}  // namespace

std::string to_string(ExperimentId id) {
  for (const auto& [k, s] : id_names())
    if (k == id) return s;
  return "unknown";
}

ExperimentId experiment_from_string(const std::string& s) {
  for (const auto& [k, n] : id_names())
    if (n == s) return k;
  std::string known;
  for (const auto& [k, n] : id_names()) known += (known.empty() ? "" : ", ") + n;
  throw ValidationError("experiment", "unknown id '" + s + "' (known: " + known + ")");
}

const std::vector<ExperimentId>& all_experiments() {
  static const std::vector<ExperimentId> ids = [] {
    std::vector<ExperimentId> v;
    for (const auto& [k, s] : id_names()) v.push_back(k);
    return v;
  }();
  return ids;
}

double ExperimentConfig::param(const std::string& key, double fallback) const {
  if (!params.contains(key)) return fallback;
  const auto& v = params.at(key);
  if (!v.is_number()) throw ValidationError("params." + key, "expected a number");
  return v.get<double>();
}

std::vector<double> ExperimentConfig::param_list(const std::string& key, const std::vector<double>& fallback) const {
  if (!params.contains(key)) return fallback;
  const auto& v = params.at(key);
  if (!v.is_array()) throw ValidationError("params." + key, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw ValidationError("params." + key + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

void ExperimentConfig::validate() const {
  if (schema_version != kSchemaVersion)
    throw ValidationError("schema_version", "expected " + std::to_string(kSchemaVersion));
  if (!(beta > 0.0)) throw ValidationError("beta", "must be positive (or \"inf\" for the vacuum)");
  if (!(mass > 0.0) || !std::isfinite(mass)) throw ValidationError("mass", "must be positive and finite");
  if (output.dir.empty()) throw ValidationError("output.dir", "must not be empty");
  try {
    quadrature.validate();
  } catch (const std::invalid_argument& e) {
    throw ValidationError("quadrature", e.what());
  }
  if (needs_ladder(experiment)) {
    if (lambdas.empty()) throw ValidationError("lambdas", "required by " + to_string(experiment));
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      const std::string f = "lambdas[" + std::to_string(i) + "]";
      if (!(lambdas[i] > 0.0) || !std::isfinite(lambdas[i])) throw ValidationError(f, "must be positive");
      if (i > 0 && !(lambdas[i] > lambdas[i - 1])) throw ValidationError(f, "ladder must be strictly increasing");
    }
  }
  switch (experiment) {
    case ExperimentId::thermal_l4: {
      const auto& chi = require_packet(*this, "chi");
      require_position(chi, "packets.chi");
      if (chi.kind != PacketKind::gaussian || !chi.spatially_isotropic())
        throw ValidationError("packets.chi.kind", "thermal-l4 needs a spatially isotropic gaussian chi");
      require_position(require_packet(*this, "f"), "packets.f");
      if (!std::isfinite(beta)) throw ValidationError("beta", "thermal-l4 needs a finite temperature");
      break;
    }
    case ExperimentId::thermal_l2: {
      const auto& chi = require_packet(*this, "chi");
      if (chi.kind != PacketKind::momentum_window)
        throw ValidationError("packets.chi.kind", "thermal-l2 requires a momentum-window packet");
      if (!chi.window || !(chi.window->upper < 0.0))
        throw ValidationError("packets.chi.window.upper", "thermal-l2 needs a negative-frequency window");
      require_position(require_packet(*this, "f"), "packets.f");
      if (!std::isfinite(beta)) throw ValidationError("beta", "thermal-l2 needs a finite temperature");
      break;
    }
    case ExperimentId::rindler_l4:
    case ExperimentId::rindler_l2: {
      const auto& chi = require_packet(*this, "chi");
      if (chi.kind != PacketKind::gaussian || !chi.spatially_isotropic())
        throw ValidationError("packets.chi.kind", "needs a spatially isotropic gaussian chi");
      const auto& f = require_packet(*this, "f");
      require_position(f, "packets.f");
      if (!(f.center[1] > std::abs(f.center[0])))
        throw ValidationError("packets.f.center", "must lie in the right wedge x1 > |x0|");
      if (!(param("offset", 2.0) > 0.0)) throw ValidationError("params.offset", "must be positive");
      break;
    }
    case ExperimentId::liouville_check:
    case ExperimentId::purification:
      if (!std::isfinite(beta)) throw ValidationError("beta", "needs a finite temperature");
      break;
    default:
      break;
  }
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("<root>", "config must be a JSON object");
  static const std::set<std::string> known{"schema_version", "experiment", "beta", "mass", "packets", "lambdas",
                                           "quadrature", "seed", "output", "params"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw ValidationError(k, "unknown field");
  if (!j.contains("experiment")) throw ValidationError("experiment", "missing");
  if (!j.at("experiment").is_string()) throw ValidationError("experiment", "expected a string");
  ExperimentConfig c = default_config(experiment_from_string(j.at("experiment").get<std::string>()));
  try {
    if (j.contains("schema_version")) c.schema_version = j.at("schema_version").get<int>();
    if (j.contains("beta")) c.beta = number_field(j, "beta");
    if (j.contains("mass")) c.mass = number_field(j, "mass");
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("<root>", e.what());
  }
  if (j.contains("packets")) {
    const auto& pj = j.at("packets");
    if (!pj.is_object()) throw ValidationError("packets", "expected an object of named packets");
    c.packets.clear();
    for (const auto& [name, spec] : pj.items()) {
      try {
        c.packets[name] = spec.get<PacketSpec>();
      } catch (const std::exception& e) {
        throw ValidationError("packets." + name, e.what());
      }
    }
  }
  if (j.contains("lambdas")) {
    const auto& lj = j.at("lambdas");
    if (!lj.is_array()) throw ValidationError("lambdas", "expected an array");
    c.lambdas.clear();
    for (std::size_t i = 0; i < lj.size(); ++i) {
      if (!lj[i].is_number()) throw ValidationError("lambdas[" + std::to_string(i) + "]", "expected a number");
      c.lambdas.push_back(lj[i].get<double>());
    }
  }
  if (j.contains("quadrature")) {
    try {
      c.quadrature = j.at("quadrature").get<QuadratureSpec>();
    } catch (const std::exception& e) {
      throw ValidationError("quadrature", e.what());
    }
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw ValidationError("seed", "expected a non-negative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("output")) {
    const auto& oj = j.at("output");
    if (!oj.is_object()) throw ValidationError("output", "expected an object");
    for (const auto& [k, v] : oj.items()) {
      if (k != "dir" && k != "prefix") throw ValidationError("output." + k, "unknown field");
      if (!v.is_string()) throw ValidationError("output." + k, "expected a string");
    }
    if (oj.contains("dir")) c.output.dir = oj.at("dir").get<std::string>();
    if (oj.contains("prefix")) c.output.prefix = oj.at("prefix").get<std::string>();
  }
  if (j.contains("params")) {
    if (!j.at("params").is_object()) throw ValidationError("params", "expected an object");
    for (const auto& [k, v] : j.at("params").items()) c.params[k] = v;
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["schema_version"] = c.schema_version;
  j["experiment"] = to_string(c.experiment);
  if (std::isfinite(c.beta)) j["beta"] = c.beta;
  else j["beta"] = "inf";
  j["mass"] = c.mass;
  j["packets"] = nlohmann::json::object();
  for (const auto& [k, p] : c.packets) j["packets"][k] = p;
  j["lambdas"] = c.lambdas;
  j["quadrature"] = c.quadrature;
  j["seed"] = c.seed;
  j["output"] = {{"dir", c.output.dir}, {"prefix", c.output.prefix}};
  j["params"] = c.params;
  return j;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("<config>", "cannot open " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("<config>", std::string("JSON parse error: ") + e.what());
  }
  return config_from_json(j);
}

ExperimentConfig default_config(ExperimentId id) {
  ExperimentConfig c;
  c.experiment = id;
  c.output.prefix = to_string(id);
  const std::vector<double> ladder{1, 2, 4, 8, 16, 32, 64};
  switch (id) {
    case ExperimentId::modlp_verify:
      c.params = {{"dims", {2, 3, 4, 6}}, {"pair_draws", 500}, {"bound_draws", 200}, {"araki_masuda_seeds", 50}};
      break;
    case ExperimentId::thermal_l4: {
      PacketSpec chi;
      PacketSpec f;
      f.kind = PacketKind::bump_product;
      c.packets = {{"chi", chi}, {"f", f}};
      c.lambdas = ladder;
      break;
    }
    case ExperimentId::thermal_l2: {
      PacketSpec chi;
      chi.kind = PacketKind::momentum_window;
      chi.window = FrequencyWindow{-2.0, -1.0};
      PacketSpec f;
      f.kind = PacketKind::bump_product;
      c.packets = {{"chi", chi}, {"f", f}};
      c.lambdas = ladder;
      break;
    }
    case ExperimentId::liouville_check:
      c.params = {{"factor_points", 100}, {"kernel_samples", 1000}, {"grid_nodes", 4}, {"grid_kmax", 3.0}};
      break;
    case ExperimentId::rindler_equiv:
      c.beta = std::numeric_limits<double>::infinity();
      c.quadrature.target_rel_tol = 1e-9;
      c.params = {{"corpus", 10}, {"boost_corpus", 5}, {"qmc_points", 20000}, {"qmc_shifts", 8},
                  {"spatial_radius", 4.0}, {"spatial_grid", 96}, {"spatial_half_length", 6.0}};
      break;
    case ExperimentId::rindler_l4:
    case ExperimentId::rindler_l2: {
      c.beta = std::numeric_limits<double>::infinity();
      c.quadrature.target_rel_tol = 1e-9;
      PacketSpec chi;
      chi.widths = {0.2, 0.2, 0.2, 0.2};
      PacketSpec f{PacketKind::bump_product, {0, 2, 0, 0}, {0.5, 0.5, 0.5, 0.5}, std::nullopt};
      c.packets = {{"chi", chi}, {"f", f}};
      c.lambdas = ladder;
      c.params = {{"offset", 2.0}};
      break;
    }
    case ExperimentId::qei_bound: {
      c.beta = std::numeric_limits<double>::infinity();
      PacketSpec f{PacketKind::bump_product, {0, 2, 0, 0}, {0.5, 0.5, 0.5, 0.5}, std::nullopt};
      c.packets = {{"f", f}};
      c.params = {{"eps", 1.0},      {"mu", 0.6},        {"fock_cutoff", 40}, {"grid_kmax", 6.0},
                  {"coarse_nodes", 6}, {"probe_nodes", 4}, {"probes", 20}};
      break;
    }
    case ExperimentId::purification:
      c.params = {{"omega", 1.0}, {"levels", 40}};
      break;
  }
  return c;
}

bool ExperimentOutcome::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& r) { return r.passed; });
}

int ExperimentOutcome::exit_code() const {
  bool contract = false, tolerance = false;
  for (const auto& r : checks) {
    if (r.passed) continue;
    (r.kind == CheckKind::contract ? contract : tolerance) = true;
  }
  if (contract) return exit_contract;
  if (tolerance) return exit_tolerance;
  return exit_pass;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string config_hash(const ExperimentConfig& c) {
  auto j = to_json(c);
  // output locations do not change the physics
  j.erase("output");
  return hex64(fnv1a(j.dump()));
}

namespace {

nlohmann::json check_json(const CheckResult& r) {
  nlohmann::json j{{"name", r.name},   {"criterion", r.criterion}, {"kind", r.kind == CheckKind::contract ? "contract" : "tolerance"},
                   {"passed", r.passed}, {"detail", r.detail}};
  j["value"] = std::isfinite(r.value) ? nlohmann::json(r.value) : nlohmann::json(format_number(r.value));
  j["threshold"] = std::isfinite(r.threshold) ? nlohmann::json(r.threshold) : nlohmann::json(format_number(r.threshold));
  return j;
}

std::string status_of(int code) {
  switch (code) {
    case exit_pass: return "pass";
    case exit_contract: return "contract-failure";
    case exit_validation: return "validation-failure";
    default: return "tolerance-failure";
  }
}

}  // namespace

nlohmann::json to_json(const RunManifest& m) {
  nlohmann::json j{{"config_hash", m.config_hash}, {"artifact_version", m.artifact_version},
                   {"schema_version", kSchemaVersion}, {"experiment", m.experiment},
                   {"status", m.status},           {"exit_code", m.exit_code},
                   {"wall_clock_seconds", m.wall_clock}};
  j["checks"] = nlohmann::json::array();
  for (const auto& r : m.checks) j["checks"].push_back(check_json(r));
  j["outputs"] = nlohmann::json::array();
  for (const auto& o : m.outputs) j["outputs"].push_back({{"path", o.path}, {"fnv1a", o.fnv1a}, {"bytes", o.bytes}});
  if (!m.error.empty()) j["error"] = m.error;
  return j;
}

std::string checks_csv(const std::vector<CheckResult>& checks) {
  std::ostringstream os;
  os << "name,criterion,kind,value,threshold,passed,detail\n";
  for (const auto& r : checks) {
    if (r.timing) continue;
    std::string d = r.detail;
    std::replace(d.begin(), d.end(), ',', ';');
    os << r.name << ',' << r.criterion << ',' << (r.kind == CheckKind::contract ? "contract" : "tolerance") << ','
       << format_number(r.value) << ',' << format_number(r.threshold) << ',' << (r.passed ? "true" : "false") << ','
       << d << '\n';
  }
  return os.str();
}

RunManifest run(const ExperimentConfig& c) {
  RunManifest m;
  m.experiment = to_string(c.experiment);
  m.config_hash = config_hash(c);
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentOutcome out;
  try {
    c.validate();
    out = execute(c);
    m.exit_code = out.exit_code();
    m.checks = out.checks;
  } catch (const ValidationError& e) {
    m.exit_code = exit_validation;
    m.error = e.what();
  } catch (const ToleranceNotMet& e) {
    m.exit_code = exit_tolerance;
    m.error = e.what();
  } catch (const thermal::UnsupportedInput& e) {
    m.exit_code = exit_validation;
    m.error = e.what();
  }
  m.status = status_of(m.exit_code);
  m.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  namespace fs = std::filesystem;
  const fs::path dir(c.output.dir);
  fs::create_directories(dir);
  const std::string prefix = c.output.prefix.empty() ? m.experiment : c.output.prefix;
  for (const auto& f : out.files) {
    const fs::path p = dir / (prefix + "_" + f.name);
    std::ofstream os(p, std::ios::binary);
    os << f.contents;
    if (!os) throw std::runtime_error("cannot write " + p.string());
    m.outputs.push_back({p.string(), hex64(fnv1a(f.contents)), f.contents.size()});
  }
  std::ofstream ms(dir / (prefix + "_manifest.json"));
  ms << to_json(m).dump(2) << '\n';
  return m;
}

RunManifest run_file(const std::string& path, const std::string& dir_override, const std::string& prefix_override) {
  nlohmann::json raw;
  try {
    std::ifstream in(path);
    if (in) raw = nlohmann::json::parse(in, nullptr, false);
  } catch (const std::exception&) {
  }
  try {
    auto c = load_config(path);
    if (!dir_override.empty()) c.output.dir = dir_override;
    if (!prefix_override.empty()) c.output.prefix = prefix_override;
    return run(c);
  } catch (const ValidationError& e) {
    RunManifest m;
    m.exit_code = exit_validation;
    m.status = status_of(m.exit_code);
    m.error = e.what();
    m.experiment = "unknown";
    std::string dir = "out", prefix;
    if (raw.is_object()) {
      if (raw.contains("experiment") && raw["experiment"].is_string()) m.experiment = raw["experiment"];
      if (raw.contains("output") && raw["output"].is_object()) {
        const auto& o = raw["output"];
        if (o.contains("dir") && o["dir"].is_string()) dir = o["dir"];
        if (o.contains("prefix") && o["prefix"].is_string()) prefix = o["prefix"];
      }
      m.config_hash = hex64(fnv1a(raw.dump()));
    }
    if (!dir_override.empty()) dir = dir_override;
    if (!prefix_override.empty()) prefix = prefix_override;
    if (prefix.empty()) prefix = m.experiment;
    std::filesystem::create_directories(dir);
    std::ofstream ms(std::filesystem::path(dir) / (prefix + "_manifest.json"));
    ms << to_json(m).dump(2) << '\n';
    return m;
  }
}

namespace {

std::string list_columns(const CsvTable& t) {
  std::string s;
  for (const auto& h : t.header) s += (s.empty() ? "" : ", ") + h;
  return s;
}

int need_column(const CsvTable& t, const std::string& name) {
  const int c = t.column(name);
  if (c < 0) throw std::invalid_argument("unknown column '" + name + "' (available: " + list_columns(t) + ")");
  return c;
}

}  // namespace

std::string plotdata(const std::string& report_csv, const std::string& x, const std::vector<std::string>& ys,
                     const std::string& yerr, const std::string& series) {
  const CsvTable t = read_csv(report_csv);
  if (ys.empty()) throw std::invalid_argument("plotdata: at least one y column is required");
  const int xc = need_column(t, x);
  std::vector<int> yc;
  for (const auto& y : ys) yc.push_back(need_column(t, y));
  const int ec = yerr.empty() ? -1 : need_column(t, yerr);
  const int sc = series.empty() ? -1 : need_column(t, series);
  std::ostringstream os;
  os << "series,x,y,yerr\n";
  for (std::size_t k = 0; k < ys.size(); ++k) {
    for (const auto& row : t.rows) {
      const std::string name = sc >= 0 ? ys[k] + ":" + row[static_cast<std::size_t>(sc)] : ys[k];
      os << name << ',' << row[static_cast<std::size_t>(xc)] << ',' << row[static_cast<std::size_t>(yc[k])] << ','
         << (ec >= 0 ? row[static_cast<std::size_t>(ec)] : std::string("0")) << '\n';
    }
  }
  return os.str();
}

int thread_count() {
  const char* v = std::getenv("QLP_THREADS");
  if (!v) return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (end == v || n < 1) return 1;
  return static_cast<int>(std::min<long>(n, 256));
}

}  // namespace qlp::cli
