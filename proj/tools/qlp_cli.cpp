// qlp: experiment runner.
//
//   qlp run <config.json> [--out-dir D] [--prefix P] [-v]
//   qlp plotdata <report.csv> --x lambda --y ratio [--y ...] [--yerr err_h] [--series col] [-o file]
//   qlp modlp verify [--dims 2,3,4,6] [--seed S] [-o file]

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "qlp/experiments.hpp"
#include "qlp/modlp.hpp"
#include "qlp/quadrature.hpp"

namespace {

int emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return 0;
  }
  std::ofstream os(path, std::ios::binary);
  os << text;
  if (!os) {
    std::cerr << "error: cannot write " << path << '\n';
    return qlp::cli::exit_contract;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace qlp::cli;
  CLI::App app{"Numerical lab for L4 energy inequalities of the thermal Liouvillian"};
  app.require_subcommand(1);
  app.fallthrough();
  int verbosity = 0;
  app.add_flag("-v,--verbose", verbosity, "Print every check (repeatable)");

  auto* run_cmd = app.add_subcommand("run", "Run an experiment config");
  std::string config_path, out_dir, prefix;
  run_cmd->add_option("config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out-dir", out_dir, "Override output.dir");
  run_cmd->add_option("--prefix", prefix, "Override output.prefix");

  auto* plot_cmd = app.add_subcommand("plotdata", "Reshape a CSV report into (series, x, y, yerr) rows");
  std::string report_path, xcol, yerr, series, plot_out;
  std::vector<std::string> ycols;
  plot_cmd->add_option("report", report_path, "CSV report")->required()->check(CLI::ExistingFile);
  plot_cmd->add_option("--x", xcol, "x column")->required();
  plot_cmd->add_option("--y", ycols, "y column (repeatable)")->required();
  plot_cmd->add_option("--yerr", yerr, "error column");
  plot_cmd->add_option("--series", series, "column splitting the rows into series");
  plot_cmd->add_option("-o,--output", plot_out, "Output file (default stdout)");

  auto* modlp_cmd = app.add_subcommand("modlp", "Finite-dimensional modular Lp tools");
  modlp_cmd->require_subcommand(1);
  auto* verify_cmd = modlp_cmd->add_subcommand("verify", "Run the property suite, print a pass/fail CSV");
  std::vector<int> dims{2, 3, 4, 6};
  std::uint64_t seed = 1;
  std::string verify_out;
  verify_cmd->add_option("--dims", dims, "Matrix dimensions")->delimiter(',');
  verify_cmd->add_option("--seed", seed, "RNG seed");
  verify_cmd->add_option("-o,--output", verify_out, "Output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  if (*run_cmd) {
    RunManifest m;
    try {
      m = run_file(config_path, out_dir, prefix);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return exit_contract;
    }
    for (const auto& c : m.checks) {
      if (verbosity > 0 || !c.passed)
        std::cerr << (c.passed ? "pass " : "FAIL ") << "[" << c.criterion << "] " << c.name << " value=" << c.value
                  << " threshold=" << c.threshold << (c.detail.empty() ? "" : " (" + c.detail + ")") << '\n';
    }
    if (!m.error.empty()) std::cerr << m.status << ": " << m.error << '\n';
    std::cout << m.experiment << ' ' << m.status << " config=" << m.config_hash << " outputs=" << m.outputs.size()
              << '\n';
    if (verbosity > 0)
      for (const auto& o : m.outputs) std::cout << "  " << o.path << ' ' << o.fnv1a << '\n';
    return m.exit_code;
  }

  if (*plot_cmd) {
    std::ifstream in(report_path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
      return emit(plotdata(ss.str(), xcol, ycols, yerr, series), plot_out);
    } catch (const std::invalid_argument& e) {
      std::cerr << "error: " << e.what() << '\n';
      return exit_validation;
    }
  }

  if (*verify_cmd) {
    qlp::modlp::SuiteOptions o;
    o.dims = dims;
    o.seed = seed;
    const auto rows = qlp::modlp::run_property_suite(o);
    const int rc = emit(qlp::modlp::property_rows_csv(rows), verify_out);
    if (rc) return rc;
    for (const auto& r : rows)
      if (!r.passed) return exit_contract;
    return exit_pass;
  }
  return exit_pass;
}
