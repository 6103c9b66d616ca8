#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include "qlp/experiments.hpp"
#include "qlp/modlp.hpp"
#include "qlp/quadform.hpp"
#include "qlp/report.hpp"
#include "qlp/rindler.hpp"
#include "qlp/thermal.hpp"

namespace qlp::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

CheckResult at_most(std::string name, int criterion, CheckKind kind, double value, double bound, std::string detail = {}) {
  return {std::move(name), criterion, kind, value, bound, value <= bound, std::move(detail)};
}

CheckResult at_least(std::string name, int criterion, CheckKind kind, double value, double bound, std::string detail = {}) {
  return {std::move(name), criterion, kind, value, bound, value >= bound, std::move(detail)};
}

CheckResult timing_check(const std::string& name, int criterion, double seconds, double budget) {
  auto r = at_most(name, criterion, CheckKind::contract, seconds, budget, "wall-clock seconds");
  r.timing = true;
  return r;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

/// (max - min) / min over the rows with lambda >= from.
double band(const std::vector<QeiReport>& rows, double QeiReport::*field, double from = 0.0) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& r : rows) {
    if (r.lambda < from) continue;
    lo = std::min(lo, r.*field);
    hi = std::max(hi, r.*field);
  }
  return (hi - lo) / lo;
}

void add_report(ExperimentOutcome& out, const std::vector<QeiReport>& rows) {
  out.files.push_back({"report.csv", to_csv(rows)});
  out.files.push_back({"report.json", to_json_rows(rows).dump(2) + "\n"});
}

void finish(ExperimentOutcome& out) { out.files.push_back({"checks.csv", checks_csv(out.checks)}); }

std::string lam(double l) { return "lambda=" + format_number(l); }

// ---------------------------------------------------------------------------

int modlp_criterion(const std::string& property) {
  if (property == "jaj-identity" || property == "araki-masuda-sup") return 2;
  if (property == "commutant-l4-bound") return 3;
  if (property.rfind("passivity", 0) == 0) return 4;
  return 1;
}

ExperimentOutcome run_modlp(const ExperimentConfig& c) {
  modlp::SuiteOptions o;
  o.dims.clear();
  for (double d : c.param_list("dims", {2, 3, 4, 6})) {
    if (d < 1 || d != std::floor(d)) throw ValidationError("params.dims", "dimensions must be positive integers");
    o.dims.push_back(static_cast<int>(d));
  }
  o.pair_draws = static_cast<int>(c.param("pair_draws", 500));
  o.bound_draws = static_cast<int>(c.param("bound_draws", 200));
  o.araki_masuda_seeds = static_cast<int>(c.param("araki_masuda_seeds", 50));
  o.araki_masuda_max_dim = static_cast<int>(c.param("araki_masuda_max_dim", 4));
  o.seed = c.seed;
  if (o.pair_draws < 1 || o.bound_draws < 1) throw ValidationError("params.pair_draws", "draw counts must be positive");
  const auto t0 = Clock::now();
  const auto rows = modlp::run_property_suite(o);
  ExperimentOutcome out;
  for (const auto& r : rows) {
    const auto kind = modlp_criterion(r.property) == 2 ? CheckKind::tolerance : CheckKind::contract;
    out.checks.push_back({r.property + " n=" + std::to_string(r.dim), modlp_criterion(r.property), kind, r.min_slack,
                          r.threshold, r.passed, std::to_string(r.draws) + " draws; worst slack"});
  }
  out.checks.push_back(timing_check("suite-runtime", 1, seconds_since(t0), 30.0));
  out.files.push_back({"properties.csv", modlp::property_rows_csv(rows)});
  finish(out);
  return out;
}

// ---------------------------------------------------------------------------

ExperimentOutcome run_thermal_l4(const ExperimentConfig& c) {
  const thermal::ThermalParams tp{c.beta, c.mass};
  const auto t0 = Clock::now();
  const auto rows = thermal::scan_l4_violation(c.packets.at("chi"), c.packets.at("f"), c.lambdas, tp, c.quadrature);
  ExperimentOutcome out;
  const double from = c.param("band_from", 8.0);
  out.checks.push_back(at_most("l4-proxy-band", 7, CheckKind::contract, band(rows, &QeiReport::l4_proxy, from), 0.25,
                               "relative spread of sqrt6 N^2 over lambda >= " + format_number(from)));
  const double growth = rows.back().ratio / rows.front().ratio;
  out.checks.push_back(at_least("ratio-growth", 7, CheckKind::contract, growth, 4.0,
                                lam(rows.back().lambda) + " over " + lam(rows.front().lambda)));
  bool monotone = true;
  for (std::size_t i = 1; i < rows.size(); ++i) monotone = monotone && rows[i].ratio > rows[i - 1].ratio;
  out.checks.push_back({"ratio-monotone", 7, CheckKind::contract, monotone ? 1.0 : 0.0, 1.0, monotone,
                        "ratio column increases along the ladder"});
  out.checks.push_back(timing_check("scan-runtime", 7, seconds_since(t0), 600.0));
  add_report(out, rows);
  finish(out);
  return out;
}

ExperimentOutcome run_thermal_l2(const ExperimentConfig& c) {
  const thermal::ThermalParams tp{c.beta, c.mass};
  const auto t0 = Clock::now();
  const auto rows = thermal::scan_l2_violation(c.packets.at("chi"), c.packets.at("f"), c.lambdas, tp, c.quadrature);
  ExperimentOutcome out;
  const double from = c.param("band_from", 8.0);
  out.checks.push_back(at_most("norm-band", 8, CheckKind::contract, band(rows, &QeiReport::l2_norm_sq, from), 0.20,
                               "relative spread of ||psi||^2 over lambda >= " + format_number(from)));
  const auto& first = rows.front();
  const auto& last = rows.back();
  out.checks.push_back(at_most("ell-divergence", 8, CheckKind::contract, last.ell_expect / std::abs(first.ell_expect),
                               -10.0, "ell at " + lam(last.lambda) + " in units of |ell| at " + lam(first.lambda)));
  out.checks.push_back(at_most("h-suppression", 8, CheckKind::contract,
                               std::abs(last.h_expect) / std::abs(last.bath_expect), 0.10,
                               "|h| / |bath| at " + lam(last.lambda)));
  out.checks.push_back(timing_check("scan-runtime", 8, seconds_since(t0), 600.0));
  add_report(out, rows);
  finish(out);
  return out;
}

// ---------------------------------------------------------------------------

ExperimentOutcome run_liouville(const ExperimentConfig& c) {
  const thermal::ThermalParams tp{c.beta, c.mass};
  ExperimentOutcome out;
  const int np = static_cast<int>(c.param("factor_points", 100));
  if (np < 2) throw ValidationError("params.factor_points", "need at least 2 points per axis");
  std::vector<double> omegas, betas;
  for (int i = 0; i < np; ++i) {
    const double t = static_cast<double>(i) / (np - 1);
    omegas.push_back(c.mass * std::pow(20.0, t));
    betas.push_back(0.1 * std::pow(100.0, t));
  }
  const auto fr = thermal::thermal_factor_check(c.mass, omegas, betas);
  const std::string pts = std::to_string(fr.points) + " (omega; beta) points";
  out.checks.push_back(at_most("factor-identity", 5, CheckKind::tolerance, fr.max_identity_residual, 1e-12, pts));
  out.checks.push_back(at_most("factor-ordering", 5, CheckKind::contract, fr.max_order_violation, 1e-12, pts));

  const int ns = static_cast<int>(c.param("kernel_samples", 1000));
  if (ns < 1) throw ValidationError("params.kernel_samples", "must be positive");
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> ud(-8.0, 8.0);
  std::vector<modefield::Vec3> ks(static_cast<std::size_t>(ns));
  for (auto& k : ks) k = {ud(rng), ud(rng), ud(rng)};
  const auto cr = thermal::liouville_cancellation_check(tp, ks);
  const std::string smp = std::to_string(cr.samples) + " sampled (k; p) pairs";
  out.checks.push_back(at_most("pair-kernel", 6, CheckKind::tolerance, cr.max_pair_coefficient, 1e-12, smp));
  out.checks.push_back(at_most("mixed-kernel", 6, CheckKind::tolerance, cr.max_mixed_coefficient, 1e-12, smp));
  out.checks.push_back(at_most("diagonal-kernel", 6, CheckKind::tolerance, cr.max_diagonal_residual, 1e-12, smp));

  const int gn = static_cast<int>(c.param("grid_nodes", 4));
  const double gk = c.param("grid_kmax", 3.0);
  const auto grid = quadform::box_grid(gn, gk, c.mass, quadform::Species::doubled, c.beta);
  const auto ell = quadform::assemble(quadform::liouville_density_terms(c.mass), quadform::Smearing::formal_unit(), grid);
  double diag = 0.0, off = 0.0, pair = 0.0;
  std::ostringstream os;
  os << "mode,channel,k1,k2,k3,omega,diagonal\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& m = grid.modes[i];
    const double w = std::sqrt(m.k[0] * m.k[0] + m.k[1] * m.k[1] + m.k[2] * m.k[2] + c.mass * c.mass);
    const double expect = m.channel == 0 ? w : -w;
    const auto ii = static_cast<Eigen::Index>(i);
    diag = std::max(diag, std::abs(ell.number(ii, ii) - expect) / w);
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      if (i != j) off = std::max(off, std::abs(ell.number(ii, jj)) / w);
      pair = std::max(pair, std::abs(ell.pair(ii, jj)) / w);
    }
    os << i << ',' << m.channel << ',' << format_number(m.k[0]) << ',' << format_number(m.k[1]) << ','
       << format_number(m.k[2]) << ',' << format_number(w) << ',' << format_number(ell.number(ii, ii).real()) << '\n';
  }
  const std::string gd = std::to_string(grid.size()) + " doubled modes";
  out.checks.push_back(at_most("formal-ell-diagonal", 6, CheckKind::tolerance, diag, 1e-10, gd + "; b: +omega; a: -omega"));
  out.checks.push_back(at_most("formal-ell-offdiagonal", 6, CheckKind::tolerance, off, 1e-10, gd));
  out.checks.push_back(at_most("formal-ell-pairing", 6, CheckKind::tolerance, pair, 1e-10, gd));
  out.files.push_back({"formal_ell.csv", os.str()});
  finish(out);
  return out;
}

// ---------------------------------------------------------------------------

/// Runs body(i) for i < n over thread_count() workers; each index writes its own slot.
template <class F>
void parallel_for(std::size_t n, F body) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(thread_count()), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) body(i);
    });
  for (auto& t : pool) t.join();
}

/// Gaussians inside the right wedge; the equivalence corpus keeps equal spatial widths.
std::vector<PacketSpec> wedge_corpus(int n, std::uint64_t seed, bool anisotropic_only) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> t0(-0.3, 0.3), x1(1.8, 2.6), w(0.25, 0.4), off(-0.2, 0.2);
  std::vector<PacketSpec> out;
  for (int i = 0; i < n; ++i) {
    PacketSpec g;
    g.center = {t0(rng), x1(rng), 0.0, 0.0};
    const double ws = w(rng);
    g.widths = {w(rng), ws, ws, ws};
    if (anisotropic_only) {
      g.widths = {w(rng), w(rng), w(rng), w(rng)};
    } else if (i % 2) {
      // off the x1 axis: the reduced path integrates the azimuth numerically
      g.center[2] = off(rng);
      g.center[3] = off(rng);
    }
    out.push_back(g);
  }
  return out;
}

std::string packet_label(const PacketSpec& g) {
  std::ostringstream os;
  for (int i = 0; i < 4; ++i) os << format_number(g.center[i]) << ',';
  for (int i = 0; i < 4; ++i) os << format_number(g.widths[i]) << (i < 3 ? "," : "");
  return os.str();
}

ExperimentOutcome run_rindler_equiv(const ExperimentConfig& c) {
  const int n = static_cast<int>(c.param("corpus", 10));
  const int nb = static_cast<int>(c.param("boost_corpus", 5));
  if (n < 1) throw ValidationError("params.corpus", "must be positive");
  if (nb < 1) throw ValidationError("params.boost_corpus", "must be positive");
  QuadratureSpec qq = c.quadrature;
  qq.points = static_cast<long>(c.param("qmc_points", 20000));
  qq.qmc_shifts = static_cast<int>(c.param("qmc_shifts", 8));
  qq.seed = c.seed;
  qq.scheme = Scheme::quasi_monte_carlo;

  const auto corpus = wedge_corpus(n, c.seed, false);
  struct Row {
    double cart = 0, cart_err = 0, qmc = 0, qmc_err = 0, reduced = 0, reduced_err = 0;
  };
  std::vector<Row> rows(corpus.size());
  parallel_for(corpus.size(), [&](std::size_t i) {
    const auto psi = rindler::vacuum_state(corpus[i], c.mass);
    const auto f = rindler::square_of(corpus[i]);
    const auto ca = rindler::kappa_expectation(psi, f, c.quadrature);
    const auto qm = rindler::kappa_lightcone_expectation(psi, f, rindler::LightconePath::qmc, qq);
    const auto rd = rindler::kappa_lightcone_expectation(psi, f, rindler::LightconePath::reduced, c.quadrature);
    rows[i] = {ca.value, ca.error, qm.total(), qm.total_error(), rd.total(), rd.total_error()};
  });
  ExperimentOutcome out;
  std::ostringstream es;
  es << "instance,center0,center1,center2,center3,width0,width1,width2,width3,cartesian,err_cartesian,qmc,err_qmc,reduced,err_reduced\n";
  double worst_q = 0, worst_r = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    worst_q = std::max(worst_q, rel(r.qmc, r.cart));
    worst_r = std::max(worst_r, rel(r.reduced, r.cart));
    es << i << ',' << packet_label(corpus[i]) << ',' << format_number(r.cart) << ',' << format_number(r.cart_err) << ','
       << format_number(r.qmc) << ',' << format_number(r.qmc_err) << ',' << format_number(r.reduced) << ','
       << format_number(r.reduced_err) << '\n';
  }
  const std::string ci = std::to_string(n) + " instances; max relative deviation from Cartesian";
  out.checks.push_back(at_most("lightcone-qmc", 9, CheckKind::tolerance, worst_q, 1e-2, ci));
  out.checks.push_back(at_most("lightcone-reduced", 9, CheckKind::tolerance, worst_r, 1e-6, ci));

  auto bcorpus = wedge_corpus(nb, c.seed + 1, true);
  // the first instance keeps the isotropic geometry
  bcorpus[0].widths = {0.3, 0.3, 0.3, 0.3};
  modefield::GridOracleSpec gs;
  gs.n = static_cast<int>(c.param("spatial_grid", 96));
  gs.half_length = c.param("spatial_half_length", 6.0);
  const double radius = c.param("spatial_radius", 4.0);
  std::vector<std::array<double, 3>> brow(bcorpus.size());
  parallel_for(bcorpus.size(), [&](std::size_t i) {
    const auto psi = rindler::vacuum_state(bcorpus[i], c.mass);
    brow[i][0] = rindler::boost_generator_expectation(psi, c.quadrature).value;
    brow[i][1] = rindler::boost_fd_oracle(psi, c.quadrature).value;
  });
  // FFTW planning is not reentrant: the grid oracle runs serially
  for (std::size_t i = 0; i < bcorpus.size(); ++i) {
    const auto psi = rindler::vacuum_state(bcorpus[i], c.mass);
    brow[i][2] = rindler::boost_spatial_integral(psi, gs, {radius}).values.back();
  }
  std::ostringstream bs;
  bs << "instance,center0,center1,center2,center3,width0,width1,width2,width3,generator,fd_oracle,spatial_integral\n";
  double worst_fd = 0, worst_sp = 0;
  for (std::size_t i = 0; i < brow.size(); ++i) {
    worst_fd = std::max(worst_fd, rel(brow[i][1], brow[i][0]));
    worst_sp = std::max(worst_sp, rel(brow[i][2], brow[i][0]));
    bs << i << ',' << packet_label(bcorpus[i]) << ',' << format_number(brow[i][0]) << ',' << format_number(brow[i][1])
       << ',' << format_number(brow[i][2]) << '\n';
  }
  const std::string bi = std::to_string(nb) + " gaussian instances; max relative deviation";
  out.checks.push_back(at_most("boost-vs-fd", 10, CheckKind::tolerance, worst_fd, 1e-3, bi));
  out.checks.push_back(at_most("boost-vs-spatial", 10, CheckKind::tolerance, worst_sp, 1e-3,
                               bi + "; R=" + format_number(radius)));
  out.files.push_back({"equivalence.csv", es.str()});
  out.files.push_back({"boost.csv", bs.str()});
  finish(out);
  return out;
}

// ---------------------------------------------------------------------------

ExperimentOutcome run_rindler_l4(const ExperimentConfig& c) {
  const auto rows = rindler::scan_boost_l4_violation(c.packets.at("chi"), c.packets.at("f"), c.param("offset", 2.0),
                                                     c.lambdas, c.mass, c.quadrature);
  ExperimentOutcome out;
  const double growth = rows.back().ratio / rows.front().ratio;
  out.checks.push_back(at_least("channel-ratio-growth", 11, CheckKind::contract, growth, 4.0,
                                "K2 channel / sqrt6 N^2 at " + lam(rows.back().lambda) + " over " +
                                    lam(rows.front().lambda)));
  out.checks.push_back(at_most("l4-proxy-band", 11, CheckKind::contract, band(rows, &QeiReport::l4_proxy), 0.25,
                               "relative spread of sqrt6 N^2 over the ladder"));
  const bool wedge = std::all_of(rows.begin(), rows.end(), [](const QeiReport& r) { return r.wedge.value_or(false); });
  out.checks.push_back({"wedge-support", 11, CheckKind::contract, wedge ? 1.0 : 0.0, 1.0, wedge,
                        "g_lambda and f supported in the wedge"});
  add_report(out, rows);
  finish(out);
  return out;
}

ExperimentOutcome run_rindler_l2(const ExperimentConfig& c) {
  const auto rows = rindler::scan_boost_l2_violation(c.packets.at("chi"), c.packets.at("f"), c.param("offset", 2.0),
                                                     c.lambdas, c.mass, c.quadrature);
  ExperimentOutcome out;
  const double growth = std::abs(rows.back().channel) / std::abs(rows.front().channel);
  out.checks.push_back(at_least("reflected-term-divergence", 11, CheckKind::contract, growth, 10.0,
                                "|kappa(f o j)| at " + lam(rows.back().lambda) + " over " + lam(rows.front().lambda)));
  out.checks.push_back(at_most("norm-band", 11, CheckKind::contract, band(rows, &QeiReport::l2_norm_sq), 0.25,
                               "relative spread of ||psi||^2 over the ladder"));
  const bool wedge = std::all_of(rows.begin(), rows.end(), [](const QeiReport& r) { return r.wedge.value_or(false); });
  out.checks.push_back({"wedge-support", 11, CheckKind::contract, wedge ? 1.0 : 0.0, 1.0, wedge,
                        "mirror packets supported in the left wedge"});
  add_report(out, rows);
  finish(out);
  return out;
}

// ---------------------------------------------------------------------------

ExperimentOutcome run_qei_bound(const ExperimentConfig& c) {
  ExperimentOutcome out;
  const double eps = c.param("eps", 1.0), mu = c.param("mu", 0.6);
  if (!(eps > std::abs(mu))) throw ValidationError("params.mu", "single-mode form needs |mu| < eps");
  const auto sm = quadform::single_mode(eps, mu);
  const auto gs = quadform::ground_energy(sm);
  const double closed = 0.5 * (std::sqrt(eps * eps - mu * mu) - eps);
  out.checks.push_back(at_most("single-mode-closed-form", 12, CheckKind::tolerance, std::abs(gs.energy - closed), 1e-12,
                               "Bogoliubov vs (sqrt(eps^2 - mu^2) - eps)/2 = " + format_number(closed)));
  const int cutoff = static_cast<int>(c.param("fock_cutoff", 40));
  const double ed = quadform::exact_diag_oracle(sm, cutoff);
  out.checks.push_back(at_most("single-mode-exact-diag", 12, CheckKind::tolerance, std::abs(gs.energy - ed), 1e-8,
                               "Fock cutoff " + std::to_string(cutoff)));

  std::ostringstream csv;
  csv << "form,nodes," << quadform::ground_energy_csv_header() << '\n';
  const PacketSpec& f = c.packets.at("f");
  const double kmax = c.param("grid_kmax", 6.0);
  const int n0 = static_cast<int>(c.param("coarse_nodes", 6));
  if (n0 < 2) throw ValidationError("params.coarse_nodes", "need at least 2 nodes per axis");
  auto energy = [&](int nodes, int channel) {
    const auto grid = quadform::box_grid(nodes, kmax, c.mass, quadform::Species::single);
    const auto form = quadform::assemble(quadform::boost_lightcone_terms(c.mass, channel), quadform::Smearing::of(f), grid);
    const auto r = quadform::ground_energy(form);
    csv << (channel < 0 ? std::string("total") : "channel" + std::to_string(channel)) << ',' << nodes << ','
        << quadform::ground_energy_csv_row(grid.size(), r) << '\n';
    return std::make_pair(r, form.warnings.size());
  };
  bool all_stable = true;
  std::string unstable;
  for (int ch = 0; ch < 5; ++ch) {
    const auto [r, w] = energy(n0, ch);
    if (!r.stable) {
      all_stable = false;
      unstable += " channel" + std::to_string(ch);
    }
  }
  out.checks.push_back({"channel-forms-stable", 12, CheckKind::contract, all_stable ? 1.0 : 0.0, 1.0, all_stable,
                        "five lightcone channels at " + std::to_string(n0) + " nodes per axis" +
                            (unstable.empty() ? "" : "; unstable:" + unstable)});
  for (int ch : {-1, 0}) {
    const auto [a, wa] = energy(n0, ch);
    const auto [b, wb] = energy(2 * n0, ch);
    const std::string label = ch < 0 ? "total" : "channel0";
    const bool stable = a.stable && b.stable;
    out.checks.push_back({label + "-stable", 12, CheckKind::contract, stable ? 1.0 : 0.0, 1.0, stable,
                          std::to_string(n0) + " and " + std::to_string(2 * n0) + " nodes per axis"});
    const double drift = stable ? rel(a.energy, b.energy) : std::numeric_limits<double>::infinity();
    out.checks.push_back(at_most(label + "-doubling-drift", 12, CheckKind::tolerance, drift, 0.10,
                                 "E=" + format_number(a.energy) + " -> " + format_number(b.energy) +
                                     (wa + wb ? "; grid warnings" : "")));
  }

  const int pn = static_cast<int>(c.param("probe_nodes", 4));
  const int probes = static_cast<int>(c.param("probes", 20));
  const auto pg = quadform::box_grid(pn, kmax, c.mass, quadform::Species::single);
  const auto qp = rindler::qei_lower_probe(f, c.mass, pg, -1, probes, c.seed);
  out.checks.push_back({"variational-probe", 12, CheckKind::contract, qp.probe_min - qp.bound, 0.0,
                        qp.stable && qp.respected,
                        std::to_string(probes) + " random probes over " + std::to_string(qp.modes) +
                            " modes; slack above the bound"});
  out.files.push_back({"ground_energy.csv", csv.str()});
  finish(out);
  return out;
}

ExperimentOutcome run_purification(const ExperimentConfig& c) {
  ExperimentOutcome out;
  const double omega = c.param("omega", 1.0);
  const int levels = static_cast<int>(c.param("levels", 40));
  if (!(omega > 0.0)) throw ValidationError("params.omega", "must be positive");
  if (levels < 2) throw ValidationError("params.levels", "need at least 2 levels");
  const auto p = quadform::purification_crosscheck(c.beta, omega, levels);
  out.checks.push_back(at_most("truncation-tail", 12, CheckKind::tolerance, p.tail_bound, 1e-10,
                               "weight of the discarded Gibbs levels"));
  out.checks.push_back(at_most("bose-occupation", 12, CheckKind::tolerance, p.occupation_residual, 1e-10,
                               "tr(rho a^dag a) vs 1/(e^{beta omega} - 1) = " + format_number(p.bose)));
  out.checks.push_back(at_most("delta-spectrum", 12, CheckKind::tolerance, p.delta_spectrum_residual, 1e-10));
  out.checks.push_back(at_most("kms-relation", 12, CheckKind::tolerance, p.kms_residual, 1e-10));
  out.checks.push_back(at_most("thermal-annihilation", 12, CheckKind::tolerance, p.annihilation_residual, 1e-10,
                               "(B+ c - B- ctilde^dag) Omega"));
  out.checks.push_back(at_most("commutant-swap", 12, CheckKind::tolerance, p.swap_residual, 1e-10));
  nlohmann::json j{{"beta", c.beta},
                   {"omega", omega},
                   {"levels", levels},
                   {"occupation", p.occupation},
                   {"bose", p.bose},
                   {"occupation_residual", p.occupation_residual},
                   {"tail_bound", p.tail_bound},
                   {"delta_spectrum_residual", p.delta_spectrum_residual},
                   {"kms_residual", p.kms_residual},
                   {"annihilation_residual", p.annihilation_residual},
                   {"swap_residual", p.swap_residual}};
  out.files.push_back({"purification.json", j.dump(2) + "\n"});
  finish(out);
  return out;
}

}  // namespace

ExperimentOutcome execute(const ExperimentConfig& c) {
  c.validate();
  const auto t0 = Clock::now();
  ExperimentOutcome out;
  switch (c.experiment) {
    case ExperimentId::modlp_verify: out = run_modlp(c); break;
    case ExperimentId::thermal_l4: out = run_thermal_l4(c); break;
    case ExperimentId::thermal_l2: out = run_thermal_l2(c); break;
    case ExperimentId::liouville_check: out = run_liouville(c); break;
    case ExperimentId::rindler_equiv: out = run_rindler_equiv(c); break;
    case ExperimentId::rindler_l4: out = run_rindler_l4(c); break;
    case ExperimentId::rindler_l2: out = run_rindler_l2(c); break;
    case ExperimentId::qei_bound: out = run_qei_bound(c); break;
    case ExperimentId::purification: out = run_purification(c); break;
  }
  out.seconds = seconds_since(t0);
  return out;
}

}  // namespace qlp::cli
