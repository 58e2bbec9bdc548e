// cavitrans_cli.cpp — command-line driver for single runs, sweeps and comparisons
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cavitrans/errors.hpp"
#include "cavitrans/harness.hpp"

using namespace cavitrans;

namespace {

struct CliState {
  std::string config;
  std::string out = ".";
  int workers = 1;

  long grid_points = 0;
  double spacing = 0.0;
  double eta = 0.0;
  double mixing = 0.5;
  int anderson_depth = 5;
  double tol = 1e-8;
  int max_iter = 500;
  double transfer_horizon = 0.0;
  bool elementwise_bubble = false;

  int n_max = 2;
  std::string solver = "null";
  double dt = 0.0;
  double steady_tol = 1e-10;
  bool hardcore = false;
  bool counter_rotating = false;
  bool spectrum = false;

  std::string nonlocal = "on";
  bool detuning = false;

  bool meanfield = false;
  bool damping = false;

  std::vector<std::string> methods = {"ngf", "qme-full", "qme-eff", "rates"};
};

RunOptions run_options(const CliState& s) {
  RunOptions o;
  o.ngf.grid.points = s.grid_points;
  o.ngf.grid.spacing = s.spacing;
  o.ngf.grid.eta = s.eta;
  o.ngf.mixing = s.mixing;
  o.ngf.anderson_depth = s.anderson_depth;
  o.ngf.tol = s.tol;
  o.ngf.max_iter = s.max_iter;
  o.ngf.trace = s.elementwise_bubble ? BubbleTrace::Elementwise : BubbleTrace::Matrix;
  o.transfer_horizon = s.transfer_horizon;
  o.qme.n_max = s.n_max;
  o.qme.solver = s.solver == "rk4" ? SteadySolver::Rk4 : SteadySolver::Null;
  o.qme.dt = s.dt;
  o.qme.steady_tol = s.steady_tol;
  o.qme.hardcore_bosons = s.hardcore;
  o.qme.counter_rotating = s.counter_rotating;
  o.photon_spectrum = s.spectrum;
  o.qme_eff.model.nonlocal = s.nonlocal == "on";
  o.qme_eff.model.detuned = s.detuning;
  o.qme_eff.model.hardcore_bosons = s.hardcore;
  o.qme_eff.solver = o.qme.solver;
  o.qme_eff.dt = s.dt;
  o.qme_eff.steady_tol = s.steady_tol;
  o.rates = s.meanfield ? RatesModel::MeanField : RatesModel::Perturbative;
  o.rate_options.coherence_damping = s.damping;
  return o;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot write " + p.string());
  f << text;
}

int run_method(const CliState& s, Method m) {
  const SystemParams p = build_params(load_config(s.config));
  const RunResult r = run_single(p, m, run_options(s));
  write_run(r, s.out);
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
  std::printf("%s: J = %.10g  J0 = %.10g  deltaJ = %.6g  nbar = %.4g\n", method_name(m).c_str(), r.record.J,
              r.record.J0, r.record.deltaJ, r.record.nbar);
  return 0;
}

int run_sweep_command(const CliState& s) {
  SweepSpec spec = load_sweep_spec(s.config);
  std::filesystem::path out = s.out != "." || spec.out.empty() ? std::filesystem::path(s.out) : spec.out;
  std::filesystem::create_directories(out);
  const auto rows = run_sweep(spec, run_options(s), s.workers);
  write_file(out / "sweep.csv", sweep_csv(spec, rows));
  const std::string failures = sweep_failures_csv(spec, rows);
  long failed = 0;
  for (const auto& r : rows) failed += !r.ok;
  if (failed) write_file(out / "sweep_failures.csv", failures);
  std::printf("%zu runs, %ld failed; results in %s\n", rows.size(), failed, (out / "sweep.csv").c_str());
  return 0;
}

int run_compare(const CliState& s) {
  const SystemParams p = build_params(load_config(s.config));
  const RunOptions o = run_options(s);
  std::vector<RunResult> results;
  for (const auto& name : s.methods) {
    results.push_back(run_single(p, parse_method(name), o));
    write_run(results.back(), s.out);
  }
  const ComparisonReport rep = compare_methods(results);
  write_file(std::filesystem::path(s.out) / "comparison.json", comparison_json(rep));
  for (const auto& [m, dj] : rep.delta_j) std::printf("%-9s deltaJ = %.6g\n", method_name(m).c_str(), dj);
  std::printf("max pairwise deviation %.4g\n", rep.max_deviation);
  for (Method m : rep.out_of_domain) std::printf("%s is outside its validity domain here\n", method_name(m).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transport through a two-band chain coupled to a leaky cavity"};
  app.require_subcommand(1);
  app.fallthrough();
  CliState s;

  app.add_option("--config", s.config, "Parameter file (YAML key/value), or the sweep file for 'sweep'")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--out", s.out, "Output directory");
  app.add_option("--workers", s.workers, "Concurrent sweep points")->check(CLI::PositiveNumber);

  app.add_option("--grid-points", s.grid_points, "NGF: points across the widest band window");
  app.add_option("--spacing", s.spacing, "NGF: lattice spacing h");
  app.add_option("--eta", s.eta, "NGF: width of the bare lines");
  app.add_option("--mixing", s.mixing, "NGF: step weight of the fixed-point update");
  app.add_option("--anderson-depth", s.anderson_depth, "NGF: Anderson history length, 0 for linear mixing")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--tol", s.tol, "NGF: relative residual at convergence");
  app.add_option("--max-iter", s.max_iter, "NGF: iteration cap");
  app.add_option("--transfer-horizon", s.transfer_horizon, "NGF: horizon of the lower-band real-time response");
  app.add_flag("--elementwise-bubble", s.elementwise_bubble, "NGF: element-wise contraction in the polarization");
  app.add_option("--n-max", s.n_max, "qme-full: photon cutoff");
  app.add_option("--solver", s.solver, "QME: steady state from the null vector or by RK4 evolution")
      ->check(CLI::IsMember({"null", "rk4"}));
  app.add_option("--dt", s.dt, "QME: RK4 time step (0 picks the default)");
  app.add_option("--steady-tol", s.steady_tol, "QME: max |L rho| that ends the RK4 evolution");
  app.add_flag("--hardcore", s.hardcore, "QME: hard-core boson statistics");
  app.add_flag("--counter-rotating", s.counter_rotating, "qme-full: keep the counter-rotating coupling");
  app.add_flag("--spectrum", s.spectrum, "qme-full: cavity DOS by quantum regression");
  app.add_option("--nonlocal", s.nonlocal, "qme-eff: inter-site terms of the collective dissipator")
      ->check(CLI::IsMember({"on", "off"}));
  app.add_flag("--detuning", s.detuning, "qme-eff: detuning-dependent shift and rate");
  app.add_flag("--meanfield", s.meanfield, "rates: mean-field rate equations instead of the perturbative formula");
  app.add_flag("--damping", s.damping, "rates: damp the upper-band coherence");

  auto* ngf = app.add_subcommand("ngf", "Self-consistent Green's functions");
  auto* qme_full = app.add_subcommand("qme-full", "Master equation with the cavity mode");
  auto* qme_eff = app.add_subcommand("qme-eff", "Master equation with the cavity eliminated");
  auto* rates = app.add_subcommand("rates", "Closed-form and rate-equation currents");
  auto* sweep = app.add_subcommand("sweep", "Parameter sweep over a YAML sweep file");
  auto* compare = app.add_subcommand("compare", "Run several methods at one point and compare");
  compare->add_option("--methods", s.methods, "Methods to compare")->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    std::filesystem::create_directories(s.out);
    if (ngf->parsed()) return run_method(s, Method::Ngf);
    if (qme_full->parsed()) return run_method(s, Method::QmeFull);
    if (qme_eff->parsed()) return run_method(s, Method::QmeEff);
    if (rates->parsed()) return run_method(s, Method::Rates);
    if (sweep->parsed()) return run_sweep_command(s);
    if (compare->parsed()) return run_compare(s);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
