// harness.hpp — single runs, parameter sweeps and cross-method comparison
#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "cavitrans/ngf.hpp"
#include "cavitrans/observables.hpp"
#include "cavitrans/params.hpp"
#include "cavitrans/qme.hpp"
#include "cavitrans/qme_effective.hpp"
#include "cavitrans/rates.hpp"

namespace cavitrans {

enum class Method { Ngf, QmeFull, QmeEff, Rates };

std::string method_name(Method method);
// Accepts ngf, qme-full, qme-eff, rates. Throws InvalidArgument otherwise.
Method parse_method(const std::string& name);

enum class RatesModel { Perturbative, MeanField };

struct RunOptions {
  ScbaOptions ngf;
  QmeOptions qme;
  EffectiveQmeOptions qme_eff;
  RatesModel rates = RatesModel::Perturbative;
  RateOptions rate_options;
  bool photon_spectrum = false;    // qme-full: cavity DOS by quantum regression
  double transfer_horizon = 0.0;   // ngf: > 0 extracts the lower-band transfer time from site 1
};

// Columns of equal length; written as CSV.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> data;  // data[column][row]
};

struct RunResult {
  Method method = Method::Ngf;
  SystemParams params;
  ObservableRecord record;
  std::array<double, 2> band_current{};
  int iterations = 0;
  double residual = 0.0;
  std::vector<std::string> warnings;
  // Every numerical setting the solver actually used, in a fixed order.
  std::vector<std::pair<std::string, double>> settings;
  // Method-specific summary fields, written after the common ones.
  std::vector<std::pair<std::string, double>> extras;
  Table spectrum;  // ngf: omega, T1, T2, Ac, ImD_less; qme-full: omega, Ac when requested
};

// Solver errors propagate with the method name prepended.
RunResult run_single(const SystemParams& params, Method method, const RunOptions& options = {});

// Deterministic JSON: summary fields followed by a metadata block.
std::string summary_json(const RunResult& result);
std::string table_csv(const Table& table);
// Writes <method>_summary.json and, when present, <method>_spectrum.csv.
void write_run(const RunResult& result, const std::filesystem::path& dir);

enum class AxisScale { Linear, Log };

struct SweepAxis {
  std::string name;
  AxisScale scale = AxisScale::Linear;
  double min = 0.0;
  double max = 0.0;
  int count = 0;
  std::vector<double> values;  // explicit values override min/max/count

  std::vector<double> points() const;
};

// Grid mode sweeps the Cartesian product of the axes; zip mode walks them in
// lockstep and requires equal lengths.
struct SweepSpec {
  Config base;
  std::vector<SweepAxis> axes;
  bool zip = false;
  std::vector<Method> methods;
  std::filesystem::path out;
};

// YAML layout:
//   base: {n_sites: 3, t1: 1e-4, ...}
//   axes:
//     - {name: g, scale: log, min: 1e-3, max: 1e-1, count: 5}
//     - {name: kappa, values: [0.01, 0.07]}
//   mode: grid | zip
//   methods: [qme-eff, rates]
//   out: results
SweepSpec load_sweep_spec(const std::filesystem::path& path);
// Throws InvalidArgument for unknown parameters, counts below 2 or an empty method list.
void validate_sweep(const SweepSpec& spec);
std::vector<Config> sweep_points(const SweepSpec& spec);

struct SweepRow {
  Config point;
  Method method = Method::Ngf;
  bool ok = false;
  RunResult result;
  std::string error;
};

// Rows are ordered by point, then method, independent of the worker count.
// A failing point is recorded and the sweep continues.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, const RunOptions& options = {}, int workers = 1);
// Long format, one line per successful row.
std::string sweep_csv(const SweepSpec& spec, const std::vector<SweepRow>& rows);
// Axis values, method and error message of every failed row.
std::string sweep_failures_csv(const SweepSpec& spec, const std::vector<SweepRow>& rows);

struct Regime {
  double kappa_over_w2 = 0.0;
  double cooperativity = 0.0;
  bool dissipative = false;   // kappa / W2 >= 1
  bool perturbative = false;  // Gamma_c / Gamma <= 1
};

Regime classify(const SystemParams& params);
// qme-full: everywhere; qme-eff: dissipative; ngf: perturbative; rates: both.
bool within_domain(Method method, const Regime& regime);

struct PairDeviation {
  Method a = Method::Ngf;
  Method b = Method::Ngf;
  double deviation = 0.0;  // |dJ_a - dJ_b| / max(|dJ_a|, |dJ_b|)
};

struct ComparisonReport {
  SystemParams params;
  Regime regime;
  std::vector<std::pair<Method, double>> delta_j;
  std::vector<PairDeviation> pairs;
  double max_deviation = 0.0;
  std::vector<Method> out_of_domain;
};

// Throws ParameterMismatch with fewer than two distinct methods or differing parameters.
ComparisonReport compare_methods(const std::vector<RunResult>& results);
std::string comparison_json(const ComparisonReport& report);

}  // namespace cavitrans
