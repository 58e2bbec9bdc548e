#include "cavitrans/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include <yaml-cpp/yaml.h>

#include "cavitrans/errors.hpp"
#include "json.hpp"

namespace cavitrans {

namespace {

using json = nlohmann::ordered_json;

std::string number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json optional_json(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

json params_json(const SystemParams& p) {
  json j = json::object();
  for (const auto& [k, v] : to_config(p)) j[k] = v;
  j["n_sites"] = p.n_sites;
  return j;
}

Table ngf_spectrum(const ScbaResult& r, const NgfCurrents& c, const CavitySpectrum& cav) {
  Table t;
  t.columns = {"omega", "T1", "T2", "Ac", "ImD_less"};
  const long n = static_cast<long>(cav.omega.size());
  t.data.assign(5, std::vector<double>(n, 0.0));
  for (long i = 0; i < n; ++i) {
    const long lattice = r.photon.window.first + i;
    t.data[0][i] = cav.omega[i];
    for (int b = 0; b < 2; ++b) {
      const Window& w = r.electrons.band[b].window;
      if (w.contains(lattice)) t.data[1 + b][i] = c.transmission[b][w.offset(lattice)];
    }
    t.data[3][i] = cav.dos[i];
    t.data[4][i] = cav.im_lesser[i];
  }
  return t;
}

std::optional<double> try_vacuum_rabi(const Eigen::MatrixXd& pop, double g) {
  if (g <= 0.0 || pop.rows() != 2) return std::nullopt;
  try {
    return vacuum_rabi(pop, g);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InvertedPopulations) throw;
    return std::nullopt;
  }
}

std::optional<double> try_splitting(const std::vector<double>& omega, const std::vector<double>& dos) {
  std::vector<double> w, a;
  for (size_t i = 0; i < omega.size(); ++i)
    if (omega[i] > 0.0) {
      w.push_back(omega[i]);
      a.push_back(dos[i]);
    }
  if (w.size() < 3) return std::nullopt;
  try {
    return polariton_splitting(w, a).splitting;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::PeaksNotResolved) throw;
    return std::nullopt;
  }
}

void fill_ngf(RunResult& out, const SystemParams& p, const RunOptions& o) {
  const ScbaResult r = scba_fixed_point(p, o.ngf);
  const NgfCurrents c = transmission_and_current(r, p);
  const CavitySpectrum cav = cavity_dos_and_nbar(r.photon, p, r.grid);
  ObservableRecord& rec = out.record;
  rec.J = c.total;
  rec.J_s = c.total;
  rec.J_d = -c.total_population;
  rec.populations = populations_real_space(r);
  rec.nbar = cav.nbar;
  rec.omega_n = try_vacuum_rabi(rec.populations, p.g);
  rec.omega_S = try_splitting(cav.omega, cav.dos);
  if (p.n_sites % 2 == 1) rec.chi_ratio = broadening_ratio(r, p);
  if (o.transfer_horizon > 0.0 && p.g > 0.0) {
    try {
      rec.transfer_time = transfer_time(spectral_function_realtime(r, 0, 0, o.transfer_horizon), p.g).time_times_g;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoTransferDetected) throw;
    }
  }
  out.band_current = c.band;
  out.iterations = r.iterations;
  out.residual = r.residual;
  out.warnings = r.warnings;
  out.settings = {{"h", r.grid.h},
                  {"eta", r.grid.eta},
                  {"band1_points", double(r.grid.band[0].count)},
                  {"band2_points", double(r.grid.band[1].count)},
                  {"photon_points", double(r.grid.photon.count)},
                  {"max_iter", double(o.ngf.max_iter)},
                  {"tol", o.ngf.tol},
                  {"mixing", o.ngf.mixing},
                  {"anderson_depth", double(o.ngf.anderson_depth)},
                  {"cell_quadrature", o.ngf.quadrature == Quadrature::Cell ? 1.0 : 0.0},
                  {"matrix_bubble_trace", o.ngf.trace == BubbleTrace::Matrix ? 1.0 : 0.0}};
  out.spectrum = ngf_spectrum(r, c, cav);
}

void fill_qme(RunResult& out, const QmeSolution& s, const SystemParams& p) {
  ObservableRecord& rec = out.record;
  rec.J = s.currents.total;
  rec.J_s = s.currents.source;
  rec.J_d = s.currents.drain;
  rec.populations = s.populations;
  rec.nbar = s.nbar;
  rec.omega_n = try_vacuum_rabi(rec.populations, p.g);
  out.band_current = s.currents.band;
  out.iterations = static_cast<int>(s.steps);
  out.residual = s.residual;
  out.warnings = s.warnings;
}

void fill_qme_full(RunResult& out, const SystemParams& p, const RunOptions& o) {
  const QmeSolution s = solve_full_qme(p, o.qme);
  fill_qme(out, s, p);
  out.settings = {{"n_max", double(o.qme.n_max)},
                  {"null_solver", o.qme.solver == SteadySolver::Null ? 1.0 : 0.0},
                  {"dt", o.qme.dt > 0.0 ? o.qme.dt : default_time_step(p)},
                  {"steady_tol", o.qme.steady_tol},
                  {"hardcore_bosons", o.qme.hardcore_bosons ? 1.0 : 0.0},
                  {"counter_rotating", o.qme.counter_rotating ? 1.0 : 0.0},
                  {"block_size", double(s.block_size)}};
  if (o.photon_spectrum) {
    const ManyBodyBasis basis(p.n_sites, o.qme.n_max);
    const std::vector<double> w = default_photon_frequencies(p);
    const PhotonSpectrum sp = photon_dos_regression(p, basis, s.rho, w, o.qme);
    out.spectrum.columns = {"omega", "Ac"};
    out.spectrum.data = {sp.omega, sp.dos};
    out.record.omega_S = try_splitting(sp.omega, sp.dos);
    out.settings.push_back({"regression_t_final", sp.t_final});
    out.settings.push_back({"regression_window_rate", sp.window_rate});
  }
}

void fill_qme_eff(RunResult& out, const SystemParams& p, const RunOptions& o) {
  const QmeSolution s = steady_state_effective(p, o.qme_eff);
  fill_qme(out, s, p);
  out.settings = {{"nonlocal", o.qme_eff.model.nonlocal ? 1.0 : 0.0},
                  {"detuned", o.qme_eff.model.detuned ? 1.0 : 0.0},
                  {"hardcore_bosons", o.qme_eff.model.hardcore_bosons ? 1.0 : 0.0},
                  {"null_solver", o.qme_eff.solver == SteadySolver::Null ? 1.0 : 0.0},
                  {"steady_tol", o.qme_eff.steady_tol},
                  {"block_size", double(s.block_size)}};
}

void fill_rates(RunResult& out, const SystemParams& p, const RunOptions& o) {
  ObservableRecord& rec = out.record;
  const PerturbativeDeltaJ d = delta_j_perturbative(p);
  std::optional<MeanFieldResult> m;
  try {
    m = meanfield_steady_current(p, o.rate_options);
  } catch (const Error&) {
    if (o.rates == RatesModel::MeanField) throw;
    out.warnings.push_back("mean-field rate equations have no stationary solution here");
  }
  double dj = 0.0;
  if (o.rates == RatesModel::Perturbative) {
    dj = d.full;
    if (d.beyond_validity) out.warnings.push_back("Gamma_c / Gamma beyond the perturbative formula");
    out.settings = {{"perturbative", 1.0}};
  } else {
    dj = m->delta_j;
    out.iterations = m->iterations;
    out.settings = {{"perturbative", 0.0}, {"coherence_damping", o.rate_options.coherence_damping ? 1.0 : 0.0}};
  }
  out.extras = {{"J0_1", g0_current(p.t1, p.gamma1).current}, {"J0_2", g0_current(p.t2, p.gamma2).current}};
  if (m) {
    out.extras.push_back({"J_meanfield", m->current});
    out.extras.push_back({"phi", m->phi});
  }
  out.extras.push_back({"deltaJ_pert", d.full});
  rec.J = rec.J0 * (1.0 + dj);
  rec.J_s = rec.J;
  rec.J_d = -rec.J;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot write " + path.string());
  f << text;
  if (!f) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::Ngf: return "ngf";
    case Method::QmeFull: return "qme-full";
    case Method::QmeEff: return "qme-eff";
    case Method::Rates: return "rates";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  for (Method m : {Method::Ngf, Method::QmeFull, Method::QmeEff, Method::Rates})
    if (method_name(m) == name) return m;
  throw Error(ErrorCode::InvalidArgument, "unknown method '" + name + "'");
}

RunResult run_single(const SystemParams& p, Method method, const RunOptions& o) {
  validate(p);
  RunResult out;
  out.method = method;
  out.params = p;
  out.record.method = method_name(method);
  out.record.J0 = g0_total_current(p);
  try {
    switch (method) {
      case Method::Ngf: fill_ngf(out, p, o); break;
      case Method::QmeFull: fill_qme_full(out, p, o); break;
      case Method::QmeEff: fill_qme_eff(out, p, o); break;
      case Method::Rates: fill_rates(out, p, o); break;
    }
  } catch (const Error& e) {
    throw Error(e.code(), method_name(method) + ": " + e.what());
  }
  out.record.deltaJ = delta_j(out.record.J, out.record.J0);
  check_record(out.record);
  return out;
}

std::string summary_json(const RunResult& r) {
  const ObservableRecord& rec = r.record;
  json j;
  j["method"] = rec.method;
  j["J"] = rec.J;
  j["J1"] = r.band_current[0];
  j["J2"] = r.band_current[1];
  j["J_s"] = rec.J_s;
  j["J_d"] = rec.J_d;
  j["J0"] = rec.J0;
  j["deltaJ"] = rec.deltaJ;
  j["nbar"] = rec.nbar;
  j["populations"] = matrix_json(rec.populations);
  j["omega_S"] = optional_json(rec.omega_S);
  j["omega_n"] = optional_json(rec.omega_n);
  j["chi_ratio"] = optional_json(rec.chi_ratio);
  j["transfer_time_g"] = optional_json(rec.transfer_time);
  j["iterations"] = r.iterations;
  j["residual"] = r.residual;
  j["warnings"] = r.warnings;
  for (const auto& [k, v] : r.extras) j[k] = v;
  json meta;
  meta["params"] = params_json(r.params);
  json settings = json::object();
  for (const auto& [k, v] : r.settings) settings[k] = v;
  meta["settings"] = settings;
  j["metadata"] = meta;
  return j.dump(2) + "\n";
}

std::string table_csv(const Table& t) {
  std::string s;
  for (size_t c = 0; c < t.columns.size(); ++c) s += (c ? "," : "") + t.columns[c];
  s += "\n";
  const size_t rows = t.data.empty() ? 0 : t.data.front().size();
  for (size_t i = 0; i < rows; ++i) {
    for (size_t c = 0; c < t.data.size(); ++c) s += (c ? "," : "") + number(t.data[c][i]);
    s += "\n";
  }
  return s;
}

void write_run(const RunResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::string stem = method_name(r.method);
  write_text(dir / (stem + "_summary.json"), summary_json(r));
  if (!r.spectrum.columns.empty()) write_text(dir / (stem + "_spectrum.csv"), table_csv(r.spectrum));
}

std::vector<double> SweepAxis::points() const {
  if (!values.empty()) return values;
  std::vector<double> v(count);
  for (int i = 0; i < count; ++i) {
    const double f = count > 1 ? double(i) / double(count - 1) : 0.0;
    v[i] = scale == AxisScale::Log ? min * std::pow(max / min, f) : min + (max - min) * f;
  }
  return v;
}

SweepSpec load_sweep_spec(const std::filesystem::path& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::Io, path.string() + ": " + e.what());
  }
  SweepSpec s;
  try {
    if (root["base"])
      for (const auto& kv : root["base"]) s.base[kv.first.as<std::string>()] = kv.second.as<double>();
    if (root["base_config"]) {
      const auto base = load_config(path.parent_path() / root["base_config"].as<std::string>());
      for (const auto& [k, v] : base) s.base.emplace(k, v);
    }
    for (const auto& a : root["axes"]) {
      SweepAxis axis;
      axis.name = a["name"].as<std::string>();
      if (a["values"]) {
        axis.values = a["values"].as<std::vector<double>>();
        axis.count = static_cast<int>(axis.values.size());
      } else {
        const std::string scale = a["scale"] ? a["scale"].as<std::string>() : "linear";
        if (scale != "linear" && scale != "log")
          throw Error(ErrorCode::InvalidArgument, "axis scale must be linear or log");
        axis.scale = scale == "log" ? AxisScale::Log : AxisScale::Linear;
        axis.min = a["min"].as<double>();
        axis.max = a["max"].as<double>();
        axis.count = a["count"].as<int>();
      }
      s.axes.push_back(axis);
    }
    if (root["mode"]) {
      const std::string mode = root["mode"].as<std::string>();
      if (mode != "grid" && mode != "zip") throw Error(ErrorCode::InvalidArgument, "mode must be grid or zip");
      s.zip = mode == "zip";
    }
    for (const auto& m : root["methods"]) s.methods.push_back(parse_method(m.as<std::string>()));
    if (root["out"]) s.out = root["out"].as<std::string>();
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::InvalidArgument, path.string() + ": " + e.what());
  }
  validate_sweep(s);
  return s;
}

void validate_sweep(const SweepSpec& s) {
  const Config known = to_config(SystemParams{});
  if (s.axes.empty()) throw Error(ErrorCode::InvalidArgument, "sweep needs at least one axis");
  for (const SweepAxis& a : s.axes) {
    if (!known.count(a.name) && a.name != "gamma")
      throw Error(ErrorCode::InvalidArgument, "'" + a.name + "' is not a system parameter");
    if (static_cast<int>(a.points().size()) < 2)
      throw Error(ErrorCode::InvalidArgument, "axis '" + a.name + "' needs at least two points");
    if (a.scale == AxisScale::Log && a.values.empty() && !(a.min > 0.0 && a.max > 0.0))
      throw Error(ErrorCode::InvalidArgument, "log axis '" + a.name + "' needs positive bounds");
  }
  if (s.zip)
    for (const SweepAxis& a : s.axes)
      if (a.points().size() != s.axes.front().points().size())
        throw Error(ErrorCode::InvalidArgument, "zip mode needs axes of equal length");
  if (s.methods.empty()) throw Error(ErrorCode::InvalidArgument, "sweep needs at least one method");
}

std::vector<Config> sweep_points(const SweepSpec& s) {
  validate_sweep(s);
  std::vector<Config> out;
  auto with = [&](Config c, const std::string& name, double v) {
    if (name == "gamma") {
      c["gamma1"] = c["gamma2"] = v;
      c.erase("gamma");
    } else {
      c[name] = v;
    }
    return c;
  };
  if (s.zip) {
    const size_t n = s.axes.front().points().size();
    for (size_t i = 0; i < n; ++i) {
      Config c = s.base;
      for (const SweepAxis& a : s.axes) c = with(c, a.name, a.points()[i]);
      out.push_back(c);
    }
    return out;
  }
  out.push_back(s.base);
  for (const SweepAxis& a : s.axes) {
    std::vector<Config> next;
    for (const Config& c : out)
      for (double v : a.points()) next.push_back(with(c, a.name, v));
    out = std::move(next);
  }
  return out;
}

std::vector<SweepRow> run_sweep(const SweepSpec& s, const RunOptions& o, int workers) {
  const std::vector<Config> points = sweep_points(s);
  std::vector<SweepRow> rows;
  for (const Config& c : points)
    for (Method m : s.methods) {
      SweepRow r;
      r.point = c;
      r.method = m;
      rows.push_back(std::move(r));
    }
  std::atomic<size_t> next{0};
  auto work = [&] {
    for (size_t i = next++; i < rows.size(); i = next++) {
      SweepRow& row = rows[i];
      try {
        row.result = run_single(build_params(row.point), row.method, o);
        row.ok = true;
      } catch (const std::exception& e) {
        row.error = e.what();
      }
    }
  };
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(rows.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return rows;
}

std::string sweep_csv(const SweepSpec& s, const std::vector<SweepRow>& rows) {
  std::vector<std::string> axes;
  for (const SweepAxis& a : s.axes) axes.push_back(a.name == "gamma" ? "gamma1" : a.name);
  std::string out;
  for (const std::string& a : axes) out += a + ",";
  out += "method,J,J0,deltaJ,nbar,omega_n,iterations,residual\n";
  for (const SweepRow& r : rows) {
    if (!r.ok) continue;
    for (const std::string& a : axes) out += number(r.point.at(a)) + ",";
    const ObservableRecord& rec = r.result.record;
    out += method_name(r.method) + "," + number(rec.J) + "," + number(rec.J0) + "," + number(rec.deltaJ) + "," +
           number(rec.nbar) + "," + (rec.omega_n ? number(*rec.omega_n) : std::string()) + "," +
           std::to_string(r.result.iterations) + "," + number(r.result.residual) + "\n";
  }
  return out;
}

std::string sweep_failures_csv(const SweepSpec& s, const std::vector<SweepRow>& rows) {
  std::string out;
  for (const SweepAxis& a : s.axes) out += (a.name == "gamma" ? "gamma1" : a.name) + ",";
  out += "method,error\n";
  for (const SweepRow& r : rows) {
    if (r.ok) continue;
    for (const SweepAxis& a : s.axes) out += number(r.point.at(a.name == "gamma" ? "gamma1" : a.name)) + ",";
    out += method_name(r.method) + "," + csv_field(r.error) + "\n";
  }
  return out;
}

Regime classify(const SystemParams& p) {
  Regime r;
  r.kappa_over_w2 = p.kappa / p.bandwidth2();
  r.cooperativity = p.cooperativity();
  r.dissipative = r.kappa_over_w2 >= 1.0;
  r.perturbative = r.cooperativity <= 1.0;
  return r;
}

bool within_domain(Method m, const Regime& r) {
  switch (m) {
    case Method::QmeFull: return true;
    case Method::QmeEff: return r.dissipative;
    case Method::Ngf: return r.perturbative;
    case Method::Rates: return r.dissipative && r.perturbative;
  }
  return false;
}

ComparisonReport compare_methods(const std::vector<RunResult>& results) {
  std::set<Method> methods;
  for (const RunResult& r : results) methods.insert(r.method);
  if (methods.size() < 2 || methods.size() != results.size())
    throw Error(ErrorCode::ParameterMismatch, "comparison needs one result for each of at least two methods");
  const Config ref = to_config(results.front().params);
  for (const RunResult& r : results)
    if (to_config(r.params) != ref)
      throw Error(ErrorCode::ParameterMismatch, method_name(r.method) + " ran at different parameters");
  ComparisonReport rep;
  rep.params = results.front().params;
  rep.regime = classify(rep.params);
  for (const RunResult& r : results) {
    rep.delta_j.push_back({r.method, r.record.deltaJ});
    if (!within_domain(r.method, rep.regime)) rep.out_of_domain.push_back(r.method);
  }
  for (size_t i = 0; i < results.size(); ++i)
    for (size_t k = i + 1; k < results.size(); ++k) {
      const double a = results[i].record.deltaJ, b = results[k].record.deltaJ;
      const double scale = std::max(std::abs(a), std::abs(b));
      PairDeviation d{results[i].method, results[k].method, scale > 0.0 ? std::abs(a - b) / scale : 0.0};
      rep.max_deviation = std::max(rep.max_deviation, d.deviation);
      rep.pairs.push_back(d);
    }
  return rep;
}

std::string comparison_json(const ComparisonReport& rep) {
  json j;
  j["params"] = params_json(rep.params);
  j["regime"] = {{"kappa_over_W2", rep.regime.kappa_over_w2},
                 {"cooperativity", rep.regime.cooperativity},
                 {"dissipative", rep.regime.dissipative},
                 {"perturbative", rep.regime.perturbative}};
  json dj = json::object();
  for (const auto& [m, v] : rep.delta_j) dj[method_name(m)] = v;
  j["deltaJ"] = dj;
  json pairs = json::array();
  for (const PairDeviation& d : rep.pairs)
    pairs.push_back({{"a", method_name(d.a)}, {"b", method_name(d.b)}, {"deviation", d.deviation}});
  j["pairs"] = pairs;
  j["max_deviation"] = rep.max_deviation;
  json ood = json::array();
  for (Method m : rep.out_of_domain) ood.push_back(method_name(m));
  j["out_of_domain"] = ood;
  return j.dump(2) + "\n";
}

}  // namespace cavitrans
