#include <gtest/gtest.h>

#include <cmath>
#include <thread>

#include "cavitrans/errors.hpp"
#include "cavitrans/harness.hpp"

using namespace cavitrans;

namespace {

Config standard_config(double cooperativity) {
  return {{"n_sites", 3},  {"t1", 1e-4},     {"t2", 1e-2},        {"gamma", 1e-3},
          {"omega1", -0.5}, {"omega2", 0.5}, {"omega_c", 1.0},    {"kappa", 0.07},
          {"g", std::sqrt(cooperativity * 1e-3 * 0.07)}};
}

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Io;
}

}  // namespace

TEST(Harness, MethodNamesRoundTrip) {
  for (Method m : {Method::Ngf, Method::QmeFull, Method::QmeEff, Method::Rates})
    EXPECT_EQ(parse_method(method_name(m)), m);
  EXPECT_EQ(code_of([] { parse_method("dmrg"); }), ErrorCode::InvalidArgument);
}

TEST(Harness, DecoupledRunsHaveNoEnhancement) {
  const SystemParams p = build_params(standard_config(0.0));
  for (Method m : {Method::Ngf, Method::QmeFull, Method::QmeEff, Method::Rates}) {
    const RunResult r = run_single(p, m);
    EXPECT_NEAR(r.record.deltaJ, 0.0, m == Method::Ngf ? 5e-3 : 1e-8) << method_name(m);
    EXPECT_NEAR(r.record.deltaJ, delta_j(r.record.J, r.record.J0), 1e-15);
  }
}

TEST(Harness, SummaryIsReproducible) {
  const SystemParams p = build_params(standard_config(0.1));
  const std::string a = summary_json(run_single(p, Method::QmeEff));
  const std::string b = summary_json(run_single(p, Method::QmeEff));
  EXPECT_EQ(a, b);
  for (const char* key : {"\"J\"", "\"J1\"", "\"J2\"", "\"deltaJ\"", "\"nbar\"", "\"populations\"",
                          "\"iterations\"", "\"residual\"", "\"metadata\""})
    EXPECT_NE(a.find(key), std::string::npos) << key;
}

TEST(Harness, NgfSpectrumColumns) {
  RunOptions o;
  o.ngf.grid.spacing = 2e-4;
  const RunResult r = run_single(build_params(standard_config(0.0)), Method::Ngf, o);
  ASSERT_EQ(r.spectrum.columns, (std::vector<std::string>{"omega", "T1", "T2", "Ac", "ImD_less"}));
  for (const auto& c : r.spectrum.data) EXPECT_EQ(c.size(), r.spectrum.data.front().size());
  const std::string csv = table_csv(r.spectrum);
  EXPECT_EQ(csv.rfind("omega,T1,T2,Ac,ImD_less\n", 0), 0u);
}

TEST(Harness, ErrorsCarryTheMethod) {
  SystemParams p = build_params(standard_config(0.1));
  RunOptions o;
  o.ngf.max_iter = 2;
  o.ngf.tol = 1e-14;
  try {
    run_single(p, Method::Ngf, o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotConverged);
    EXPECT_NE(std::string(e.what()).find("ngf"), std::string::npos);
  }
}

TEST(Sweep, GridAndZipPoints) {
  SweepSpec s;
  s.base = standard_config(0.1);
  s.axes = {{"g", AxisScale::Log, 1e-3, 1e-1, 3, {}}, {"kappa", AxisScale::Linear, 0.0, 0.0, 0, {0.07, 0.28}}};
  s.methods = {Method::Rates};
  const auto grid = sweep_points(s);
  ASSERT_EQ(grid.size(), 6u);
  EXPECT_NEAR(grid[2].at("g"), 1e-2, 1e-15);
  EXPECT_EQ(grid[3].at("kappa"), 0.28);
  s.axes[0] = {"g", AxisScale::Linear, 0.0, 0.0, 0, {2e-3, 4e-3}};
  s.zip = true;
  const auto zip = sweep_points(s);
  ASSERT_EQ(zip.size(), 2u);
  EXPECT_EQ(zip[1].at("g"), 4e-3);
  EXPECT_EQ(zip[1].at("kappa"), 0.28);
}

TEST(Sweep, SpecValidation) {
  SweepSpec s;
  s.base = standard_config(0.1);
  s.methods = {Method::Rates};
  s.axes = {{"temperature", AxisScale::Linear, 0.0, 1.0, 3, {}}};
  EXPECT_EQ(code_of([&] { validate_sweep(s); }), ErrorCode::InvalidArgument);
  s.axes = {{"g", AxisScale::Linear, 0.0, 1.0, 1, {}}};
  EXPECT_EQ(code_of([&] { validate_sweep(s); }), ErrorCode::InvalidArgument);
  s.axes = {{"g", AxisScale::Linear, 0.0, 1.0, 2, {}}};
  s.methods.clear();
  EXPECT_EQ(code_of([&] { validate_sweep(s); }), ErrorCode::InvalidArgument);
}

TEST(Sweep, CooperativityDiagonalIsInvariantForEffectiveQme) {
  SweepSpec s;
  s.base = standard_config(0.1);
  const double g = s.base.at("g");
  s.axes = {{"g", AxisScale::Linear, 0, 0, 0, {g, 2.0 * g}}, {"kappa", AxisScale::Linear, 0, 0, 0, {0.07, 0.28}}};
  s.zip = true;
  s.methods = {Method::QmeEff};
  const auto rows = run_sweep(s, {}, 2);
  ASSERT_EQ(rows.size(), 2u);
  ASSERT_TRUE(rows[0].ok && rows[1].ok);
  EXPECT_NEAR(rows[0].result.record.deltaJ, rows[1].result.record.deltaJ, 1e-8);
}

TEST(Sweep, FailuresAreIsolatedAndRowsOrdered) {
  SweepSpec s;
  s.base = standard_config(0.1);
  s.axes = {{"kappa", AxisScale::Linear, 0, 0, 0, {0.07, -1.0, 0.28}}};
  s.methods = {Method::Rates, Method::QmeEff};
  const auto one = run_sweep(s, {}, 1);
  const auto three = run_sweep(s, {}, 3);
  ASSERT_EQ(one.size(), 6u);
  long failed = 0;
  for (size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one[i].ok, three[i].ok);
    EXPECT_EQ(one[i].method, three[i].method);
    failed += !one[i].ok;
    if (one[i].ok) EXPECT_EQ(summary_json(one[i].result), summary_json(three[i].result));
  }
  EXPECT_EQ(failed, 2);
  EXPECT_NE(one[2].error.find("NonPositiveRate"), std::string::npos);
  const std::string csv = sweep_csv(s, one);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 3 * 2 - failed);
  EXPECT_EQ(csv, sweep_csv(s, three));
  const std::string bad = sweep_failures_csv(s, one);
  EXPECT_EQ(std::count(bad.begin(), bad.end(), '\n'), 1 + failed);
}

TEST(Compare, PerturbativeDissipativePointAgrees) {
  const SystemParams p = build_params(standard_config(0.01));
  const ComparisonReport rep =
      compare_methods({run_single(p, Method::QmeFull), run_single(p, Method::QmeEff)});
  EXPECT_TRUE(rep.regime.dissipative);
  EXPECT_TRUE(rep.regime.perturbative);
  EXPECT_TRUE(rep.out_of_domain.empty());
  ASSERT_EQ(rep.pairs.size(), 1u);
  EXPECT_LT(rep.max_deviation, 0.2);
}

TEST(Compare, CoherentPointFlagsEffectiveQme) {
  Config c = standard_config(0.1);
  c["kappa"] = 8e-4;
  c["g"] = std::sqrt(0.1 * 1e-3 * 8e-4);
  const SystemParams p = build_params(c);
  const ComparisonReport rep = compare_methods({run_single(p, Method::QmeEff), run_single(p, Method::Rates)});
  EXPECT_FALSE(rep.regime.dissipative);
  EXPECT_EQ(rep.out_of_domain.size(), 2u);
  EXPECT_EQ(rep.out_of_domain.front(), Method::QmeEff);
}

TEST(Compare, MismatchedInputs) {
  const SystemParams p = build_params(standard_config(0.1));
  const RunResult a = run_single(p, Method::Rates);
  EXPECT_EQ(code_of([&] { compare_methods({a}); }), ErrorCode::ParameterMismatch);
  EXPECT_EQ(code_of([&] { compare_methods({a, a}); }), ErrorCode::ParameterMismatch);
  SystemParams q = p;
  q.kappa *= 2.0;
  EXPECT_EQ(code_of([&] { compare_methods({a, run_single(q, Method::QmeEff)}); }), ErrorCode::ParameterMismatch);
}
