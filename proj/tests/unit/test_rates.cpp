#include <gtest/gtest.h>

#include <cmath>
#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "cavitrans/errors.hpp"
#include "cavitrans/rates.hpp"

using namespace cavitrans;

namespace {

// Single-particle correlation matrix of a boundary-driven tight-binding chain,
// solved as a dense Sylvester system. Returns Gamma * <n_N>.
double lyapunov_current(int n, double t, double gamma) {
  using Eigen::MatrixXcd;
  MatrixXcd h = MatrixXcd::Zero(n, n);
  for (int j = 0; j + 1 < n; ++j) h(j, j + 1) = h(j + 1, j) = -t;
  MatrixXcd loss = MatrixXcd::Zero(n, n);
  loss(0, 0) = loss(n - 1, n - 1) = 0.5 * gamma;
  const MatrixXcd x = std::complex<double>(0.0, -1.0) * h - loss;
  const MatrixXcd id = MatrixXcd::Identity(n, n);
  const MatrixXcd op = Eigen::kroneckerProduct(id, x) + Eigen::kroneckerProduct(x.conjugate(), id);
  Eigen::VectorXcd src = Eigen::VectorXcd::Zero(n * n);
  src(0) = -gamma;
  const Eigen::VectorXcd c = op.fullPivLu().solve(src);
  return gamma * c(n * n - 1).real();
}

SystemParams two_site(double t2, double gamma, double g, double kappa) {
  SystemParams p;
  p.n_sites = 2;
  p.t1 = 0.0;
  p.t2 = t2;
  p.gamma1 = p.gamma2 = gamma;
  p.kappa = kappa;
  p.g = g;
  return p;
}

}  // namespace

TEST(G0Current, FrozenValue) {
  const BandCurrent c = g0_current(1e-2, 1e-3);
  EXPECT_NEAR(c.current, 4.987531172069825e-4, 1e-16);
  EXPECT_NEAR(c.edge_population, 0.49875311720698257, 1e-14);
}

TEST(G0Current, MatchesLyapunovForAnyLength) {
  for (int n : {2, 3, 4, 7, 11})
    for (double ratio : {0.01, 0.3, 1.0, 5.0}) {
      const double t = 1e-2, gamma = ratio * t;
      EXPECT_NEAR(g0_current(t, gamma).current, lyapunov_current(n, t, gamma), 1e-12 * t) << n << " " << ratio;
    }
}

TEST(G0Current, Limits) {
  EXPECT_DOUBLE_EQ(g0_current(0.0, 1e-3).current, 0.0);
  EXPECT_NEAR(g0_current(1.0, 1e-8).current, 0.5e-8, 1e-20);
  EXPECT_THROW(g0_current(1e-2, 0.0), Error);
}

TEST(MeanField, ReducesToDecoupledBandWithoutCavity) {
  const SystemParams p = two_site(1e-2, 1e-3, 0.0, 0.07);
  const MeanFieldResult r = meanfield_steady_current(p);
  EXPECT_NEAR(r.current, g0_current(1e-2, 1e-3).current, 1e-15);
  EXPECT_NEAR(r.current_g0, r.current, 1e-15);
  EXPECT_NEAR(r.delta_j, 0.0, 1e-12);
}

TEST(MeanField, StationaryAndChargeConserving) {
  for (double g : {1e-3, 5e-3, 2e-2}) {
    const SystemParams p = two_site(1e-2, 1e-3, g, 0.07);
    const MeanFieldResult r = meanfield_steady_current(p);
    const RateState d = meanfield_ode_rhs(r.state, p);
    const double scale = p.gamma2;
    EXPECT_LT(std::abs(d.n11) + std::abs(d.n12) + std::abs(d.n21) + std::abs(d.n22) + std::abs(d.C), 1e-12 * scale);
    EXPECT_NEAR(1.0 - r.state.n21, r.state.n12 + r.state.n22, 1e-10);
    EXPECT_GT(r.delta_j, 0.0);
    for (double x : {r.state.n11, r.state.n12, r.state.n21, r.state.n22}) {
      EXPECT_GE(x, -1e-12);
      EXPECT_LE(x, 1.0 + 1e-12);
    }
  }
}

TEST(MeanField, CurrentGrowsWithCoupling) {
  double last = 0.0;
  for (double g : {1e-3, 3e-3, 1e-2, 3e-2}) {
    const MeanFieldResult r = meanfield_steady_current(two_site(1e-2, 1e-3, g, 0.07));
    EXPECT_GT(r.current, last);
    last = r.current;
  }
}

TEST(MeanField, PerturbativeSlope) {
  const SystemParams p = two_site(1e-2, 1e-3, std::sqrt(1e-5 * 0.07), 0.07);  // Gamma_c/Gamma = 0.01
  const MeanFieldResult r = meanfield_steady_current(p);
  const PerturbativeDeltaJ d = delta_j_perturbative(p);
  EXPECT_FALSE(d.beyond_validity);
  EXPECT_NEAR(r.delta_j / d.full, 1.0, 0.05);
  EXPECT_NEAR(d.full / d.simplified, 1e-4 / (1e-4 + 0.25e-6), 1e-12);
}

TEST(MeanField, PerturbativeValidityFlag) {
  const SystemParams p = two_site(1e-2, 1e-3, std::sqrt(0.5e-3 * 0.07), 0.07);
  EXPECT_TRUE(delta_j_perturbative(p).beyond_validity);
}

TEST(MeanField, PhiFactorLimits) {
  EXPECT_DOUBLE_EQ(phi_factor(0.0, 1e-3, 0.3), 1.0);
  EXPECT_NEAR(phi_factor(1e3, 1e-3, 0.5), 0.5 / 1.5, 1e-6);
}
