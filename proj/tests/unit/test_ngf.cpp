#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "cavitrans/errors.hpp"
#include "cavitrans/ngf.hpp"
#include "cavitrans/rates.hpp"

using namespace cavitrans;

namespace {

constexpr double kPi = std::numbers::pi;

SystemParams chain(int n, double t1, double t2, double gamma, double kappa, double g) {
  SystemParams p;
  p.n_sites = n;
  p.t1 = t1;
  p.t2 = t2;
  p.gamma1 = p.gamma2 = gamma;
  p.kappa = kappa;
  p.g = g;
  return p;
}

SystemParams standard_chain(double cooperativity) {
  return chain(3, 1e-4, 1e-2, 1e-3, 0.07, std::sqrt(cooperativity * 1e-3 * 0.07));
}

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(NgfFree, FlatBandLineCarriesFullWeight) {
  const SystemParams p = chain(2, 0.0, 0.0, 1e-3, 0.07, 0.0);
  GridOptions go;
  go.margin = 0.05;
  const FrequencyGrid grid = make_grid(p, go);
  const BlochBasis basis = bloch_basis(p);
  const KeldyshSet g0 = g0_electron(grid, basis, default_occupations(2));
  for (int b = 0; b < 2; ++b) {
    const ElectronBand& band = g0.band[b];
    double area = 0.0, peak = 0.0, peak_w = 0.0;
    for (long i = 0; i < band.points(); ++i) {
      const double a = -2.0 * band.block(band.retarded, i)(0, 0).imag();
      area += a * grid.h;
      if (a > peak) {
        peak = a;
        peak_w = grid.omega(band.window.first + i);
      }
    }
    const double lo = grid.omega(band.window.first) - 0.5 * grid.h - p.omega(b);
    const double hi = grid.omega(band.window.last()) + 0.5 * grid.h - p.omega(b);
    const double inside = 2.0 * (std::atan(hi / grid.eta) - std::atan(lo / grid.eta));
    EXPECT_NEAR(area, inside, 1e-9);
    EXPECT_NEAR(peak_w, p.omega(b), 0.5 * grid.h);
  }
}

TEST(NgfFree, FilledAndEmptyBandsHaveOneComponent) {
  const SystemParams p = standard_chain(0.1);
  const FrequencyGrid grid = make_grid(p);
  const KeldyshSet g0 = g0_electron(grid, bloch_basis(p), default_occupations(3));
  for (const cplx& x : g0.band[1].lesser) ASSERT_EQ(x, cplx(0.0));
  for (const cplx& x : g0.band[0].greater) ASSERT_EQ(x, cplx(0.0));
}

TEST(NgfFree, LinesSitAtTheDispersion) {
  const SystemParams p = chain(3, 1e-4, 1e-2, 1e-3, 0.07, 0.0);
  const FrequencyGrid grid = make_grid(p);
  const BlochBasis basis = bloch_basis(p);
  const KeldyshSet g0 = g0_electron(grid, basis, default_occupations(3));
  const ElectronBand& band = g0.band[1];
  std::vector<double> maxima;
  std::vector<double> dos(band.points());
  for (long i = 0; i < band.points(); ++i) dos[i] = -2.0 * band.block(band.retarded, i).trace().imag();
  for (long i = 1; i + 1 < band.points(); ++i)
    if (dos[i] > dos[i - 1] && dos[i] >= dos[i + 1]) maxima.push_back(grid.omega(band.window.first + i));
  ASSERT_EQ(maxima.size(), 3u);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(maxima[k], basis.dispersion[1](k), 0.5 * grid.h);
}

TEST(NgfFree, OccupationsAreValidated) {
  const SystemParams p = standard_chain(0.1);
  const FrequencyGrid grid = make_grid(p);
  Eigen::VectorXd n0 = default_occupations(3);
  n0(0) = 1.5;
  EXPECT_THROW(g0_electron(grid, bloch_basis(p), n0), Error);
  EXPECT_THROW(g0_electron(grid, bloch_basis(p), Eigen::VectorXd::Zero(4)), Error);
}

TEST(NgfLeads, InjectionAndExtractionProjectors) {
  for (int n : {2, 3, 7}) {
    const SystemParams p = chain(n, 1e-4, 1e-2, 1e-3, 0.07, 0.0);
    const BlochBasis basis = bloch_basis(p);
    const LeadSelfEnergy s = lead_self_energy(p, basis);
    for (int b = 0; b < 2; ++b) {
      EXPECT_NEAR((-cplx(0, 1) * s.lesser[b]).trace().real(), 1e-3, 1e-15);
      EXPECT_NEAR((cplx(0, 1) * s.greater[b]).trace().real(), 1e-3, 1e-15);
      EXPECT_LT(max_abs(s.lesser[b] - cplx(0, 1e-3) * basis.sigma1.cast<cplx>()), 1e-18);
      EXPECT_LT(max_abs(s.retarded[b] + cplx(0, 0.5e-3) * (basis.sigma1 + basis.sigmaN).cast<cplx>()), 1e-18);
    }
  }
}

TEST(NgfDyson, ReproducesFreeFunctionsFromDeltaSelfEnergy) {
  const SystemParams p = chain(3, 1e-4, 1e-2, 1e-3, 0.07, 0.0);
  const FrequencyGrid grid = make_grid(p);
  const BlochBasis basis = bloch_basis(p);
  Eigen::VectorXd n0(6);
  n0 << 1.0, 0.7, 0.2, 0.5, 0.0, 0.9;
  for (Quadrature q : {Quadrature::Cell, Quadrature::Point}) {
    const KeldyshSet g0 = g0_electron(grid, basis, n0, q);
    KeldyshSet g = allocate_electrons(grid, 3);
    LeadSelfEnergy s;
    for (int b = 0; b < 2; ++b) {
      const Eigen::VectorXd occ = n0.segment(3 * b, 3);
      s.retarded[b] = cplx(0, -grid.eta) * Eigen::MatrixXcd::Identity(3, 3);
      s.lesser[b] = (cplx(0, 2.0 * grid.eta) * occ.cast<cplx>()).asDiagonal();
      s.greater[b] = (cplx(0, -2.0 * grid.eta) * (1.0 - occ.array()).matrix().cast<cplx>()).asDiagonal();
    }
    dyson_keldysh_electron(g, basis, s, grid, q);
    for (int b = 0; b < 2; ++b) {
      double scale = 0.0, err = 0.0;
      for (size_t i = 0; i < g.band[b].retarded.size(); ++i) {
        scale = std::max(scale, std::abs(g0.band[b].retarded[i]));
        err = std::max({err, std::abs(g.band[b].retarded[i] - g0.band[b].retarded[i]),
                        std::abs(g.band[b].lesser[i] - g0.band[b].lesser[i]),
                        std::abs(g.band[b].greater[i] - g0.band[b].greater[i])});
      }
      EXPECT_LT(err, 1e-9 * scale);
    }
  }
}

TEST(NgfSelfEnergy, VanishesWithoutCoupling) {
  const SystemParams p = standard_chain(0.1);
  const FrequencyGrid grid = make_grid(p);
  NgfWorkspace ws(grid, 3);
  KeldyshSet g = g0_electron(grid, bloch_basis(p), default_occupations(3));
  const PhotonKeldysh d = bath_only_photon(p, ws);
  lm_electron_self_energy(g, d, 0.0, ws);
  for (int b = 0; b < 2; ++b)
    for (const cplx& x : g.band[b].sigma_lesser) ASSERT_EQ(x, cplx(0.0));
  const PhotonKeldysh pi = photon_polarization(g, 0.0, ws);
  for (const cplx& x : pi.pi_lesser) ASSERT_EQ(x, cplx(0.0));
}

// Bath-dressed cavity and free electrons against the closed-form broadening
// function evaluated at the same frequencies.
TEST(NgfSelfEnergy, FirstOrderBroadeningMatchesClosedForm) {
  const SystemParams p = chain(3, 1e-4, 1e-2, 1e-3, 0.1, 2.2e-3);
  GridOptions go;
  go.spacing = 1e-5;
  go.margin = 0.05;
  go.eta_factor = 2.0;
  const FrequencyGrid grid = make_grid(p, go);
  const BlochBasis basis = bloch_basis(p);
  const Eigen::VectorXd n0 = Eigen::VectorXd::Constant(6, 0.5);
  NgfWorkspace ws(grid, 3);
  KeldyshSet g = g0_electron(grid, basis, n0);
  const PhotonKeldysh d = bath_only_photon(p, ws);
  lm_electron_self_energy(g, d, p.g, ws);
  for (int b = 0; b < 2; ++b) {
    const ElectronBand& band = g.band[b];
    for (double offset : {-0.03, -0.004, 0.0, 0.011, 0.03}) {
      const long n = std::lround((p.omega(b) + offset) / grid.h);
      const long i = band.window.offset(n);
      const Eigen::MatrixXcd chi = band.broadening(i);
      const Eigen::VectorXd ref = first_order_broadening(p, basis, b, grid.omega(n), n0);
      for (int k = 0; k < 3; ++k) {
        EXPECT_NEAR(chi(k, k).real(), ref(k), 1e-3 * ref(k)) << b << " " << offset << " " << k;
        EXPECT_NEAR(chi(k, k).imag(), 0.0, 1e-12);
      }
      EXPECT_LT(max_abs(chi - Eigen::MatrixXcd(chi.diagonal().asDiagonal())), 1e-12);
    }
  }
}

TEST(NgfSelfEnergy, DissipativeBroadeningIsFourGammaC) {
  const SystemParams p = chain(3, 1e-4, 1e-2, 1e-3, 0.1, 2.2e-3);
  const BlochBasis basis = bloch_basis(p);
  const Eigen::VectorXd n0 = Eigen::VectorXd::Ones(6);
  for (int k = 0; k < 3; ++k) {
    const double chi = first_order_broadening(p, basis, 0, basis.dispersion[0](k), n0)(k);
    EXPECT_NEAR(chi, 4.0 * p.gamma_c(), (k == 1 ? 1e-12 : 0.1) * 4.0 * p.gamma_c());
  }
  EXPECT_NEAR(4.0 * p.gamma_c(), 1.936e-4, 1e-9);
  // With the lower band initially full the upper states cannot decay at first order.
  EXPECT_EQ(first_order_broadening(p, basis, 0, basis.dispersion[0](1), default_occupations(3))(1), 0.0);
}

TEST(NgfRetarded, ConstantBroadeningGivesPureDamping) {
  ElectronBand band;
  band.n = 2;
  band.window = Window{-500, 1001};
  const long size = band.points() * band.stride();
  band.sigma_lesser.assign(size, cplx(0.0));
  band.sigma_greater.assign(size, cplx(0.0));
  band.sigma_retarded.assign(size, cplx(0.0));
  for (long i = 0; i < band.points(); ++i) {
    band.block(band.sigma_greater, i) << cplx(0, -3e-3), cplx(1e-3, 0), cplx(-1e-3, 0), cplx(0, -1e-3);
  }
  HilbertTransform ht(band.points());
  retarded_from_components(band, ht);
  const Eigen::MatrixXcd mid = band.block(band.sigma_retarded, 500);
  const Eigen::MatrixXcd chi = band.broadening(500);
  EXPECT_LT(max_abs(mid + cplx(0, 0.5) * chi), 1e-15);
}

TEST(NgfRetarded, LorentzianBroadeningGivesDispersiveShift) {
  ElectronBand band;
  band.n = 2;
  const double h = 1e-4, w0 = 0.3, width = 2e-3, amp = 1e-3;
  band.window = Window{static_cast<long>(std::lround(0.2 / h)), 2001};
  const long size = band.points() * band.stride();
  band.sigma_lesser.assign(size, cplx(0.0));
  band.sigma_greater.assign(size, cplx(0.0));
  band.sigma_retarded.assign(size, cplx(0.0));
  for (long i = 0; i < band.points(); ++i) {
    const double x = (band.window.first + i) * h - w0;
    const double chi = amp * width / (x * x + width * width);
    band.block(band.sigma_greater, i)(0, 0) = cplx(0, -chi);
  }
  HilbertTransform ht(band.points());
  retarded_from_components(band, ht);
  for (double x : {-0.02, -0.005, -0.001, 0.0, 0.0015, 0.01}) {
    const long i = band.window.offset(std::lround((w0 + x) / h));
    const double xs = (band.window.first + i) * h - w0;
    const cplx s = band.block(band.sigma_retarded, i)(0, 0);
    const double ref = 0.5 * amp * xs / (xs * xs + width * width);
    const double chi = amp * width / (xs * xs + width * width);
    EXPECT_NEAR(s.real(), ref, 2e-3 * amp / width) << x;
    EXPECT_NEAR(s.imag(), -0.5 * chi, 1e-15);
  }
}

TEST(NgfPhoton, BathSelfEnergySteps) {
  const BathSelfEnergy pos = photon_bath_self_energy(0.07, 0.3);
  EXPECT_EQ(pos.lesser, cplx(0.0));
  EXPECT_EQ(pos.greater, cplx(0.0, -0.07));
  const BathSelfEnergy neg = photon_bath_self_energy(0.07, -0.3);
  EXPECT_EQ(neg.lesser, cplx(0.0, -0.07));
  EXPECT_EQ(neg.greater, cplx(0.0));
  const BathSelfEnergy zero = photon_bath_self_energy(0.07, 0.0);
  EXPECT_EQ(zero.lesser, cplx(0.0, -0.035));
  EXPECT_EQ(zero.retarded, cplx(0.0));
  const BathSelfEnergy none = photon_bath_self_energy(0.0, 0.5);
  EXPECT_EQ(none.lesser, cplx(0.0));
  EXPECT_EQ(none.greater, cplx(0.0));
}

TEST(NgfPhoton, BathOnlyPropagatorMatchesClosedForm) {
  const SystemParams p = standard_chain(0.1);
  const FrequencyGrid grid = make_grid(p);
  NgfWorkspace ws(grid, 3);
  const PhotonKeldysh d = bath_only_photon(p, ws);
  double peak = 0.0, peak_w = 0.0;
  for (long i = 0; i < d.points(); ++i) {
    const long n = d.window.first + i;
    const double w = grid.omega(n);
    if (std::abs(w) > 1e-3) {
      EXPECT_LT(std::abs(d.retarded[i] - bath_photon_propagator(p, w)), 1e-6 * std::abs(d.retarded[i]));
    }
    EXPECT_LT(std::abs(d.retarded[i] - std::conj(d.retarded[d.window.offset(-n)])), 1e-14);
    const double a = -2.0 * d.retarded[i].imag();
    if (w > 0.0) EXPECT_GE(a, -1e-8);
    if (a > peak) {
      peak = a;
      peak_w = w;
    }
  }
  EXPECT_NEAR(peak_w, p.omega_c, 1e-3);
  EXPECT_NEAR(peak, 4.0 / p.kappa, 0.01 * 4.0 / p.kappa);
  const CavitySpectrum cav = cavity_dos_and_nbar(d, p, grid);
  EXPECT_LT(std::abs(cav.nbar), 1e-3);
}

TEST(NgfPhoton, EmptyBandsCannotEmit) {
  const SystemParams p = standard_chain(0.1);
  const FrequencyGrid grid = make_grid(p);
  NgfWorkspace ws(grid, 3);
  const KeldyshSet g = g0_electron(grid, bloch_basis(p), Eigen::VectorXd::Zero(6));
  const PhotonKeldysh pi = photon_polarization(g, p.g, ws);
  for (const cplx& x : pi.pi_lesser) ASSERT_EQ(x, cplx(0.0));
}

TEST(NgfPhoton, FirstOrderPolarizationMatchesClosedForm) {
  const SystemParams p = chain(3, 1e-4, 1e-2, 1e-3, 0.07, 0.01);
  GridOptions go;
  go.margin = 0.1;
  const FrequencyGrid grid = make_grid(p, go);
  const BlochBasis basis = bloch_basis(p);
  Eigen::VectorXd n0(6);
  n0 << 1.0, 1.0, 0.8, 0.1, 0.0, 0.3;
  NgfWorkspace ws(grid, 3);
  const KeldyshSet g = g0_electron(grid, basis, n0);
  PhotonKeldysh d = photon_polarization(g, p.g, ws);
  dyson_keldysh_photon(d, p, ws);
  for (double w : {0.9, 0.95, 0.975, 1.02, 1.05, 1.1, -0.95, -1.04}) {
    const long n = std::lround(w / grid.h);
    const cplx got = d.pi_retarded[d.window.offset(n)];
    const cplx ref = first_order_polarization(p, basis, grid.omega(n), n0, 2.0 * grid.eta);
    // the seed lines are cut at the band windows, which removes a fraction eta/margin of their weight
    EXPECT_LT(std::abs(got - ref), 1e-2 * std::abs(ref)) << w;
  }
  // Absorption lines at the interband energies, with weight set by the population imbalance.
  for (int k = 0; k < 3; ++k) {
    const double dk = basis.dispersion[1](k) - basis.dispersion[0](k);
    const long n = std::lround(dk / grid.h);
    const cplx got = d.pi_retarded[d.window.offset(n)];
    const cplx ref = first_order_polarization(p, basis, grid.omega(n), n0, 2.0 * grid.eta);
    EXPECT_NEAR(got.imag(), ref.imag(), 0.02 * std::abs(ref.imag())) << k;
  }
}

TEST(NgfPhoton, PolaritonPoles) {
  const auto [lo, hi] = polariton_poles(1.0, 0.05);
  EXPECT_NEAR(lo, std::sqrt(0.9), 1e-12);
  EXPECT_NEAR(hi, std::sqrt(1.1), 1e-12);
  EXPECT_NEAR(lo, 0.9487, 1e-4);
  EXPECT_NEAR(hi, 1.0488, 1e-4);
  // Independent check: roots of the lossless Dyson denominator by bisection.
  auto den = [](double w) {
    const double omega = 0.05;
    return (w * w - 1.0) / 2.0 - 2.0 * omega * omega / (w * w - 1.0);
  };
  for (auto [a, b, pole] : {std::tuple{0.9, 0.999, lo}, std::tuple{1.001, 1.1, hi}}) {
    for (int it = 0; it < 100; ++it) {
      const double m = 0.5 * (a + b);
      (den(a) * den(m) <= 0.0 ? b : a) = m;
    }
    EXPECT_NEAR(0.5 * (a + b), pole, 1e-10);
  }
}

TEST(Scba, DecoupledChainReproducesClosedForm) {
  const SystemParams p = chain(3, 1e-4, 1e-2, 1e-3, 0.07, 0.0);
  const ScbaResult r = scba_fixed_point(p);
  EXPECT_EQ(r.iterations, 1);
  const NgfCurrents c = transmission_and_current(r, p);
  EXPECT_NEAR(c.band[1] / p.gamma2, 0.49875, 0.005 * 0.49875);
  EXPECT_NEAR(c.band[0] / p.gamma1, 0.019231, 0.005 * 0.019231);
  EXPECT_NEAR(c.total / p.gamma1, 0.51798, 0.005 * 0.51798);
  const Eigen::MatrixXd pop = populations_real_space(r);
  EXPECT_NEAR(pop(1, 2), 0.498753, 1e-5);
  EXPECT_NEAR(pop(1, 0), 0.5 + (0.5 - 0.498753), 1e-5);
  EXPECT_NEAR(pop(0, 0), 1.0 - pop(0, 2), 1e-5);
  EXPECT_GT(pop(0, 0), 0.95);
  EXPECT_NEAR(pop(0, 1), 0.5, 1e-3);
  const CavitySpectrum cav = cavity_dos_and_nbar(r.photon, p, r.grid);
  EXPECT_LT(std::abs(cav.nbar), 1e-3);
}

TEST(Scba, BlockedChainHasNoCurrent) {
  const SystemParams p = chain(3, 0.0, 0.0, 1e-3, 0.07, 0.0);
  const ScbaResult r = scba_fixed_point(p);
  const NgfCurrents c = transmission_and_current(r, p);
  EXPECT_LT(std::abs(c.total), 1e-9);
  const Eigen::MatrixXd pop = populations_real_space(r);
  for (int b = 0; b < 2; ++b) {
    EXPECT_NEAR(pop(b, 0), 1.0, 1e-6);
    EXPECT_NEAR(pop(b, 2), 0.0, 1e-6);
  }
}

TEST(Scba, InvariantsAtConvergence) {
  const SystemParams p = standard_chain(0.1);
  const ScbaResult r = scba_fixed_point(p);
  EXPECT_LT(r.residual, 1e-8);
  EXPECT_TRUE(r.warnings.empty());
  for (const auto& w : spectral_weights(r)) EXPECT_LT(max_abs(w - Eigen::MatrixXcd::Identity(3, 3)), 1e-2);
  for (int b = 0; b < 2; ++b) {
    const ElectronBand& band = r.electrons.band[b];
    for (long i = 0; i < band.points(); i += 97) {
      const Eigen::MatrixXcd gl = band.block(band.lesser, i), gg = band.block(band.greater, i);
      const Eigen::MatrixXcd gr = band.block(band.retarded, i);
      const double scale = max_abs(gr) + max_abs(gl);
      EXPECT_LT(max_abs(gl + gl.adjoint()), 1e-12 * scale);
      EXPECT_LT(max_abs(gg + gg.adjoint()), 1e-12 * scale);
      EXPECT_LT(max_abs((gg - gl) - (gr - gr.adjoint())), 1e-9 * scale);
    }
  }
  const NgfCurrents c = transmission_and_current(r, p);
  EXPECT_NEAR(c.total, c.total_population, 0.01 * c.total);
  EXPECT_GT(c.total, g0_total_current(p));
  const Eigen::MatrixXd pop = populations_real_space(r);
  EXPECT_GT(pop(0, 2), g0_current(p.t1, p.gamma1).edge_population);
}

TEST(Scba, ConvergedCurrentForgetsInitialOccupations) {
  const SystemParams p = standard_chain(0.1);
  ScbaOptions o;
  const double j_default = transmission_and_current(scba_fixed_point(p, o), p).total;
  o.n0 = Eigen::VectorXd::Constant(6, 0.5);
  const double j_half = transmission_and_current(scba_fixed_point(p, o), p).total;
  EXPECT_NEAR(j_half, j_default, 0.01 * j_default);
}

TEST(Scba, RejectsThermalCavityPhotons) {
  SystemParams p = chain(3, 1e-4, 1e-2, 1e-3, 0.07, 1e-3);
  p.n_photon_bath = 0.1;
  try {
    scba_fixed_point(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
  }
}

TEST(Scba, ReportsNonConvergence) {
  const SystemParams p = standard_chain(0.1);
  ScbaOptions o;
  o.max_iter = 3;
  try {
    scba_fixed_point(p, o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotConverged);
  }
}

TEST(Scba, WarnsBeyondPerturbativeRange) {
  const SystemParams p = chain(2, 1e-4, 1e-2, 1e-3, 0.07, std::sqrt(2.0 * 1e-3 * 0.07));
  ScbaOptions o;
  o.max_iter = 2;
  o.tol = 100.0;
  const ScbaResult r = scba_fixed_point(p, o);
  ASSERT_FALSE(r.warnings.empty());
  EXPECT_NE(r.warnings.back().find("exceeds 1"), std::string::npos);
}
