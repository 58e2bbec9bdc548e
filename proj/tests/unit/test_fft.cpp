#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cavitrans/errors.hpp"
#include "cavitrans/fft.hpp"
#include "cavitrans/grid.hpp"

using namespace cavitrans;

namespace {

std::vector<cplx> random_series(long n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> d;
  std::vector<cplx> v(n);
  for (auto& x : v) x = cplx(d(rng), d(rng));
  return v;
}

}  // namespace

TEST(FftSize, FriendlySizesFactorIntoSmallPrimes) {
  for (long n : {1L, 2L, 17L, 1000L, 65537L, 123457L}) {
    long s = fft_friendly_size(n);
    EXPECT_GE(s, n);
    EXPECT_LE(s, 2 * n);
    for (long p : {2L, 3L, 5L, 7L})
      while (s % p == 0) s /= p;
    EXPECT_EQ(s, 1);
  }
}

TEST(LatticeCorrelator, MatchesDirectSumWithOffsetWindows) {
  const Window a{-40, 97}, b{13, 31}, out{-70, 150};
  const auto av = random_series(a.count, 1), bv = random_series(b.count, 2);
  LatticeCorrelator corr(a, b, out);
  corr.set_kernel(bv.data());
  std::vector<cplx> got(out.count);
  corr.apply(av.data(), 1, got.data(), 1, cplx(0.0, 2.0));
  for (long i = 0; i < out.count; ++i) {
    const long n = out.first + i;
    cplx ref = 0.0;
    for (long j = 0; j < b.count; ++j) {
      const long m = b.first + j;
      if (a.contains(n + m)) ref += av[a.offset(n + m)] * bv[j];
    }
    EXPECT_LT(std::abs(got[i] - cplx(0.0, 2.0) * ref), 1e-11) << n;
  }
}

TEST(LatticeCorrelator, StridedAccessAndSplitFormAgree) {
  const Window a{0, 50}, b{-20, 25}, out{-10, 60};
  const long stride = 3;
  const auto av = random_series(a.count * stride, 3), bv = random_series(b.count * stride, 4);
  LatticeCorrelator corr(a, b, out);
  corr.set_kernel(bv.data() + 1, stride);
  std::vector<cplx> direct(out.count * 2);
  corr.apply(av.data() + 2, stride, direct.data(), 2);

  std::vector<cplx> sa, sb;
  corr.transform_a(av.data() + 2, stride, sa);
  corr.transform_b(bv.data() + 1, stride, sb);
  for (size_t i = 0; i < sa.size(); ++i) sa[i] *= sb[i];
  std::vector<cplx> split(out.count);
  corr.inverse(sa, split.data(), 1);
  for (long i = 0; i < out.count; ++i) EXPECT_LT(std::abs(direct[2 * i] - split[i]), 1e-12);
}

TEST(HilbertTransform, LorentzianMapsToDispersiveProfile) {
  const double h = 1e-3, gamma = 0.05;
  const long half = 20000;
  const long n = 2 * half + 1;
  std::vector<cplx> f(n), out(n);
  for (long i = 0; i < n; ++i) {
    const double w = (i - half) * h;
    f[i] = gamma / (w * w + gamma * gamma);
  }
  HilbertTransform ht(n);
  ht.apply(f.data(), 1, out.data(), 1);
  for (long i = half - 500; i <= half + 500; i += 25) {
    const double w = (i - half) * h;
    const double ref = w / (w * w + gamma * gamma);
    // the window truncation contributes about (1/pi) * 2 gamma w / W^2
    EXPECT_NEAR(out[i].real(), ref, 2e-4 * (1.0 / gamma)) << w;
    EXPECT_NEAR(out[i].imag(), 0.0, 1e-12);
  }
}

TEST(HilbertTransform, ConstantVanishesAtWindowCentre) {
  const long n = 1001;
  std::vector<cplx> f(n, cplx(1.0, -2.0)), out(n);
  HilbertTransform ht(n);
  ht.apply(f.data(), 1, out.data(), 1);
  EXPECT_LT(std::abs(out[n / 2]), 1e-12);
  EXPECT_GT(out[n - 10].real(), 0.0);
}

TEST(HilbertTransform, IsAnInvolutionUpToSign) {
  const double h = 2e-3, gamma = 0.04;
  const long half = 15000, n = 2 * half + 1;
  std::vector<cplx> f(n), hf(n), hhf(n);
  for (long i = 0; i < n; ++i) {
    const double w = (i - half) * h;
    f[i] = std::exp(-w * w / (2 * gamma * gamma));
  }
  HilbertTransform ht(n);
  ht.apply(f.data(), 1, hf.data(), 1);
  ht.apply(hf.data(), 1, hhf.data(), 1);
  for (long i = half - 200; i <= half + 200; i += 10) EXPECT_NEAR(hhf[i].real(), -f[i].real(), 2e-3);
}

TEST(FftInplace, RoundTrip) {
  auto v = random_series(360, 9);
  auto w = v;
  fft_inplace(w, -1);
  fft_inplace(w, +1);
  for (size_t i = 0; i < v.size(); ++i) EXPECT_LT(std::abs(w[i] / 360.0 - v[i]), 1e-12);
}

TEST(FrequencyGrid, WindowsCoverBandsAndInterbandDifferences) {
  SystemParams p;
  p.n_sites = 3; p.t1 = 1e-4; p.t2 = 1e-2; p.gamma1 = p.gamma2 = 1e-3; p.kappa = 0.07; p.g = 2.65e-3;
  const FrequencyGrid grid = make_grid(p);
  EXPECT_NEAR(grid.h, 1e-4, 1e-15);
  EXPECT_DOUBLE_EQ(grid.eta, 4.0 * grid.h);
  EXPECT_LT(grid.omega_min(grid.band[1]), 0.5 - 2e-2 * std::cos(M_PI / 4));
  EXPECT_GT(grid.omega_max(grid.band[0]), -0.5 + 2e-4 * std::cos(M_PI / 4));
  EXPECT_EQ(grid.photon.first, -grid.photon.last());
  EXPECT_EQ(grid.photon_upper().last(), grid.photon.last());
  EXPECT_EQ(grid.photon_lower().first, grid.photon.first);
  EXPECT_EQ(grid.photon_upper().first, grid.band[1].first - grid.band[0].last());
}

TEST(FrequencyGrid, RejectsEtaBelowTwoSpacings) {
  SystemParams p;
  p.n_sites = 3; p.t1 = 1e-4; p.t2 = 1e-2; p.gamma1 = p.gamma2 = 1e-3; p.kappa = 0.07; p.g = 0.0;
  GridOptions o;
  o.eta_factor = 1.5;
  try {
    make_grid(p, o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::GridTooCoarse);
  }
}

TEST(FrequencyGrid, MemoryBudgetCoarsensSpacing) {
  SystemParams p;
  p.n_sites = 11; p.t1 = 1e-4; p.t2 = 0.1; p.gamma1 = p.gamma2 = 1e-3; p.kappa = 1e-4; p.g = 2.2e-3;
  GridOptions o;
  o.memory_budget = 5e7;
  const FrequencyGrid grid = make_grid(p, o);
  EXPECT_LE(electron_storage_bytes(grid, 11), 5.2e7);
  EXPECT_FALSE(grid.notes.empty());
}
