#include "cavitrans/ngf.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "cavitrans/errors.hpp"

namespace cavitrans {

namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
constexpr double kPi = std::numbers::pi;
const cplx kI(0.0, 1.0);

// -conj(x[-j mod P]): spectrum of the adjoint partner of an element series.
inline cplx partner(const std::vector<cplx>& x, long j) {
  const long p = static_cast<long>(x.size());
  return -std::conj(x[j == 0 ? 0 : p - j]);
}

void mirror_lower_triangle(std::vector<cplx>& v, int n, long points) {
  const long s = static_cast<long>(n) * n;
  for (long i = 0; i < points; ++i) {
    cplx* b = v.data() + i * s;
    for (int k = 0; k < n; ++k)
      for (int l = k + 1; l < n; ++l) b[l + k * n] = -std::conj(b[k + l * n]);
  }
}

// Exact cell averages of (w - M)^-1 and (w - M)^-1 S (w - M)^-dagger over
// [w - h/2, w + h/2], for M with all eigenvalues strictly below the real axis.
class CellDyson {
 public:
  explicit CellDyson(int n) : es_(n), k_(n, n), l_(n) {}

  bool solve(const MatrixXcd& m, const MatrixXcd& sl, const MatrixXcd& sg, double w, double h, MatrixXcd& gr,
             MatrixXcd& gl, MatrixXcd& gg) {
    es_.compute(m, true);
    if (es_.info() != Eigen::Success) return false;
    const VectorXcd& lam = es_.eigenvalues();
    const MatrixXcd& v = es_.eigenvectors();
    const double scale = m.cwiseAbs().maxCoeff() + 1.0;
    for (Eigen::Index k = 0; k < lam.size(); ++k)
      if (!(lam(k).imag() < -1e-15 * scale)) return false;
    lu_.compute(v);
    vi_ = lu_.inverse();
    const double cond = v.cwiseAbs().rowwise().sum().maxCoeff() * vi_.cwiseAbs().rowwise().sum().maxCoeff();
    if (!(cond < 1e6)) return false;
    const int n = static_cast<int>(lam.size());
    for (int k = 0; k < n; ++k) l_(k) = (2.0 / h) * std::atanh(cplx(0.5 * h) / (w - lam(k)));
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) k_(k, l) = (l_(k) - std::conj(l_(l))) / (lam(k) - std::conj(lam(l)));
    gr.noalias() = v * l_.asDiagonal() * vi_;
    const MatrixXcd vi_adj = vi_.adjoint();
    st_.noalias() = vi_ * sl * vi_adj;
    tmp_ = st_.cwiseProduct(k_);
    gl.noalias() = v * tmp_ * v.adjoint();
    st_.noalias() = vi_ * sg * vi_adj;
    tmp_ = st_.cwiseProduct(k_);
    gg.noalias() = v * tmp_ * v.adjoint();
    return true;
  }

 private:
  Eigen::ComplexEigenSolver<MatrixXcd> es_;
  Eigen::PartialPivLU<MatrixXcd> lu_;
  MatrixXcd vi_, st_, tmp_, k_;
  VectorXcd l_;
};

// Plain evaluation at one frequency.
bool point_dyson(const MatrixXcd& m, const MatrixXcd& sl, const MatrixXcd& sg, double w, MatrixXcd& gr,
                 MatrixXcd& gl, MatrixXcd& gg) {
  const Eigen::Index n = m.rows();
  const MatrixXcd a = w * MatrixXcd::Identity(n, n) - m;
  Eigen::PartialPivLU<MatrixXcd> lu(a);
  gr = lu.inverse();
  if (!gr.allFinite()) return false;
  const MatrixXcd ga = gr.adjoint();
  gl.noalias() = gr * sl * ga;
  gg.noalias() = gr * sg * ga;
  return true;
}

// Cell average from the midpoint value and its second derivative. Valid when
// h ||G^r|| is small, where the next term is O((h ||G^r||)^4).
bool expanded_dyson(const MatrixXcd& m, const MatrixXcd& sl, const MatrixXcd& sg, double w, double h,
                    double max_step, MatrixXcd& gr, MatrixXcd& gl, MatrixXcd& gg) {
  const Eigen::Index n = m.rows();
  const MatrixXcd a = w * MatrixXcd::Identity(n, n) - m;
  const MatrixXcd r = a.partialPivLu().inverse();
  if (!r.allFinite()) return false;
  const double norm = std::sqrt(r.cwiseAbs().colwise().sum().maxCoeff() * r.cwiseAbs().rowwise().sum().maxCoeff());
  if (!(h * norm < max_step)) return false;
  const double c = h * h / 12.0;
  const MatrixXcd ra = r.adjoint();
  const MatrixXcd r2 = r * r;
  const MatrixXcd a2 = r2.adjoint();
  gr = r + c * r2 * r;
  MatrixXcd x = r * sl * ra;
  gl = x + c * (r2 * x + r * x * ra + x * a2);
  x = r * sg * ra;
  gg = x + c * (r2 * x + r * x * ra + x * a2);
  return true;
}

// Midpoint sub-sampling of the cell, used when the eigenbasis is ill conditioned.
void subsampled_dyson(const MatrixXcd& m, const MatrixXcd& sl, const MatrixXcd& sg, double w, double h,
                      MatrixXcd& gr, MatrixXcd& gl, MatrixXcd& gg) {
  constexpr int kSub = 16;
  const Eigen::Index n = m.rows();
  gr.setZero(n, n);
  gl.setZero(n, n);
  gg.setZero(n, n);
  MatrixXcd r, l, g;
  for (int s = 0; s < kSub; ++s) {
    const double ws = w + h * ((s + 0.5) / kSub - 0.5);
    if (!point_dyson(m, sl, sg, ws, r, l, g))
      throw Error(ErrorCode::SingularMatrix, "Dyson matrix singular at omega = " + std::to_string(ws));
    gr += r / double(kSub);
    gl += l / double(kSub);
    gg += g / double(kSub);
  }
}

}  // namespace

Eigen::MatrixXcd ElectronBand::broadening(long i) const {
  return kI * (block(sigma_greater, i) - block(sigma_lesser, i));
}

NgfWorkspace::NgfWorkspace(const FrequencyGrid& grid, int n_sites) : grid_(grid), n_(n_sites) {
  const Window up = grid.photon_upper(), low = grid.photon_lower();
  sigma_[0] = std::make_unique<LatticeCorrelator>(grid.band[1], up, grid.band[0]);
  sigma_[1] = std::make_unique<LatticeCorrelator>(grid.band[0], low, grid.band[1]);
  pi_ = std::make_unique<LatticeCorrelator>(grid.band[1], grid.band[0], up);
  for (int b = 0; b < 2; ++b) hilbert_band_[b] = std::make_unique<HilbertTransform>(grid.band[b].count);
  hilbert_photon_ = std::make_unique<HilbertTransform>(grid.photon.count);
}

NgfWorkspace::~NgfWorkspace() = default;

Eigen::VectorXd default_occupations(int n_sites) {
  Eigen::VectorXd n0 = Eigen::VectorXd::Zero(2 * n_sites);
  n0.head(n_sites).setOnes();
  return n0;
}

KeldyshSet allocate_electrons(const FrequencyGrid& grid, int n_sites) {
  KeldyshSet set;
  for (int b = 0; b < 2; ++b) {
    ElectronBand& band = set.band[b];
    band.n = n_sites;
    band.window = grid.band[b];
    const size_t size = static_cast<size_t>(band.points() * band.stride());
    for (auto* v : {&band.retarded, &band.lesser, &band.greater, &band.sigma_retarded, &band.sigma_lesser,
                    &band.sigma_greater})
      v->assign(size, cplx(0.0));
  }
  return set;
}

KeldyshSet g0_electron(const FrequencyGrid& grid, const BlochBasis& basis, const Eigen::VectorXd& n0,
                       Quadrature quadrature) {
  check_grid(grid);
  const int n = basis.n;
  if (n0.size() != 2 * n) throw Error(ErrorCode::InvalidArgument, "n0 must have 2N entries");
  if ((n0.array() < 0.0).any() || (n0.array() > 1.0).any())
    throw Error(ErrorCode::InvalidArgument, "n0 entries must lie in [0, 1]");
  KeldyshSet set = allocate_electrons(grid, n);
  const double h = grid.h, eta = grid.eta;
  for (int b = 0; b < 2; ++b) {
    ElectronBand& band = set.band[b];
    for (long i = 0; i < band.points(); ++i) {
      const double w = grid.omega(band.window.first + i);
      for (int k = 0; k < n; ++k) {
        const double x = w - basis.dispersion[b](k);
        cplx gr;
        double delta;
        if (quadrature == Quadrature::Cell) {
          gr = (2.0 / h) * std::atanh(cplx(0.5 * h) / cplx(x, eta));
          delta = (std::atan((x + 0.5 * h) / eta) - std::atan((x - 0.5 * h) / eta)) / (kPi * h);
        } else {
          gr = 1.0 / cplx(x, eta);
          delta = eta / (kPi * (x * x + eta * eta));
        }
        const double occ = n0(b * n + k);
        const long idx = i * band.stride() + k + k * n;
        band.retarded[idx] = gr;
        band.lesser[idx] = 2.0 * kPi * kI * occ * delta;
        band.greater[idx] = -2.0 * kPi * kI * (1.0 - occ) * delta;
      }
    }
  }
  return set;
}

LeadSelfEnergy lead_self_energy(const SystemParams& p, const BlochBasis& basis) {
  LeadSelfEnergy s;
  for (int b = 0; b < 2; ++b) {
    const double gamma = p.gamma(b);
    s.lesser[b] = kI * gamma * basis.sigma1.cast<cplx>();
    s.greater[b] = -kI * gamma * basis.sigmaN.cast<cplx>();
    s.retarded[b] = 0.5 * (s.greater[b] - s.lesser[b]);
  }
  return s;
}

void lm_electron_self_energy(KeldyshSet& electrons, const PhotonKeldysh& photon, double g, NgfWorkspace& ws) {
  const FrequencyGrid& grid = ws.grid();
  if (photon.window.first != grid.photon.first || photon.window.count != grid.photon.count)
    throw Error(ErrorCode::GridMismatch, "photon functions live on a different window");
  for (int b = 0; b < 2; ++b)
    if (electrons.band[b].window.first != grid.band[b].first || electrons.band[b].window.count != grid.band[b].count)
      throw Error(ErrorCode::GridMismatch, "electron functions live on a different window");

  const cplx scale = kI * g * g * grid.h / (2.0 * kPi);
  for (int b = 0; b < 2; ++b) {
    ElectronBand& target = electrons.band[b];
    const ElectronBand& source = electrons.band[1 - b];
    if (g == 0.0) {
      std::fill(target.sigma_lesser.begin(), target.sigma_lesser.end(), cplx(0.0));
      std::fill(target.sigma_greater.begin(), target.sigma_greater.end(), cplx(0.0));
      continue;
    }
    LatticeCorrelator& corr = ws.sigma(b);
    const long off = photon.window.offset(corr.b_window().first);
    corr.transform_b(photon.greater.data() + off, 1, ws.acc_greater);
    corr.transform_b(photon.lesser.data() + off, 1, ws.acc_lesser);
    const int n = target.n;
    const long stride = target.stride();
    for (int k = 0; k < n; ++k)
      for (int l = k; l < n; ++l) {
        const long e = k + static_cast<long>(l) * n;
        corr.transform_a(source.lesser.data() + e, stride, ws.scratch_a);
        for (size_t j = 0; j < ws.scratch_a.size(); ++j) ws.scratch_a[j] *= ws.acc_greater[j];
        corr.inverse(ws.scratch_a, target.sigma_lesser.data() + e, stride, scale);
        corr.transform_a(source.greater.data() + e, stride, ws.scratch_a);
        for (size_t j = 0; j < ws.scratch_a.size(); ++j) ws.scratch_a[j] *= ws.acc_lesser[j];
        corr.inverse(ws.scratch_a, target.sigma_greater.data() + e, stride, scale);
      }
    mirror_lower_triangle(target.sigma_lesser, n, target.points());
    mirror_lower_triangle(target.sigma_greater, n, target.points());
  }
}

void retarded_from_components(ElectronBand& band, HilbertTransform& hilbert) {
  const int n = band.n;
  const long stride = band.stride(), points = band.points();
  std::vector<cplx> chi(points), hc(points);
  for (int k = 0; k < n; ++k)
    for (int l = k; l < n; ++l) {
      const long e = k + static_cast<long>(l) * n;
      for (long i = 0; i < points; ++i)
        chi[i] = kI * (band.sigma_greater[i * stride + e] - band.sigma_lesser[i * stride + e]);
      hilbert.apply(chi.data(), 1, hc.data(), 1);
      for (long i = 0; i < points; ++i) {
        const cplx r = 0.5 * (-kI * chi[i] + hc[i]);
        band.sigma_retarded[i * stride + e] = r;
        if (l != k) band.sigma_retarded[i * stride + l + static_cast<long>(k) * n] =
            0.5 * (-kI * std::conj(chi[i]) + std::conj(hc[i]));
      }
    }
}

double dyson_keldysh_electron(KeldyshSet& electrons, const BlochBasis& basis, const LeadSelfEnergy& leads,
                              const FrequencyGrid& grid, Quadrature quadrature, double mixing) {
  if (!(mixing > 0.0 && mixing <= 1.0)) throw Error(ErrorCode::InvalidArgument, "mixing must lie in (0, 1]");
  const int n = basis.n;
  CellDyson cell(n);
  MatrixXcd m(n, n), sl(n, n), sg(n, n), gr(n, n), gl(n, n), gg(n, n);
  double max_diff = 0.0, max_abs = 0.0;
  for (int b = 0; b < 2; ++b) {
    ElectronBand& band = electrons.band[b];
    const MatrixXcd h0 = basis.dispersion[b].cast<cplx>().asDiagonal();
    for (long i = 0; i < band.points(); ++i) {
      const double w = grid.omega(band.window.first + i);
      m = h0 + leads.retarded[b] + band.block(band.sigma_retarded, i);
      sl = leads.lesser[b] + band.block(band.sigma_lesser, i);
      sg = leads.greater[b] + band.block(band.sigma_greater, i);
      bool ok;
      if (quadrature == Quadrature::Cell) {
        ok = expanded_dyson(m, sl, sg, w, grid.h, 0.01, gr, gl, gg) || cell.solve(m, sl, sg, w, grid.h, gr, gl, gg);
        if (!ok) {
          subsampled_dyson(m, sl, sg, w, grid.h, gr, gl, gg);
          ok = true;
        }
      } else {
        ok = point_dyson(m, sl, sg, w, gr, gl, gg);
      }
      if (!ok || !gr.allFinite() || !gl.allFinite() || !gg.allFinite())
        throw Error(ErrorCode::SingularMatrix, "Dyson matrix singular at omega = " + std::to_string(w));
      gl = 0.5 * (gl - gl.adjoint()).eval();
      gg = 0.5 * (gg - gg.adjoint()).eval();
      auto r_old = band.block(band.retarded, i);
      auto l_old = band.block(band.lesser, i);
      auto g_old = band.block(band.greater, i);
      max_diff = std::max({max_diff, (gr - r_old).cwiseAbs().maxCoeff(), (gl - l_old).cwiseAbs().maxCoeff(),
                           (gg - g_old).cwiseAbs().maxCoeff()});
      max_abs = std::max({max_abs, gr.cwiseAbs().maxCoeff(), gl.cwiseAbs().maxCoeff(), gg.cwiseAbs().maxCoeff()});
      r_old = mixing * gr + (1.0 - mixing) * r_old;
      l_old = mixing * gl + (1.0 - mixing) * l_old;
      g_old = mixing * gg + (1.0 - mixing) * g_old;
    }
  }
  return max_abs > 0.0 ? max_diff / max_abs : 0.0;
}

PhotonKeldysh photon_polarization(const KeldyshSet& electrons, double g, NgfWorkspace& ws, BubbleTrace trace) {
  const FrequencyGrid& grid = ws.grid();
  PhotonKeldysh ph;
  ph.window = grid.photon;
  const size_t np = static_cast<size_t>(grid.photon.count);
  for (auto* v : {&ph.retarded, &ph.lesser, &ph.greater, &ph.pi_retarded, &ph.pi_lesser, &ph.pi_greater})
    v->assign(np, cplx(0.0));
  if (g == 0.0) return ph;

  const ElectronBand& upper = electrons.band[1];
  const ElectronBand& lower = electrons.band[0];
  for (int b = 0; b < 2; ++b)
    if (electrons.band[b].window.first != grid.band[b].first || electrons.band[b].window.count != grid.band[b].count)
      throw Error(ErrorCode::GridMismatch, "electron functions live on a different window");

  // -i g^2 h / 2pi sum_m sum_kk' G_2(n + m) G_1(m) on the upper photon window.
  // The lower triangle follows from the upper one through G_lk = -conj(G_kl).
  LatticeCorrelator& corr = ws.polarization();
  const long p = corr.fft_size();
  ws.acc_lesser.assign(p, cplx(0.0));
  ws.acc_greater.assign(p, cplx(0.0));
  const int n = upper.n;
  const long stride = upper.stride();
  auto accumulate = [&](const std::vector<cplx>& a_src, const std::vector<cplx>& b_src, long e, bool diagonal,
                        std::vector<cplx>& acc) {
    corr.transform_a(a_src.data() + e, stride, ws.scratch_a);
    corr.transform_b(b_src.data() + e, stride, ws.scratch_b);
    const auto& fa = ws.scratch_a;
    const auto& fb = ws.scratch_b;
    if (diagonal) {
      for (long j = 0; j < p; ++j) acc[j] += fa[j] * fb[j];
    } else if (trace == BubbleTrace::Matrix) {
      for (long j = 0; j < p; ++j) acc[j] += fa[j] * partner(fb, j) + partner(fa, j) * fb[j];
    } else {
      for (long j = 0; j < p; ++j) acc[j] += fa[j] * fb[j] + partner(fa, j) * partner(fb, j);
    }
  };
  for (int k = 0; k < n; ++k)
    for (int l = k; l < n; ++l) {
      const long e = k + static_cast<long>(l) * n;
      accumulate(upper.lesser, lower.greater, e, k == l, ws.acc_lesser);
      accumulate(upper.greater, lower.lesser, e, k == l, ws.acc_greater);
    }
  const cplx scale = -kI * g * g * grid.h / (2.0 * kPi);
  const Window up = grid.photon_upper();
  std::vector<cplx> tl(up.count), tg(up.count);
  corr.inverse(ws.acc_lesser, tl.data(), 1, scale);
  corr.inverse(ws.acc_greater, tg.data(), 1, scale);
  // The band-1 to band-2 term is the mirror image of the one above: Pi<(-w) = Pi>(w).
  for (long i = 0; i < up.count; ++i) {
    const long pos = grid.photon.offset(up.first + i);
    const long neg = grid.photon.offset(-(up.first + i));
    const double l = tl[i].imag(), r = tg[i].imag();
    ph.pi_lesser[pos] += cplx(0.0, l);
    ph.pi_greater[pos] += cplx(0.0, r);
    ph.pi_lesser[neg] += cplx(0.0, r);
    ph.pi_greater[neg] += cplx(0.0, l);
  }
  return ph;
}

BathSelfEnergy photon_bath_self_energy(double kappa, double omega) {
  const double step_pos = omega > 0.0 ? 1.0 : (omega < 0.0 ? 0.0 : 0.5);
  const double step_neg = 1.0 - step_pos;
  BathSelfEnergy s;
  s.lesser = -kI * kappa * step_neg;
  s.greater = -kI * kappa * step_pos;
  s.retarded = 0.5 * (s.greater - s.lesser);
  return s;
}

void dyson_keldysh_photon(PhotonKeldysh& ph, const SystemParams& p, NgfWorkspace& ws) {
  const FrequencyGrid& grid = ws.grid();
  if (ph.window.first != grid.photon.first || ph.window.count != grid.photon.count)
    throw Error(ErrorCode::GridMismatch, "photon functions live on a different window");
  const long np = ph.points();
  std::vector<cplx> chi(np), hc(np);
  for (long i = 0; i < np; ++i) chi[i] = kI * (ph.pi_greater[i] - ph.pi_lesser[i]);
  ws.hilbert_photon().apply(chi.data(), 1, hc.data(), 1);
  const double wc = p.omega_c;
  for (long i = 0; i < np; ++i) {
    const double w = grid.omega(ph.window.first + i);
    ph.pi_retarded[i] = cplx(0.5 * hc[i].real(), -0.5 * chi[i].real());
    const BathSelfEnergy bath = photon_bath_self_energy(p.kappa, w);
    const cplx den = (w * w - wc * wc) / (2.0 * wc) - ph.pi_retarded[i] - bath.retarded;
    if (std::abs(den) == 0.0 || !std::isfinite(std::abs(den)))
      throw Error(ErrorCode::SingularDenominator, "photon Dyson denominator vanishes at omega = " + std::to_string(w));
    const cplx dr = 1.0 / den;
    const double mod2 = std::norm(dr);
    ph.retarded[i] = dr;
    ph.lesser[i] = cplx(0.0, mod2 * (ph.pi_lesser[i] + bath.lesser).imag());
    ph.greater[i] = cplx(0.0, mod2 * (ph.pi_greater[i] + bath.greater).imag());
  }
}

PhotonKeldysh bath_only_photon(const SystemParams& p, NgfWorkspace& ws) {
  PhotonKeldysh ph = photon_polarization(KeldyshSet{}, 0.0, ws);
  dyson_keldysh_photon(ph, p, ws);
  return ph;
}

Eigen::VectorXd first_order_broadening(const SystemParams& p, const BlochBasis& basis, int band, double omega,
                                       const Eigen::VectorXd& n0) {
  const int n = basis.n;
  const int other = 1 - band;
  const double wc = p.omega_c, k = p.kappa;
  Eigen::VectorXd chi(n);
  for (int q = 0; q < n; ++q) {
    const double e = basis.dispersion[other](q);
    const double x = omega - e;
    const double lor = 4.0 * k * p.g * p.g * wc * wc / (std::pow(x * x - wc * wc, 2) + k * k * wc * wc);
    const double occ = n0(other * n + q);
    const double step = omega > e ? 1.0 - occ : (omega < e ? occ : 0.5);
    chi(q) = lor * step;
  }
  return chi;
}

cplx first_order_polarization(const SystemParams& p, const BlochBasis& basis, double omega,
                              const Eigen::VectorXd& n0, double eta) {
  const int n = basis.n;
  const cplx z(omega, eta);
  cplx pi = 0.0;
  for (int q = 0; q < n; ++q) {
    const double d = basis.dispersion[1](q) - basis.dispersion[0](q);
    pi += 2.0 * p.g * p.g * (n0(q) - n0(n + q)) * d / (z * z - d * d);
  }
  return pi;
}

cplx bath_photon_propagator(const SystemParams& p, double omega) {
  const double wc = p.omega_c;
  const double sgn = omega > 0.0 ? 1.0 : (omega < 0.0 ? -1.0 : 0.0);
  return 2.0 * wc / cplx(omega * omega - wc * wc, p.kappa * wc * sgn);
}

std::pair<double, double> polariton_poles(double omega21, double rabi) {
  const double lo2 = omega21 * omega21 - 2.0 * omega21 * rabi;
  if (lo2 <= 0.0) throw Error(ErrorCode::InvalidArgument, "lower polariton frequency is not real");
  return {std::sqrt(lo2), std::sqrt(omega21 * omega21 + 2.0 * omega21 * rabi)};
}

}  // namespace cavitrans
