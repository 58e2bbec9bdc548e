#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "cavitrans/errors.hpp"
#include "cavitrans/ngf.hpp"

namespace cavitrans {

namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
constexpr double kPi = std::numbers::pi;
const cplx kI(0.0, 1.0);

// int (w - M)^-1 S (w - M)^-dagger dw over [e, inf) (upper) or (-inf, e].
MatrixXcd tail_integral(const MatrixXcd& m, const MatrixXcd& s, double e, bool upper) {
  Eigen::ComplexEigenSolver<MatrixXcd> es(m);
  const VectorXcd& lam = es.eigenvalues();
  const MatrixXcd& v = es.eigenvectors();
  const MatrixXcd vi = v.inverse();
  MatrixXcd st = vi * s * vi.adjoint();
  const Eigen::Index n = lam.size();
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index l = 0; l < n; ++l) {
      const cplx f = std::log(e - lam(k)) - std::log(e - std::conj(lam(l)));
      const cplx d = lam(k) - std::conj(lam(l));
      st(k, l) *= upper ? -f / d : (f - 2.0 * kPi * kI) / d;
    }
  return v * st * v.adjoint();
}

struct BandIntegrals {
  MatrixXcd lesser;    // int G< dw / 2pi
  MatrixXcd spectral;  // int A dw / 2pi
};

BandIntegrals band_integrals(const ScbaResult& r, int b) {
  const ElectronBand& band = r.electrons.band[b];
  const int n = band.n;
  const double h = r.grid.h;
  BandIntegrals out{MatrixXcd::Zero(n, n), MatrixXcd::Zero(n, n)};
  for (long i = 0; i < band.points(); ++i) {
    out.lesser += band.block(band.lesser, i);
    out.spectral += kI * (band.block(band.greater, i) - band.block(band.lesser, i));
  }
  out.lesser *= h / (2.0 * kPi);
  out.spectral *= h / (2.0 * kPi);

  const MatrixXcd h0 = r.basis.dispersion[b].cast<cplx>().asDiagonal();
  for (bool upper : {false, true}) {
    const long i = upper ? band.points() - 1 : 0;
    const double e = r.grid.omega(band.window.first + i) + (upper ? 0.5 : -0.5) * h;
    const MatrixXcd m = h0 + r.leads.retarded[b] + band.block(band.sigma_retarded, i);
    const MatrixXcd sl = r.leads.lesser[b] + band.block(band.sigma_lesser, i);
    const MatrixXcd sg = r.leads.greater[b] + band.block(band.sigma_greater, i);
    out.lesser += tail_integral(m, sl, e, upper) / (2.0 * kPi);
    out.spectral += tail_integral(m, kI * (sg - sl), e, upper) / (2.0 * kPi);
  }
  return out;
}

// Imaginary parts of Pi< and Pi> on the photon window, stacked.
Eigen::VectorXd pack(const PhotonKeldysh& ph, long np) {
  Eigen::VectorXd x(2 * np);
  for (long i = 0; i < np; ++i) {
    x(i) = ph.pi_lesser[i].imag();
    x(np + i) = ph.pi_greater[i].imag();
  }
  return x;
}

void unpack(const Eigen::VectorXd& x, PhotonKeldysh& ph) {
  const long np = ph.points();
  for (long i = 0; i < np; ++i) {
    ph.pi_lesser[i] = cplx(0.0, x(i));
    ph.pi_greater[i] = cplx(0.0, x(np + i));
  }
}

// Type-II Anderson mixing with a bounded history.
class Anderson {
 public:
  Anderson(int depth, double beta) : depth_(depth), beta_(beta) {}

  Eigen::VectorXd update(const Eigen::VectorXd& x, const Eigen::VectorXd& fx) {
    const Eigen::VectorXd f = fx - x;
    if (has_last_ && f.norm() > last_f_.norm()) {
      dx_.clear();
      df_.clear();
      has_last_ = false;
    }
    if (has_last_) {
      dx_.push_back(x - last_x_);
      df_.push_back(f - last_f_);
      if (static_cast<int>(dx_.size()) > depth_) {
        dx_.erase(dx_.begin());
        df_.erase(df_.begin());
      }
    }
    last_x_ = x;
    last_f_ = f;
    has_last_ = true;
    Eigen::VectorXd next = x + beta_ * f;
    if (dx_.empty()) return next;
    const long m = static_cast<long>(dx_.size());
    Eigen::MatrixXd dfm(f.size(), m);
    for (long k = 0; k < m; ++k) dfm.col(k) = df_[k];
    const Eigen::VectorXd gamma = dfm.colPivHouseholderQr().solve(f);
    if (!gamma.allFinite()) {
      dx_.clear();
      df_.clear();
      return next;
    }
    for (long k = 0; k < m; ++k) next -= gamma(k) * (dx_[k] + beta_ * df_[k]);
    return next;
  }

 private:
  int depth_;
  double beta_;
  bool has_last_ = false;
  Eigen::VectorXd last_x_, last_f_;
  std::vector<Eigen::VectorXd> dx_, df_;
};

}  // namespace

ScbaResult scba_fixed_point(const SystemParams& p, const ScbaOptions& o) {
  validate(p);
  if (p.n_photon_bath != 0.0)
    throw Error(ErrorCode::InvalidArgument, "thermal cavity photons are only supported by the master equations");
  if (!(o.mixing > 0.0 && o.mixing <= 1.0)) throw Error(ErrorCode::InvalidArgument, "mixing must lie in (0, 1]");
  if (o.max_iter < 1) throw Error(ErrorCode::InvalidArgument, "max_iter must be positive");
  ScbaResult r;
  r.params = p;
  r.grid = make_grid(p, o.grid);
  r.basis = bloch_basis(p);
  r.leads = lead_self_energy(p, r.basis);
  r.n0 = o.n0.size() ? o.n0 : default_occupations(p.n_sites);
  r.warnings = r.grid.notes;
  if (p.cooperativity() > 1.0)
    r.warnings.push_back("Gamma_c / Gamma = " + std::to_string(p.cooperativity()) +
                         " exceeds 1: outside the perturbative range of the self-consistent Born approximation");

  NgfWorkspace ws(r.grid, p.n_sites);
  r.electrons = g0_electron(r.grid, r.basis, r.n0, o.quadrature);

  if (p.g == 0.0) {
    r.photon = bath_only_photon(p, ws);
    dyson_keldysh_electron(r.electrons, r.basis, r.leads, r.grid, o.quadrature, 1.0);
    r.iterations = 1;
    if (o.progress) o.progress(1, 0.0);
    return r;
  }

  if (o.anderson_depth == 0) {
    for (int it = 1; it <= o.max_iter; ++it) {
      r.photon = photon_polarization(r.electrons, p.g, ws, o.trace);
      dyson_keldysh_photon(r.photon, p, ws);
      lm_electron_self_energy(r.electrons, r.photon, p.g, ws);
      for (int b = 0; b < 2; ++b) retarded_from_components(r.electrons.band[b], ws.hilbert_band(b));
      r.residual =
          dyson_keldysh_electron(r.electrons, r.basis, r.leads, r.grid, o.quadrature, it == 1 ? 1.0 : o.mixing);
      r.iterations = it;
      if (o.progress) o.progress(it, r.residual);
      if (it > 1 && r.residual < o.tol) {
        r.photon = photon_polarization(r.electrons, p.g, ws, o.trace);
        dyson_keldysh_photon(r.photon, p, ws);
        return r;
      }
    }
  } else {
    // Fixed point in the polarization: x -> Pi[G[D[x]]], extrapolated over the last iterates.
    const long np = r.grid.photon.count;
    Anderson acc(o.anderson_depth, o.mixing);
    PhotonKeldysh ph = photon_polarization(r.electrons, p.g, ws, o.trace);
    Eigen::VectorXd x = pack(ph, np);
    for (int it = 1; it <= o.max_iter; ++it) {
      unpack(x, ph);
      dyson_keldysh_photon(ph, p, ws);
      lm_electron_self_energy(r.electrons, ph, p.g, ws);
      for (int b = 0; b < 2; ++b) retarded_from_components(r.electrons.band[b], ws.hilbert_band(b));
      r.residual = dyson_keldysh_electron(r.electrons, r.basis, r.leads, r.grid, o.quadrature, 1.0);
      r.iterations = it;
      if (o.progress) o.progress(it, r.residual);
      ph = photon_polarization(r.electrons, p.g, ws, o.trace);
      if (it > 1 && r.residual < o.tol) {
        dyson_keldysh_photon(ph, p, ws);
        r.photon = std::move(ph);
        return r;
      }
      x = acc.update(x, pack(ph, np));
    }
  }
  throw Error(ErrorCode::NotConverged, "SCBA did not converge in " + std::to_string(o.max_iter) +
                                           " iterations, residual " + std::to_string(r.residual));
}

std::array<Eigen::MatrixXcd, 2> occupation_matrices(const ScbaResult& r) {
  std::array<MatrixXcd, 2> out;
  for (int b = 0; b < 2; ++b) out[b] = -kI * band_integrals(r, b).lesser;
  return out;
}

std::array<Eigen::MatrixXcd, 2> spectral_weights(const ScbaResult& r) {
  std::array<MatrixXcd, 2> out;
  for (int b = 0; b < 2; ++b) out[b] = band_integrals(r, b).spectral;
  return out;
}

NgfCurrents transmission_and_current(const ScbaResult& r, const SystemParams& p, double rel_tol) {
  NgfCurrents c;
  const MatrixXcd s1 = r.basis.sigma1.cast<cplx>();
  const MatrixXcd sn = r.basis.sigmaN.cast<cplx>();
  for (int b = 0; b < 2; ++b) {
    const ElectronBand& band = r.electrons.band[b];
    auto& t = c.transmission[b];
    t.resize(band.points());
    for (long i = 0; i < band.points(); ++i) {
      const MatrixXcd a = kI * (band.block(band.greater, i) - band.block(band.lesser, i));
      t[i] = (s1 * a).trace().real() + ((sn - s1) * band.block(band.lesser, i)).trace().imag();
    }
    const BandIntegrals in = band_integrals(r, b);
    const MatrixXcd rho = -kI * in.lesser;
    const double gamma = p.gamma(b);
    c.band[b] = 0.5 * gamma * ((s1 * in.spectral).trace().real() + ((sn - s1) * rho).trace().real());
    c.band_population[b] = gamma * (sn * rho).trace().real();
  }
  c.total = c.band[0] + c.band[1];
  c.total_population = c.band_population[0] + c.band_population[1];
  const double scale = std::max(std::abs(c.total), std::abs(c.total_population));
  if (std::abs(c.total - c.total_population) > rel_tol * scale + 1e-12 * (p.gamma1 + p.gamma2))
    throw Error(ErrorCode::ConsistencyViolation, "transmission current " + std::to_string(c.total) +
                                                     " differs from edge-population current " +
                                                     std::to_string(c.total_population));
  return c;
}

Eigen::MatrixXd populations_real_space(const ScbaResult& r, double eps) {
  const auto rho = occupation_matrices(r);
  const int n = r.basis.n;
  Eigen::MatrixXd pop(2, n);
  for (int b = 0; b < 2; ++b)
    for (int j = 0; j < n; ++j) {
      const Eigen::VectorXcd phi = r.basis.phi.row(j).transpose().cast<cplx>();
      pop(b, j) = (phi.adjoint() * rho[b] * phi)(0, 0).real();
      if (pop(b, j) < -eps || pop(b, j) > 1.0 + eps)
        throw Error(ErrorCode::UnphysicalPopulation, "n(" + std::to_string(b + 1) + "," + std::to_string(j + 1) +
                                                         ") = " + std::to_string(pop(b, j)));
    }
  return pop;
}

CavitySpectrum cavity_dos_and_nbar(const PhotonKeldysh& ph, const SystemParams& p, const FrequencyGrid& grid) {
  CavitySpectrum s;
  const long np = ph.points();
  s.omega.resize(np);
  s.dos.resize(np);
  s.im_lesser.resize(np);
  double sum = 0.0;
  for (long i = 0; i < np; ++i) {
    s.omega[i] = grid.omega(ph.window.first + i);
    s.dos[i] = -2.0 * ph.retarded[i].imag();
    s.im_lesser[i] = ph.lesser[i].imag();
    sum += s.im_lesser[i];
  }
  double integral = sum * grid.h / (2.0 * kPi);
  // Below the window only the bath populates D<; above it D< vanishes.
  const double x0 = -(grid.omega(ph.window.first) - 0.5 * grid.h);
  if (p.kappa > 0.0 && x0 > 0.0) {
    boost::math::quadrature::exp_sinh<double> integrator;
    auto f = [&](double x) { return -p.kappa * std::norm(bath_photon_propagator(p, -x)) / (2.0 * kPi); };
    integral += integrator.integrate(f, x0, std::numeric_limits<double>::infinity());
  }
  s.nbar = -0.5 * (integral + 1.0);
  return s;
}

}  // namespace cavitrans
