#include "cavitrans/observables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "cavitrans/errors.hpp"
#include "cavitrans/fft.hpp"

namespace cavitrans {

namespace {

constexpr double kPi = std::numbers::pi;
const cplx kI(0.0, 1.0);

double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

}  // namespace

double delta_j(double current, double current_g0) {
  if (current_g0 == 0.0) throw Error(ErrorCode::InvalidArgument, "reference current is zero");
  return current / current_g0 - 1.0;
}

void check_record(const ObservableRecord& r, double eps) {
  if (r.J0 != 0.0) {
    const double d = delta_j(r.J, r.J0);
    if (std::abs(d - r.deltaJ) > 1e-12 * std::max(1.0, std::abs(d)))
      throw Error(ErrorCode::ConsistencyViolation,
                  "stored deltaJ " + std::to_string(r.deltaJ) + " differs from J/J0 - 1 = " + std::to_string(d));
  }
  for (Eigen::Index i = 0; i < r.populations.size(); ++i) {
    const double n = r.populations.data()[i];
    if (n < -eps || n > 1.0 + eps)
      throw Error(ErrorCode::UnphysicalPopulation, "population " + std::to_string(n) + " outside [0, 1]");
  }
}

RealTimeSpectral spectral_function_realtime(const ScbaResult& r, int j0, int band_index, double tau_max,
                                            int oversample) {
  const int n = r.basis.n;
  if (band_index < 0 || band_index > 1) throw Error(ErrorCode::InvalidArgument, "band must be 0 or 1");
  if (j0 < 0 || j0 >= n) throw Error(ErrorCode::InvalidArgument, "injection site out of range");
  if (oversample < 1) throw Error(ErrorCode::InvalidArgument, "oversample must be positive");
  const double h = r.grid.h;
  const double nyquist = 2.0 * kPi / h;
  if (!(tau_max > 0.0) || tau_max > nyquist)
    throw Error(ErrorCode::GridTooCoarse, "horizon " + std::to_string(tau_max) + " beyond the Nyquist time " +
                                              std::to_string(nyquist));

  const ElectronBand& band = r.electrons.band[band_index];
  const long points = band.points();
  const long m = fft_friendly_size(static_cast<long>(oversample) * points);
  const double dtau = 2.0 * kPi / (static_cast<double>(m) * h);
  const long n_tau = std::min<long>(m, static_cast<long>(std::floor(tau_max / dtau)) + 1);

  RealTimeSpectral out;
  out.band = band_index;
  out.j0 = j0;
  out.carrier = r.params.omega(band_index);
  out.tau.resize(n_tau);
  for (long t = 0; t < n_tau; ++t) out.tau[t] = t * dtau;
  out.amplitude.resize(n_tau, n);
  out.magnitude.resize(n_tau, n);

  const Eigen::VectorXd phi0 = r.basis.phi.row(j0).transpose();
  std::vector<cplx> series(m);
  for (int j = 0; j < n; ++j) {
    const Eigen::VectorXd phi = r.basis.phi.row(j).transpose();
    std::fill(series.begin(), series.end(), cplx(0.0));
    for (long i = 0; i < points; ++i) {
      const Eigen::MatrixXcd a = kI * (band.block(band.greater, i) - band.block(band.lesser, i));
      series[i] = (phi.transpose().cast<cplx>() * a * phi0.cast<cplx>())(0, 0);
    }
    fft_inplace(series, -1);
    for (long t = 0; t < n_tau; ++t) {
      const double tau = out.tau[t];
      // exp(-i (omega_first - carrier) tau) times the cell average over each frequency cell
      const double phase = -(band.window.first * h - out.carrier) * tau;
      const cplx env = series[t] * std::polar(h / (2.0 * kPi) * sinc(0.5 * tau * h), phase);
      out.amplitude(t, j) = 2.0 * env.real();
      out.magnitude(t, j) = 2.0 * std::abs(env);
    }
  }
  return out;
}

TransferTime transfer_time(const RealTimeSpectral& a, double g, double threshold) {
  if (!(g > 0.0)) throw Error(ErrorCode::InvalidArgument, "transfer time needs g > 0");
  TransferTime out;
  bool found = false;
  long peak = -1;
  const double origin = a.magnitude(0, a.j0);
  const long n_tau = static_cast<long>(a.tau.size());
  const int n = static_cast<int>(a.magnitude.cols());
  for (long t = 0; t < n_tau; ++t) {
    const double total = a.magnitude.row(t).sum();
    if (!(total > 0.0)) continue;
    const double off = (total - a.magnitude(t, a.j0)) / total;
    out.peak_fraction = std::max(out.peak_fraction, off);
    for (int j = 0; j < n; ++j) {
      if (j == a.j0 || !(a.magnitude(t, j) / origin > out.site_weight)) continue;
      out.site_weight = a.magnitude(t, j) / origin;
      peak = t;
    }
    if (!found && off > threshold) {
      found = true;
      out.time = a.tau[t];
    }
  }
  if (!found)
    throw Error(ErrorCode::NoTransferDetected, "off-site fraction stays below " + std::to_string(threshold) +
                                                   " (peak " + std::to_string(out.peak_fraction) + ")");
  out.time_times_g = out.time * g;
  out.site_weight_time = a.tau[peak];
  double even = 0.0, odd = 0.0;
  for (int j = 0; j < n; ++j) {
    if (j == a.j0) continue;
    (std::abs(j - a.j0) % 2 == 0 ? even : odd) += a.magnitude(peak, j);
  }
  out.parity_contrast = odd > 0.0 ? even / odd : std::numeric_limits<double>::infinity();
  return out;
}

PolaritonPeaks polariton_splitting(const std::vector<double>& omega, const std::vector<double>& dos,
                                   double rel_floor) {
  if (omega.size() != dos.size() || omega.size() < 3)
    throw Error(ErrorCode::InvalidArgument, "spectrum needs at least three matching samples");
  const double top = *std::max_element(dos.begin(), dos.end());
  std::vector<double> peaks;
  std::vector<size_t> where;
  for (size_t i = 1; i + 1 < dos.size(); ++i) {
    if (!(dos[i] > dos[i - 1] && dos[i] >= dos[i + 1]) || dos[i] < rel_floor * top) continue;
    const double y0 = dos[i - 1], y1 = dos[i], y2 = dos[i + 1];
    const double curv = y0 - 2.0 * y1 + y2;
    const double shift = curv != 0.0 ? 0.5 * (y0 - y2) / curv : 0.0;
    const double step = 0.5 * (omega[i + 1] - omega[i - 1]);
    peaks.push_back(omega[i] + std::clamp(shift, -0.5, 0.5) * step);
    where.push_back(i);
  }
  if (peaks.size() < 2)
    throw Error(ErrorCode::PeaksNotResolved, std::to_string(peaks.size()) + " maximum above the floor");
  PolaritonPeaks out;
  out.lower = peaks.front();
  out.upper = peaks.back();
  out.splitting = 0.5 * (out.upper - out.lower);
  out.interior.assign(peaks.begin() + 1, peaks.end() - 1);
  double total = 0.0, inner = 0.0;
  for (size_t i = 0; i + 1 < dos.size(); ++i) {
    const double area = 0.5 * (dos[i] + dos[i + 1]) * (omega[i + 1] - omega[i]);
    total += area;
    if (i >= where.front() && i < where.back()) inner += area;
  }
  out.interior_weight = total > 0.0 ? inner / total : 0.0;
  return out;
}

double vacuum_rabi(const Eigen::MatrixXd& pop, double g) {
  if (pop.rows() != 2) throw Error(ErrorCode::InvalidArgument, "populations must have one row per band");
  const double n1 = pop.row(0).sum();
  const double n2 = pop.row(1).sum();
  if (n1 < n2)
    throw Error(ErrorCode::InvertedPopulations,
                "N1 = " + std::to_string(n1) + " below N2 = " + std::to_string(n2));
  const double rabi = g * std::sqrt(n1 - n2);
  const double bound = g * std::sqrt(static_cast<double>(pop.cols()));
  if (rabi > bound * (1.0 + 1e-9))
    throw Error(ErrorCode::ConsistencyViolation, "Omega_n exceeds g sqrt(N)");
  return rabi;
}

double broadening_ratio(const ScbaResult& r, const SystemParams& p) {
  if (p.n_sites % 2 == 0) throw Error(ErrorCode::InvalidArgument, "broadening ratio needs an odd chain");
  const int k0 = r.basis.central_state();
  const ElectronBand& band = r.electrons.band[0];
  const double w = r.basis.dispersion[0](k0);
  const double x = w / r.grid.h - static_cast<double>(band.window.first);
  const long i = std::clamp(static_cast<long>(std::floor(x)), 0L, band.points() - 2);
  const double f = std::clamp(x - static_cast<double>(i), 0.0, 1.0);
  const double chi_i =
      ((1.0 - f) * band.broadening(i)(k0, k0) + f * band.broadening(i + 1)(k0, k0)).real();
  const double chi0 = p.gamma1 * (r.basis.sigma1(k0, k0) + r.basis.sigmaN(k0, k0));
  return (chi0 + chi_i) / chi0;
}

}  // namespace cavitrans
