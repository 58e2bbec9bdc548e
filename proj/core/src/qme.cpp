#include "cavitrans/qme.hpp"

#include <algorithm>
#include <cmath>

#include "cavitrans/errors.hpp"

namespace cavitrans {

namespace {

// Integral over [0, h*(f.size()-1)] of exp(i nu tau) times the piecewise-linear
// interpolant of f sampled with step h.
cplx filon_half_line(const std::vector<cplx>& f, double h, double nu) {
  const std::size_t m = f.size();
  if (m < 2) return 0.0;
  const double th = nu * h;
  const cplx I(0.0, 1.0);
  cplx w_first, w_last;
  double w_mid;
  if (std::abs(th) < 1e-3) {
    w_first = 0.5 + I * th / 6.0 - th * th / 24.0;
    w_last = 0.5 - I * th / 6.0 - th * th / 24.0;
    w_mid = 1.0 - th * th / 12.0;
  } else {
    const double th2 = th * th;
    w_first = (1.0 + I * th - std::exp(I * th)) / th2;
    w_last = (1.0 - I * th - std::exp(-I * th)) / th2;
    const double s = std::sin(0.5 * th) / (0.5 * th);
    w_mid = s * s;
  }
  const cplx step = std::exp(I * th);
  cplx phase = step;
  cplx mid = 0.0;
  for (std::size_t i = 1; i + 1 < m; ++i) {
    mid += f[i] * phase;
    phase *= step;
    if ((i & 1023u) == 0) phase = std::exp(I * (nu * h * static_cast<double>(i + 1)));
  }
  const cplx end_phase = std::exp(I * (nu * h * static_cast<double>(m - 1)));
  return h * (w_first * f[0] + w_mid * mid + w_last * end_phase * f[m - 1]);
}

}  // namespace

SparseMatrixC build_hamiltonian(const SystemParams& p, const ManyBodyBasis& basis, const HamiltonianOptions& o) {
  if (basis.n_max() < 1) throw Error(ErrorCode::CutoffTooSmall, "n_max must be >= 1");
  if (o.rwa == o.counter_rotating)
    throw Error(ErrorCode::InvalidArgument, "choose either the rotating-wave or the counter-rotating coupling");
  if (basis.n_sites() != p.n_sites) throw Error(ErrorCode::InvalidArgument, "basis does not match n_sites");
  const Statistics stats = o.hardcore_bosons ? Statistics::HardcoreBoson : Statistics::Fermion;
  const int n = basis.n_sites();
  const int D = basis.dim();

  std::vector<SparseMatrixC> c(basis.n_modes());
  for (int m = 0; m < basis.n_modes(); ++m) c[m] = basis.annihilator(m, stats);

  SparseMatrixC H(D, D);
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(D);
  for (int band = 0; band < 2; ++band)
    for (int j = 0; j < n; ++j) diag += p.omega(band) * basis.number(basis.mode(band, j));
  diag += p.omega_c * basis.photon_number();
  {
    std::vector<Eigen::Triplet<cplx>> trip;
    for (int s = 0; s < D; ++s) trip.emplace_back(s, s, diag(s));
    H.setFromTriplets(trip.begin(), trip.end());
  }
  for (int band = 0; band < 2; ++band) {
    const double t = p.hopping(band);
    if (t == 0.0) continue;
    for (int j = 0; j + 1 < n; ++j) {
      SparseMatrixC hop = SparseMatrixC(c[basis.mode(band, j + 1)].adjoint()) * c[basis.mode(band, j)];
      H -= t * hop;
      H -= t * SparseMatrixC(hop.adjoint());
    }
  }
  if (p.g != 0.0) {
    const SparseMatrixC a = basis.photon_annihilator();
    const SparseMatrixC ad = a.adjoint();
    for (int j = 0; j < n; ++j) {
      const SparseMatrixC raise = SparseMatrixC(c[basis.mode(1, j)].adjoint()) * c[basis.mode(0, j)];
      const SparseMatrixC lower = raise.adjoint();
      H += p.g * (SparseMatrixC(raise * a) + SparseMatrixC(ad * lower));
      if (o.counter_rotating) H += p.g * (SparseMatrixC(raise * ad) + SparseMatrixC(a * lower));
    }
  }
  H.prune(cplx(0.0));
  H.makeCompressed();
  return H;
}

std::vector<JumpOperator> chain_cavity_jumps(const SystemParams& p, const ManyBodyBasis& basis, Statistics stats) {
  std::vector<JumpOperator> jumps;
  const int n = basis.n_sites();
  for (int band = 0; band < 2; ++band) {
    jumps.push_back({0.5 * p.gamma(band), basis.creator(basis.mode(band, 0), stats)});
    jumps.push_back({0.5 * p.gamma(band), basis.annihilator(basis.mode(band, n - 1), stats)});
  }
  if (basis.n_max() > 0) {
    const SparseMatrixC a = basis.photon_annihilator();
    jumps.push_back({0.5 * p.kappa * (1.0 + p.n_photon_bath), a});
    if (p.n_photon_bath > 0.0) jumps.push_back({0.5 * p.kappa * p.n_photon_bath, SparseMatrixC(a.adjoint())});
  }
  return jumps;
}

ChargeTable chain_cavity_charges(const ManyBodyBasis& basis, bool counter_rotating) {
  ChargeTable t;
  t.moduli = {0, counter_rotating ? 2 : 0};
  t.values.resize(basis.dim());
  for (int s = 0; s < basis.dim(); ++s) {
    const int lower = basis.count(s, 0), upper = basis.count(s, 1);
    t.values[s] = {lower + upper, upper + basis.photons(s)};
  }
  return t;
}

Liouvillian build_liouvillian(const SparseMatrixC& H, const SystemParams& p, const ManyBodyBasis& basis,
                              const LiouvillianOptions& o) {
  LindbladGenerator gen;
  gen.hamiltonian = H;
  gen.jumps = chain_cavity_jumps(p, basis, o.hardcore_bosons ? Statistics::HardcoreBoson : Statistics::Fermion);
  ChargeTable charges;
  if (o.use_symmetry) charges = chain_cavity_charges(basis, o.counter_rotating);
  return Liouvillian::build(gen, charges, {0, o.excitation_offset});
}

QmeCurrents current_qme(const DensityOperator& rho, const SystemParams& p, const ManyBodyBasis& basis) {
  const Eigen::MatrixXd n = site_populations(rho, basis);
  const int last = basis.n_sites() - 1;
  QmeCurrents c;
  for (int band = 0; band < 2; ++band) {
    const double in = p.gamma(band) * (1.0 - n(band, 0));
    const double out = p.gamma(band) * n(band, last);
    c.source += in;
    c.drain -= out;
    c.band[band] = 0.5 * (in + out);
  }
  c.total = 0.5 * (c.source - c.drain);
  return c;
}

Eigen::MatrixXd site_populations(const DensityOperator& rho, const ManyBodyBasis& basis) {
  const Eigen::VectorXd d = rho.diagonal().real();
  Eigen::MatrixXd n(2, basis.n_sites());
  for (int band = 0; band < 2; ++band)
    for (int j = 0; j < basis.n_sites(); ++j) n(band, j) = d.dot(basis.number(basis.mode(band, j)));
  return n;
}

double photon_number(const DensityOperator& rho, const ManyBodyBasis& basis) {
  return rho.diagonal().real().dot(basis.photon_number());
}

double default_time_step(const SystemParams& p) {
  const double fastest = std::max({p.t2, p.t1, p.gamma1, p.gamma2, p.kappa, p.g * std::sqrt(double(p.n_sites)),
                                   std::abs(p.detuning())});
  return 0.02 / fastest;
}

DensityOperator lower_band_filled(const ManyBodyBasis& basis) {
  DensityOperator rho = DensityOperator::Zero(basis.dim(), basis.dim());
  const std::uint32_t occ = (1u << basis.n_sites()) - 1u;
  const int s = basis.index(occ, 0);
  rho(s, s) = 1.0;
  return rho;
}

QmeSolution solve_full_qme(const SystemParams& p, const QmeOptions& o) {
  validate(p);
  if (o.n_max < 1) throw Error(ErrorCode::CutoffTooSmall, "n_max must be >= 1");
  if (p.n_sites > 5) throw Error(ErrorCode::InvalidArgument, "full master equation limited to n_sites <= 5");
  ManyBodyBasis basis(p.n_sites, o.n_max);
  HamiltonianOptions ho;
  ho.rwa = !o.counter_rotating;
  ho.counter_rotating = o.counter_rotating;
  ho.hardcore_bosons = o.hardcore_bosons;
  const SparseMatrixC H = build_hamiltonian(p, basis, ho);
  LiouvillianOptions lo;
  lo.hardcore_bosons = o.hardcore_bosons;
  lo.counter_rotating = o.counter_rotating;
  const Liouvillian L = build_liouvillian(H, p, basis, lo);

  QmeSolution out;
  out.block_size = L.size();
  if (o.solver == SteadySolver::Null) {
    SteadyState ss = steady_state_null(L);
    out.rho = std::move(ss.rho);
    out.residual = ss.residual;
  } else {
    EvolveOptions eo;
    eo.dt = o.dt > 0.0 ? o.dt : default_time_step(p);
    eo.t_final = o.t_max > 0.0 ? o.t_max : 200.0 / std::min({p.gamma1, p.gamma2, p.kappa});
    eo.steady_tol = o.steady_tol;
    const Trajectory tr = evolve_rk4(L, L.vectorize(lower_band_filled(basis)), eo);
    if (!tr.reached_steady)
      throw Error(ErrorCode::NotConverged, "RK4 did not reach steady_tol, residual " + std::to_string(tr.residual));
    out.rho = L.unvectorize(tr.final_state);
    out.residual = tr.residual;
    out.steps = tr.steps;
  }
  out.currents = current_qme(out.rho, p, basis);
  out.populations = site_populations(out.rho, basis);
  out.nbar = photon_number(out.rho, basis);

  double top = 0.0;
  for (int s = 0; s < basis.dim(); ++s)
    if (basis.photons(s) == basis.n_max()) top += out.rho(s, s).real();
  if (top > 1e-3) out.warnings.push_back("photon cutoff level holds population " + std::to_string(top));
  return out;
}

std::vector<double> default_photon_frequencies(const SystemParams& p, int count) {
  const double half = 2.0 * p.t2 + 2.5 * p.g * std::sqrt(double(p.n_sites)) + 5.0 * p.kappa;
  std::vector<double> w(count);
  for (int i = 0; i < count; ++i) w[i] = p.omega21() - half + 2.0 * half * i / (count - 1);
  return w;
}

PhotonSpectrum photon_dos_regression(const SystemParams& p, const ManyBodyBasis& basis, const DensityOperator& rho,
                                     const std::vector<double>& omega, const QmeOptions& model,
                                     const RegressionOptions& o) {
  if (model.counter_rotating) throw Error(ErrorCode::InvalidArgument, "regression spectrum requires the RWA model");
  HamiltonianOptions ho;
  ho.hardcore_bosons = model.hardcore_bosons;
  const SparseMatrixC H = build_hamiltonian(p, basis, ho);
  LiouvillianOptions lo;
  lo.hardcore_bosons = model.hardcore_bosons;
  lo.excitation_offset = -1;
  Liouvillian L = build_liouvillian(H, p, basis, lo);
  L.shift(cplx(0.0, -p.omega21()));

  const SparseMatrixC a = basis.photon_annihilator();
  const DensityOperator x0 = a * rho - rho * a;
  Eigen::VectorXcd v = L.vectorize(x0);

  const double dt = o.dt > 0.0 ? o.dt : default_time_step(p);
  const double t_final = o.t_final > 0.0 ? o.t_final : 10.0 / std::min({p.kappa, p.gamma1, p.gamma2});
  const long max_steps = static_cast<long>(std::ceil(t_final / dt));

  std::vector<cplx> f;
  f.reserve(max_steps + 1);
  f.push_back(L.overlap(a, v));
  double peak = std::abs(f[0]);
  const Eigen::Index n = L.size();
  Eigen::VectorXcd k1(n), k2(n), k3(n), k4(n);
  long step = 0;
  for (; step < max_steps; ++step) {
    k1 = L.apply(v);
    k2 = L.apply(v + 0.5 * dt * k1);
    k3 = L.apply(v + 0.5 * dt * k2);
    k4 = L.apply(v + dt * k3);
    v += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    f.push_back(L.overlap(a, v));
    peak = std::max(peak, std::abs(f.back()));
    if (!std::isfinite(std::abs(f.back()))) throw Error(ErrorCode::StepTooLarge, "regression evolution diverged");
    // Stop once the last tenth of the record stays far below the threshold.
    if ((step & 255) == 255 && step > 1000) {
      const std::size_t tail = f.size() / 10;
      double tail_max = 0.0;
      for (std::size_t i = f.size() - tail; i < f.size(); ++i) tail_max = std::max(tail_max, std::abs(f[i]));
      if (tail_max < 0.1 * o.decay_threshold * peak) {
        ++step;
        break;
      }
    }
  }

  PhotonSpectrum out;
  out.steps = step;
  out.t_final = dt * static_cast<double>(f.size() - 1);
  out.tail_ratio = peak > 0.0 ? std::abs(f.back()) / peak : 0.0;
  if (out.tail_ratio > o.decay_threshold) {
    if (!o.tail_window)
      throw Error(ErrorCode::InsufficientHorizon,
                  "correlation at t_final is " + std::to_string(out.tail_ratio) + " of its peak");
    // Exponential taper over the second half, reaching 0.1 * threshold at the end.
    const double half = 0.5 * out.t_final;
    out.window_rate = std::log(10.0 / o.decay_threshold) / half;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double t = dt * static_cast<double>(i);
      if (t > half) f[i] *= std::exp(-out.window_rate * (t - half));
    }
  }

  out.omega = omega;
  out.retarded.resize(omega.size());
  out.dos.resize(omega.size());
  const double w21 = p.omega21();
  const cplx I(0.0, 1.0);
  for (std::size_t i = 0; i < omega.size(); ++i) {
    const cplx fp = filon_half_line(f, dt, omega[i] + w21);
    const cplx fm = filon_half_line(f, dt, w21 - omega[i]);
    out.retarded[i] = -I * (fp - std::conj(fm));
    out.dos[i] = -2.0 * out.retarded[i].imag();
  }
  return out;
}

}  // namespace cavitrans
