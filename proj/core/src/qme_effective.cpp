#include "cavitrans/qme_effective.hpp"

#include <algorithm>
#include <cmath>

#include "cavitrans/errors.hpp"

namespace cavitrans {

EffectiveRates effective_rates(const SystemParams& p) {
  const double g2 = p.g * p.g, d = p.detuning(), k = p.kappa;
  EffectiveRates r;
  r.gamma_c = p.gamma_c();
  r.gamma_delta = g2 * d / (2.0 * d * d + 0.5 * k * k);
  r.gamma_kappa = g2 * k / (4.0 * d * d + k * k);
  return r;
}

SparseMatrixC collective_lowering(const ManyBodyBasis& basis, Statistics stats) {
  SparseMatrixC s(basis.dim(), basis.dim());
  for (int j = 0; j < basis.n_sites(); ++j)
    s += SparseMatrixC(basis.creator(basis.mode(0, j), stats) * basis.annihilator(basis.mode(1, j), stats));
  return s;
}

namespace {

void require_electron_only(const ManyBodyBasis& basis, const SystemParams& p) {
  if (basis.n_max() != 0) throw Error(ErrorCode::InvalidArgument, "effective model needs an electron-only basis");
  if (basis.n_sites() != p.n_sites) throw Error(ErrorCode::InvalidArgument, "basis does not match n_sites");
}

ChargeTable electron_charges(const ManyBodyBasis& basis) {
  ChargeTable t;
  t.moduli = {0, 0};
  t.values.resize(basis.dim());
  for (int s = 0; s < basis.dim(); ++s) {
    const int lower = basis.count(s, 0), upper = basis.count(s, 1);
    t.values[s] = {lower + upper, upper};
  }
  return t;
}

// Cavity-induced terms: coherent shift 2 Gamma_Delta S+S- and dissipator 2 Gamma_kappa D[S-].
void add_collective(LindbladGenerator& gen, const SystemParams& p, const ManyBodyBasis& basis,
                    const EffectiveOptions& o) {
  const Statistics stats = o.hardcore_bosons ? Statistics::HardcoreBoson : Statistics::Fermion;
  const EffectiveRates r = effective_rates(p);
  const double rate = o.detuned ? r.gamma_kappa : r.gamma_c;
  const double shift = o.detuned ? r.gamma_delta : 0.0;
  std::vector<SparseMatrixC> lowering;
  if (o.nonlocal) {
    lowering.push_back(collective_lowering(basis, stats));
  } else {
    for (int j = 0; j < basis.n_sites(); ++j)
      lowering.push_back(basis.creator(basis.mode(0, j), stats) * basis.annihilator(basis.mode(1, j), stats));
  }
  const double nb = p.n_photon_bath;
  for (auto& s : lowering) {
    const SparseMatrixC raising = s.adjoint();
    if (shift != 0.0) {
      gen.hamiltonian += 2.0 * shift * (1.0 + nb) * SparseMatrixC(raising * s);
      if (nb > 0.0) gen.hamiltonian -= 2.0 * shift * nb * SparseMatrixC(s * raising);
    }
    if (rate == 0.0) continue;
    gen.jumps.push_back({2.0 * rate * (1.0 + nb), s});
    if (nb > 0.0) gen.jumps.push_back({2.0 * rate * nb, raising});
  }
}

}  // namespace

LindbladGenerator effective_generator(const SystemParams& p, const ManyBodyBasis& basis, const EffectiveOptions& o) {
  require_electron_only(basis, p);
  const Statistics stats = o.hardcore_bosons ? Statistics::HardcoreBoson : Statistics::Fermion;
  LindbladGenerator gen;
  const int n = basis.n_sites();
  gen.hamiltonian = SparseMatrixC(basis.dim(), basis.dim());
  for (int band = 0; band < 2; ++band) {
    const double t = p.hopping(band);
    if (t == 0.0) continue;
    for (int j = 0; j + 1 < n; ++j) {
      SparseMatrixC hop = basis.creator(basis.mode(band, j + 1), stats) * basis.annihilator(basis.mode(band, j), stats);
      gen.hamiltonian -= t * hop;
      gen.hamiltonian -= t * SparseMatrixC(hop.adjoint());
    }
  }
  gen.jumps = chain_cavity_jumps(p, basis, stats);
  add_collective(gen, p, basis, o);
  gen.hamiltonian.makeCompressed();
  return gen;
}

Liouvillian build_effective_liouvillian(const SystemParams& p, const ManyBodyBasis& basis,
                                        const EffectiveOptions& o, bool use_symmetry) {
  const LindbladGenerator gen = effective_generator(p, basis, o);
  return Liouvillian::build(gen, use_symmetry ? electron_charges(basis) : ChargeTable{});
}

Liouvillian build_collective_dissipator(const SystemParams& p, const ManyBodyBasis& basis,
                                        const EffectiveOptions& o, bool use_symmetry) {
  require_electron_only(basis, p);
  LindbladGenerator gen;
  gen.hamiltonian = SparseMatrixC(basis.dim(), basis.dim());
  add_collective(gen, p, basis, o);
  return Liouvillian::build(gen, use_symmetry ? electron_charges(basis) : ChargeTable{});
}

EffectivePhotonNumber effective_photon_number(const DensityOperator& rho, const ManyBodyBasis& basis,
                                              const SystemParams& p) {
  const SparseMatrixC s = collective_lowering(basis);
  const SparseMatrixC ss = SparseMatrixC(s.adjoint()) * s;
  const double sps = (ss * rho).trace().real();
  EffectivePhotonNumber out;
  out.estimate = 4.0 * p.gamma_c() / p.kappa * sps;
  out.bound = p.n_sites * p.g * p.g / (0.25 * p.kappa * p.kappa);
  return out;
}

QmeSolution steady_state_effective(const SystemParams& p, const EffectiveQmeOptions& o) {
  validate(p);
  if (p.n_sites > 6) throw Error(ErrorCode::InvalidArgument, "effective master equation limited to n_sites <= 6");
  ManyBodyBasis basis(p.n_sites, 0);
  const Liouvillian L = build_effective_liouvillian(p, basis, o.model);
  QmeSolution out;
  out.block_size = L.size();
  if (o.solver == SteadySolver::Null) {
    SteadyState ss = steady_state_null(L);
    out.rho = std::move(ss.rho);
    out.residual = ss.residual;
  } else {
    EvolveOptions eo;
    eo.dt = o.dt > 0.0 ? o.dt : default_time_step(p);
    eo.t_final = o.t_max > 0.0 ? o.t_max : 200.0 / std::min(p.gamma1, p.gamma2);
    eo.steady_tol = o.steady_tol;
    DensityOperator rho0 = DensityOperator::Zero(basis.dim(), basis.dim());
    const int s0 = basis.index((1u << p.n_sites) - 1u, 0);
    rho0(s0, s0) = 1.0;
    const Trajectory tr = evolve_rk4(L, L.vectorize(rho0), eo);
    if (!tr.reached_steady)
      throw Error(ErrorCode::NotConverged, "RK4 did not reach steady_tol, residual " + std::to_string(tr.residual));
    out.rho = L.unvectorize(tr.final_state);
    out.residual = tr.residual;
    out.steps = tr.steps;
  }
  out.currents = current_qme(out.rho, p, basis);
  out.populations = site_populations(out.rho, basis);
  out.nbar = effective_photon_number(out.rho, basis, p).estimate;
  if (std::sqrt(double(p.n_sites)) * p.g >= 0.25 * p.kappa)
    out.warnings.push_back("sqrt(N) g >= kappa/4: cavity elimination outside its validity range");
  return out;
}

}  // namespace cavitrans
