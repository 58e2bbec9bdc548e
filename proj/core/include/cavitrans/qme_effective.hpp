// qme_effective.hpp — electron-only master equation with the cavity eliminated
#pragma once

#include <string>
#include <vector>

#include "cavitrans/qme.hpp"

namespace cavitrans {

struct EffectiveRates {
  double gamma_c = 0.0;      // g^2 / kappa
  double gamma_delta = 0.0;  // g^2 Delta / (2 Delta^2 + kappa^2/2)
  double gamma_kappa = 0.0;  // g^2 kappa / (4 Delta^2 + kappa^2)
};

EffectiveRates effective_rates(const SystemParams& params);

struct EffectiveOptions {
  bool nonlocal = true;   // false keeps only the on-site part of the collective dissipator
  bool detuned = false;   // include the Delta-dependent coherent shift and rate
  bool hardcore_bosons = false;
};

// S^- = sum_j c+_{1j} c_{2j} on the electron-only space.
SparseMatrixC collective_lowering(const ManyBodyBasis& basis, Statistics stats = Statistics::Fermion);

LindbladGenerator effective_generator(const SystemParams& params, const ManyBodyBasis& basis,
                                      const EffectiveOptions& options = {});

// Requires an electron-only basis (n_max = 0).
Liouvillian build_effective_liouvillian(const SystemParams& params, const ManyBodyBasis& basis,
                                        const EffectiveOptions& options = {}, bool use_symmetry = true);

// Only the cavity-induced part of the generator.
Liouvillian build_collective_dissipator(const SystemParams& params, const ManyBodyBasis& basis,
                                        const EffectiveOptions& options = {}, bool use_symmetry = true);

struct EffectivePhotonNumber {
  double estimate = 0.0;  // (4 Gamma_c / kappa) <S+ S->
  double bound = 0.0;     // N g^2 / (kappa/2)^2
};

EffectivePhotonNumber effective_photon_number(const DensityOperator& rho, const ManyBodyBasis& basis,
                                              const SystemParams& params);

struct EffectiveQmeOptions {
  EffectiveOptions model;
  SteadySolver solver = SteadySolver::Null;
  double dt = 0.0;
  double steady_tol = 1e-10;
  double t_max = 0.0;
};

QmeSolution steady_state_effective(const SystemParams& params, const EffectiveQmeOptions& options = {});

}  // namespace cavitrans
