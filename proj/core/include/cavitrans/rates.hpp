// rates.hpp — closed-form currents and the factorized two-site rate equations
#pragma once

#include "cavitrans/params.hpp"

namespace cavitrans {

// Decoupled band (g = 0) steady state. Currents carry the electron charge e = 1.
struct BandCurrent {
  double current = 0.0;          // J^(0)_alpha
  double edge_population = 0.0;  // n_{alpha,N}
};

BandCurrent g0_current(double t_alpha, double gamma_alpha);

// Total g = 0 current summed over both bands.
double g0_total_current(const SystemParams& params);

// Two-site, flat-lower-band model. n_{alpha j}: band alpha, site j.
// C is the imaginary part of the upper-band coherence <c+_{21} c_{22}>.
struct RateState {
  double n11 = 1.0;
  double n12 = 0.0;
  double n21 = 1.0;
  double n22 = 0.0;
  double C = 0.0;
};

struct RateOptions {
  bool coherence_damping = false;
};

// Uses t2, gamma1, gamma2 and Gamma_c from params; n_sites and t1 are not read.
RateState meanfield_ode_rhs(const RateState& state, const SystemParams& params,
                            const RateOptions& options = {});

double phi_factor(double gamma_c, double gamma, double n22);

struct MeanFieldResult {
  RateState state;
  double current = 0.0;     // gamma1 n12 + gamma2 n22
  double current_g0 = 0.0;  // same model at Gamma_c = 0
  double phi = 1.0;
  double delta_j = 0.0;     // current / current_g0 - 1
  int iterations = 0;
};

// Damped Newton solve of the stationary state starting from the Gamma_c = 0 branch.
MeanFieldResult meanfield_steady_current(const SystemParams& params, const RateOptions& options = {});

struct PerturbativeDeltaJ {
  double full = 0.0;        // 2 t2^2/(t2^2 + Gamma^2/4) Gamma_c/Gamma
  double simplified = 0.0;  // 2 Gamma_c/Gamma
  bool beyond_validity = false;  // Gamma_c/Gamma > 0.3
};

PerturbativeDeltaJ delta_j_perturbative(const SystemParams& params);

}  // namespace cavitrans
