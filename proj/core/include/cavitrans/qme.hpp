// qme.hpp — full chain + cavity master equation
#pragma once

#include <array>
#include <string>
#include <vector>

#include "cavitrans/lindblad.hpp"
#include "cavitrans/params.hpp"

namespace cavitrans {

// Exactly one of rwa / counter_rotating must be set.
struct HamiltonianOptions {
  bool rwa = true;
  bool counter_rotating = false;
  bool hardcore_bosons = false;
};

SparseMatrixC build_hamiltonian(const SystemParams& params, const ManyBodyBasis& basis,
                                const HamiltonianOptions& options = {});

// Lead and cavity jump operators for the given statistics.
std::vector<JumpOperator> chain_cavity_jumps(const SystemParams& params, const ManyBodyBasis& basis,
                                             Statistics stats);

// (electron number, upper-band electrons + photons). The second charge is only
// conserved modulo 2 once counter-rotating terms are present.
ChargeTable chain_cavity_charges(const ManyBodyBasis& basis, bool counter_rotating);

struct LiouvillianOptions {
  bool hardcore_bosons = false;
  bool counter_rotating = false;
  bool use_symmetry = true;  // false keeps every matrix element of rho
  int excitation_offset = 0;  // charge difference of the block in the second charge
};

Liouvillian build_liouvillian(const SparseMatrixC& H, const SystemParams& params, const ManyBodyBasis& basis,
                              const LiouvillianOptions& options = {});

struct QmeCurrents {
  double source = 0.0;  // J_s
  double drain = 0.0;   // J_d, negative for particles leaving
  double total = 0.0;   // (J_s - J_d)/2
  std::array<double, 2> band{};
};

QmeCurrents current_qme(const DensityOperator& rho, const SystemParams& params, const ManyBodyBasis& basis);
// populations(band, site)
Eigen::MatrixXd site_populations(const DensityOperator& rho, const ManyBodyBasis& basis);
double photon_number(const DensityOperator& rho, const ManyBodyBasis& basis);

enum class SteadySolver { Null, Rk4 };

struct QmeOptions {
  int n_max = 2;
  SteadySolver solver = SteadySolver::Null;
  double dt = 0.0;          // 0 selects default_time_step
  double steady_tol = 1e-10;
  double t_max = 0.0;       // RK4 horizon, 0 selects 200/min(gamma, kappa)
  bool hardcore_bosons = false;
  bool counter_rotating = false;
};

double default_time_step(const SystemParams& params);

struct QmeSolution {
  DensityOperator rho;
  QmeCurrents currents;
  Eigen::MatrixXd populations;
  double nbar = 0.0;
  double residual = 0.0;
  long steps = 0;
  Eigen::Index block_size = 0;
  std::vector<std::string> warnings;
};

QmeSolution solve_full_qme(const SystemParams& params, const QmeOptions& options = {});

// Initial state of the RK4 path: lower band filled, upper band empty, vacuum.
DensityOperator lower_band_filled(const ManyBodyBasis& basis);

struct RegressionOptions {
  double t_final = 0.0;  // 0 selects 10/min(kappa, gamma)
  double dt = 0.0;       // 0 selects default_time_step
  bool tail_window = true;
  double decay_threshold = 1e-4;
};

struct PhotonSpectrum {
  std::vector<double> omega;
  std::vector<cplx> retarded;  // D^r
  std::vector<double> dos;     // -2 Im D^r
  double t_final = 0.0;
  double window_rate = 0.0;  // exponential tail window applied, 0 if none
  double tail_ratio = 0.0;   // |C(t_final)| / max |C|
  long steps = 0;
};

// Photon DOS from <[A(tau), A(0)]> with A = a + a^+, evolved in the frame
// rotating at omega21. RWA only.
PhotonSpectrum photon_dos_regression(const SystemParams& params, const ManyBodyBasis& basis,
                                     const DensityOperator& rho_ss, const std::vector<double>& omega,
                                     const QmeOptions& model = {}, const RegressionOptions& options = {});

// Frequencies centred on omega21 wide enough for the polariton doublet.
std::vector<double> default_photon_frequencies(const SystemParams& params, int count = 4001);

}  // namespace cavitrans
