// ngf.hpp — Keldysh Green's functions of the chain and cavity, SCBA fixed point
#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cavitrans/bloch.hpp"
#include "cavitrans/fft.hpp"
#include "cavitrans/grid.hpp"
#include "cavitrans/params.hpp"

namespace cavitrans {

// Cell: every stored electron value is the average over its lattice cell
// [omega - h/2, omega + h/2], evaluated exactly for a self-energy frozen over the
// cell. Lines narrower than h keep their full weight. Point: plain samples.
enum class Quadrature { Cell, Point };

// Contraction of the two band functions in the polarization bubble:
// Elementwise sums G2_kk' G1_kk', Matrix sums G2_kk' G1_k'k.
enum class BubbleTrace { Elementwise, Matrix };

// One band on its frequency window. Arrays are frequency-major: the N x N
// column-major block of point i starts at i * N * N. The sigma arrays hold the
// light-matter part only; the lead part is frequency independent.
// Advanced components are the adjoints of the retarded ones and are not stored.
struct ElectronBand {
  int n = 0;
  Window window;
  std::vector<cplx> retarded, lesser, greater;
  std::vector<cplx> sigma_retarded, sigma_lesser, sigma_greater;

  long points() const { return window.count; }
  long stride() const { return static_cast<long>(n) * n; }
  Eigen::Map<Eigen::MatrixXcd> block(std::vector<cplx>& v, long i) { return {v.data() + i * stride(), n, n}; }
  Eigen::Map<const Eigen::MatrixXcd> block(const std::vector<cplx>& v, long i) const {
    return {v.data() + i * stride(), n, n};
  }
  // chi = i(Sigma> - Sigma<) of the light-matter part.
  Eigen::MatrixXcd broadening(long i) const;
};

struct KeldyshSet {
  std::array<ElectronBand, 2> band;
};

// Photon functions on the photon window (point samples). The pi arrays hold the
// electron-hole polarization; the bath part is added analytically.
struct PhotonKeldysh {
  Window window;
  std::vector<cplx> retarded, lesser, greater;
  std::vector<cplx> pi_retarded, pi_lesser, pi_greater;

  long points() const { return window.count; }
};

struct LeadSelfEnergy {
  std::array<Eigen::MatrixXcd, 2> lesser, greater, retarded;
};

struct BathSelfEnergy {
  cplx lesser, greater, retarded;
};

// FFT plans and scratch sized for one grid. Not thread-safe.
class NgfWorkspace {
 public:
  NgfWorkspace(const FrequencyGrid& grid, int n_sites);
  ~NgfWorkspace();

  const FrequencyGrid& grid() const { return grid_; }
  int n_sites() const { return n_; }
  LatticeCorrelator& sigma(int band) { return *sigma_[band]; }
  LatticeCorrelator& polarization() { return *pi_; }
  HilbertTransform& hilbert_band(int band) { return *hilbert_band_[band]; }
  HilbertTransform& hilbert_photon() { return *hilbert_photon_; }

  std::vector<cplx> scratch_a, scratch_b, scratch_c, acc_lesser, acc_greater;

 private:
  FrequencyGrid grid_;
  int n_;
  std::array<std::unique_ptr<LatticeCorrelator>, 2> sigma_;
  std::unique_ptr<LatticeCorrelator> pi_;
  std::array<std::unique_ptr<HilbertTransform>, 2> hilbert_band_;
  std::unique_ptr<HilbertTransform> hilbert_photon_;
};

// Lower band full, upper band empty. Entries 0..N-1 belong to band 1, N..2N-1 to band 2.
Eigen::VectorXd default_occupations(int n_sites);

KeldyshSet allocate_electrons(const FrequencyGrid& grid, int n_sites);

// Diagonal non-interacting functions with delta lines of width eta.
KeldyshSet g0_electron(const FrequencyGrid& grid, const BlochBasis& basis, const Eigen::VectorXd& n0,
                       Quadrature quadrature = Quadrature::Cell);

LeadSelfEnergy lead_self_energy(const SystemParams& params, const BlochBasis& basis);

// Fills sigma_lesser and sigma_greater of both bands from the other band and D.
void lm_electron_self_energy(KeldyshSet& electrons, const PhotonKeldysh& photon, double g, NgfWorkspace& ws);

// sigma_retarded = (-i chi + H[chi]) / 2 from the stored lesser/greater parts.
void retarded_from_components(ElectronBand& band, HilbertTransform& hilbert);

// Solves Dyson and Keldysh for both bands and mixes the result into the stored
// functions: G <- mixing * G_new + (1 - mixing) * G_old. Returns
// max |G_new - G_old| / max |G_new| over all components and frequencies.
double dyson_keldysh_electron(KeldyshSet& electrons, const BlochBasis& basis, const LeadSelfEnergy& leads,
                              const FrequencyGrid& grid, Quadrature quadrature = Quadrature::Cell,
                              double mixing = 1.0);

// Electron-hole polarization pi_lesser / pi_greater on a fresh photon set.
PhotonKeldysh photon_polarization(const KeldyshSet& electrons, double g, NgfWorkspace& ws,
                                  BubbleTrace trace = BubbleTrace::Matrix);

BathSelfEnergy photon_bath_self_energy(double kappa, double omega);

// Fills pi_retarded and the dressed D from the polarization plus the bath.
void dyson_keldysh_photon(PhotonKeldysh& photon, const SystemParams& params, NgfWorkspace& ws);

// Photon functions with the bath alone.
PhotonKeldysh bath_only_photon(const SystemParams& params, NgfWorkspace& ws);

struct ScbaOptions {
  GridOptions grid;
  int max_iter = 500;
  double tol = 1e-8;
  double mixing = 0.5;
  // History length of Anderson extrapolation on the polarization; 0 falls back
  // to linear mixing of the electron functions.
  int anderson_depth = 5;
  Eigen::VectorXd n0;  // empty selects default_occupations
  Quadrature quadrature = Quadrature::Cell;
  BubbleTrace trace = BubbleTrace::Matrix;
  std::function<void(int iteration, double residual)> progress;
};

struct ScbaResult {
  SystemParams params;
  FrequencyGrid grid;
  BlochBasis basis;
  KeldyshSet electrons;
  PhotonKeldysh photon;
  LeadSelfEnergy leads;
  Eigen::VectorXd n0;
  int iterations = 0;
  double residual = 0.0;
  std::vector<std::string> warnings;
};

// Throws NotConverged when max_iter is exhausted.
ScbaResult scba_fixed_point(const SystemParams& params, const ScbaOptions& options = {});

struct NgfCurrents {
  std::array<double, 2> band{};          // (Gamma_alpha / 2) int T_alpha d omega / 2 pi
  double total = 0.0;
  std::array<double, 2> band_population{};  // Gamma_alpha n_{alpha N}
  double total_population = 0.0;
  std::array<std::vector<double>, 2> transmission;  // T_alpha on the band windows
};

// Throws ConsistencyViolation when the two total-current forms differ by more
// than rel_tol.
NgfCurrents transmission_and_current(const ScbaResult& result, const SystemParams& params, double rel_tol = 1e-2);

// n(alpha, j); throws UnphysicalPopulation outside [-eps, 1 + eps].
Eigen::MatrixXd populations_real_space(const ScbaResult& result, double eps = 1e-3);

// int d omega / 2 pi of G< / i per band, including the analytic tails beyond the window.
std::array<Eigen::MatrixXcd, 2> occupation_matrices(const ScbaResult& result);
// int d omega / 2 pi of A per band, tails included; the identity for an exact sum rule.
std::array<Eigen::MatrixXcd, 2> spectral_weights(const ScbaResult& result);

struct CavitySpectrum {
  std::vector<double> omega, dos, im_lesser;
  double nbar = 0.0;
};

CavitySpectrum cavity_dos_and_nbar(const PhotonKeldysh& photon, const SystemParams& params, const FrequencyGrid& grid);

// Closed-form first-order quantities built from the non-interacting electrons.

// Diagonal broadening chi_{alpha,k}(omega) with the bath-dressed cavity at omega_c.
Eigen::VectorXd first_order_broadening(const SystemParams& params, const BlochBasis& basis, int band, double omega,
                                       const Eigen::VectorXd& n0);
// Polarization Pi^r(omega + i eta) from the interband transitions omega_{2,k} - omega_{1,k}.
cplx first_order_polarization(const SystemParams& params, const BlochBasis& basis, double omega,
                              const Eigen::VectorXd& n0, double eta);
// D^r with the bath self-energy alone.
cplx bath_photon_propagator(const SystemParams& params, double omega);
// Lossless collective polaritons: omega^2 = omega21^2 -/+ 2 omega21 Omega.
std::pair<double, double> polariton_poles(double omega21, double rabi);

}  // namespace cavitrans
