// observables.hpp — derived quantities shared by the solvers
#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cavitrans/ngf.hpp"
#include "cavitrans/params.hpp"

namespace cavitrans {

// Currents in units of e (multiply by 1/Gamma for e Gamma units).
struct ObservableRecord {
  std::string method;
  double J = 0.0;
  double J_s = 0.0;
  double J_d = 0.0;
  double J0 = 0.0;  // g = 0 reference current
  double deltaJ = 0.0;
  Eigen::MatrixXd populations;  // (band, site)
  std::optional<double> omega_S;
  std::optional<double> omega_n;
  std::optional<double> chi_ratio;
  std::optional<double> transfer_time;  // in units of 1/g
  double nbar = 0.0;
};

// J / J0 - 1.
double delta_j(double current, double current_g0);

// Recomputes deltaJ from J and J0 and checks the population range.
// Throws ConsistencyViolation or UnphysicalPopulation.
void check_record(const ObservableRecord& record, double eps = 1e-3);

// A_{j0,j}(tau) = 2 Re <{c_j(tau), c+_j0(0)}> for one band, evaluated in the
// frame rotating at the band centre omega_alpha.
struct RealTimeSpectral {
  int band = 0;
  int j0 = 0;  // 0-based
  double carrier = 0.0;
  std::vector<double> tau;
  Eigen::MatrixXd amplitude;  // (tau, site): 2 Re of the envelope
  Eigen::MatrixXd magnitude;  // (tau, site): 2 |envelope|
};

// Throws GridTooCoarse when tau_max exceeds the Nyquist time 2 pi / h.
// oversample pads the frequency series to refine the time step below 2 pi / span.
RealTimeSpectral spectral_function_realtime(const ScbaResult& result, int j0, int band, double tau_max,
                                            int oversample = 4);

struct TransferTime {
  double time = 0.0;            // first tau where the off-site fraction crosses the threshold
  double time_times_g = 0.0;
  double peak_fraction = 0.0;   // largest off-site fraction up to the horizon
  double site_weight = 0.0;     // largest |A_j| over j != j0, relative to |A_j0(0)|
  double site_weight_time = 0.0;
  double parity_contrast = 0.0; // off-site weight at even / odd distance from j0, at site_weight_time
};

// Off-site fraction sum_{j != j0} |A_j| / sum_j |A_j|.
// Throws NoTransferDetected when it never exceeds threshold.
TransferTime transfer_time(const RealTimeSpectral& a, double g, double threshold = 0.05);

struct PolaritonPeaks {
  double lower = 0.0;
  double upper = 0.0;
  double splitting = 0.0;     // (upper - lower) / 2
  std::vector<double> interior;
  double interior_weight = 0.0;  // integral of A_c between the two outer peaks, over the total
};

// Local maxima above rel_floor * max(A_c), refined on a parabola.
// Throws PeaksNotResolved with fewer than two maxima.
PolaritonPeaks polariton_splitting(const std::vector<double>& omega, const std::vector<double>& dos,
                                   double rel_floor = 1e-3);

// g sqrt(N1 - N2) from (band, site) populations. Throws InvertedPopulations when N1 < N2.
double vacuum_rabi(const Eigen::MatrixXd& populations, double g);

// chi_{1,k0}(omega_{1,k0}) including the leads, over its g = 0 value. Requires odd N.
double broadening_ratio(const ScbaResult& result, const SystemParams& params);

}  // namespace cavitrans
