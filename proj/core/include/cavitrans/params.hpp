// params.hpp — physical parameters of the two-band chain and its cavity
#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace cavitrans {

// Flat key/value configuration. Every value is numeric.
using Config = std::map<std::string, double>;

// Energies are measured in units of the interband splitting omega2 - omega1.
// Band index 0 is the lower orbital, 1 the upper one.
struct SystemParams {
  int n_sites = 0;
  double omega1 = -0.5;
  double omega2 = 0.5;
  double t1 = 0.0;
  double t2 = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double omega_c = 1.0;
  double kappa = 0.0;
  double g = 0.0;
  double n_photon_bath = 0.0;  // thermal occupation of the cavity bath, master equations only

  double omega(int band) const { return band == 0 ? omega1 : omega2; }
  double hopping(int band) const { return band == 0 ? t1 : t2; }
  double gamma(int band) const { return band == 0 ? gamma1 : gamma2; }

  double omega21() const { return omega2 - omega1; }
  double detuning() const { return omega21() - omega_c; }
  double gamma_c() const { return kappa > 0.0 ? g * g / kappa : 0.0; }
  // Gamma_c over the mean lead rate.
  double cooperativity() const { return gamma_c() / (0.5 * (gamma1 + gamma2)); }
  // omega_{2,N} - omega_{2,1}
  double bandwidth2() const;
  // Largest spacing between adjacent upper-band Bloch energies.
  double level_spacing() const;
};

// Required keys: n_sites, t1, t2, gamma1, gamma2 (or gamma for both), omega1,
// omega2, omega_c, kappa, g. Optional: n_photon_bath. Unknown keys are ignored.
SystemParams build_params(const Config& config);

// Throws NonPositiveRate/InvalidArgument when an invariant is violated.
void validate(const SystemParams& params);

// Reads a flat YAML mapping of numeric values.
Config load_config(const std::filesystem::path& path);

Config to_config(const SystemParams& params);

}  // namespace cavitrans
