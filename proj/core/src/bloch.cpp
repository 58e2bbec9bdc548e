#include "cavitrans/bloch.hpp"

#include <cmath>
#include <numbers>

#include "cavitrans/errors.hpp"

namespace cavitrans {

BlochBasis bloch_basis(const SystemParams& params) {
  const int n = params.n_sites;
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "n_sites must be >= 2");
  BlochBasis b;
  b.n = n;
  const double q = std::numbers::pi / (n + 1);
  const double norm = std::sqrt(2.0 / (n + 1));
  b.phi.resize(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) b.phi(j, k) = norm * std::sin(q * (j + 1) * (k + 1));
  for (int band = 0; band < 2; ++band) {
    b.dispersion[band].resize(n);
    for (int k = 0; k < n; ++k)
      b.dispersion[band](k) = params.omega(band) - 2.0 * params.hopping(band) * std::cos(q * (k + 1));
  }
  // The central state of an odd chain sits exactly at the orbital energy.
  if (n % 2 == 1)
    for (int band = 0; band < 2; ++band) b.dispersion[band](b.central_state()) = params.omega(band);
  b.sigma1 = b.sigma(0);
  b.sigmaN = b.sigma(n - 1);
  return b;
}

}  // namespace cavitrans
