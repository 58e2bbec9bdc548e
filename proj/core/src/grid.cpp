#include "cavitrans/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cavitrans/errors.hpp"

namespace cavitrans {

namespace {

constexpr int kArraysPerBand = 6;

std::array<Window, 2> band_windows(const SystemParams& p, double h, double margin) {
  std::array<Window, 2> w;
  const double c = std::cos(std::numbers::pi / (p.n_sites + 1));
  for (int band = 0; band < 2; ++band) {
    const double half = 2.0 * p.hopping(band) * c + margin;
    const long lo = static_cast<long>(std::floor((p.omega(band) - half) / h));
    const long hi = static_cast<long>(std::ceil((p.omega(band) + half) / h));
    w[band] = Window{lo, hi - lo + 1};
  }
  return w;
}

Window photon_window(const std::array<Window, 2>& b) {
  const long reach = b[1].last() - b[0].first;
  return Window{-reach, 2 * reach + 1};
}

}  // namespace

Window FrequencyGrid::photon_upper() const {
  const long lo = band[1].first - band[0].last();
  const long hi = band[1].last() - band[0].first;
  return Window{lo, hi - lo + 1};
}

Window FrequencyGrid::photon_lower() const {
  const Window u = photon_upper();
  return Window{-u.last(), u.count};
}

double electron_storage_bytes(const FrequencyGrid& grid, int n_sites) {
  const double n2 = static_cast<double>(n_sites) * n_sites;
  return kArraysPerBand * sizeof(cplx) * n2 * static_cast<double>(grid.band[0].count + grid.band[1].count);
}

FrequencyGrid make_grid(const SystemParams& p, const GridOptions& o) {
  validate(p);
  if (p.omega2 <= p.omega1) throw Error(ErrorCode::InvalidArgument, "omega2 must exceed omega1");
  FrequencyGrid grid;
  const double margin = o.margin > 0.0
                            ? o.margin
                            : 10.0 * std::max({p.kappa, p.gamma1, p.gamma2, p.g * std::sqrt(double(p.n_sites))});
  double h;
  if (o.points > 0) {
    const double c = std::cos(std::numbers::pi / (p.n_sites + 1));
    const double widest = 4.0 * std::max(p.t1, p.t2) * c + 2.0 * margin;
    h = widest / static_cast<double>(o.points - 1);
  } else if (o.spacing > 0.0) {
    h = o.spacing;
  } else {
    h = std::min({1e-4, p.kappa / 6.0, std::min(p.gamma1, p.gamma2) / 10.0});
  }
  if (!(h > 0.0) || !std::isfinite(h)) throw Error(ErrorCode::InvalidArgument, "grid spacing must be positive");

  grid.h = h;
  grid.band = band_windows(p, h, margin);
  const double bytes = electron_storage_bytes(grid, p.n_sites);
  if (o.spacing <= 0.0 && o.points <= 0 && bytes > o.memory_budget) {
    grid.h = h * bytes / o.memory_budget;
    grid.band = band_windows(p, grid.h, margin);
    grid.notes.push_back("spacing raised from " + std::to_string(h) + " to " + std::to_string(grid.h) +
                         " to fit the memory budget");
  }
  grid.photon = photon_window(grid.band);
  grid.eta = o.eta > 0.0 ? o.eta : o.eta_factor * grid.h;
  check_grid(grid);
  return grid;
}

void check_grid(const FrequencyGrid& grid) {
  if (grid.eta < 2.0 * grid.h * (1.0 - 1e-12))
    throw Error(ErrorCode::GridTooCoarse, "eta " + std::to_string(grid.eta) + " below twice the spacing " +
                                              std::to_string(grid.h));
}

}  // namespace cavitrans
