// grid.hpp — windowed uniform frequency lattice shared by electrons and the cavity
#pragma once

#include <array>
#include <string>
#include <vector>

#include "cavitrans/fft.hpp"
#include "cavitrans/params.hpp"

namespace cavitrans {

// All windows live on one lattice omega_n = n * h, so a convolution of two
// windows lands on lattice points as well. Each electron band gets its own
// window around its dispersion; the photon window runs contiguously over
// [-(W2 - W1), W2 - W1], the range reached by interband differences.
struct FrequencyGrid {
  double h = 0.0;
  double eta = 0.0;  // width of the Lorentzians standing in for delta functions
  std::array<Window, 2> band;
  Window photon;
  std::vector<std::string> notes;

  double omega(long n) const { return static_cast<double>(n) * h; }
  double omega_min(const Window& w) const { return omega(w.first); }
  double omega_max(const Window& w) const { return omega(w.last()); }
  long n_points() const { return band[0].count + band[1].count + photon.count; }

  // Photon sub-windows holding W2 - W1 (around +omega21) and W1 - W2.
  Window photon_upper() const;
  Window photon_lower() const;
};

struct GridOptions {
  double spacing = 0.0;    // 0 selects min(1e-4, kappa/6, gamma/10)
  long points = 0;         // > 0 fixes the point count of the widest band window instead
  double margin = 0.0;     // 0 selects 10 max(kappa, gamma1, gamma2, g sqrt(N))
  double eta = 0.0;        // 0 selects eta_factor * h
  double eta_factor = 4.0;
  double memory_budget = 3.0e9;  // bytes for the per-band matrix arrays
};

FrequencyGrid make_grid(const SystemParams& params, const GridOptions& options = {});

// Bytes held by the six frequency-major N x N arrays of both bands.
double electron_storage_bytes(const FrequencyGrid& grid, int n_sites);

// Throws GridTooCoarse if eta < 2h.
void check_grid(const FrequencyGrid& grid);

}  // namespace cavitrans
