#include "cavitrans/fock.hpp"

#include <bit>
#include <cmath>
#include <vector>

#include "cavitrans/errors.hpp"

namespace cavitrans {

ManyBodyBasis::ManyBodyBasis(int n_sites, int n_max) : n_sites_(n_sites), n_max_(n_max) {
  if (n_sites < 1 || n_sites > 12) throw Error(ErrorCode::InvalidArgument, "n_sites out of range for the Fock space");
  if (n_max < 0) throw Error(ErrorCode::CutoffTooSmall, "n_max must be >= 0");
  dim_ = (1 << (2 * n_sites)) * (n_max + 1);
}

int ManyBodyBasis::count(int state, int band) const {
  const std::uint32_t mask = ((1u << n_sites_) - 1u) << (band * n_sites_);
  return std::popcount(occupation(state) & mask);
}

SparseMatrixC ManyBodyBasis::annihilator(int mode, Statistics stats) const {
  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(dim_ / 2);
  const std::uint32_t bit = 1u << mode;
  const std::uint32_t below = bit - 1u;
  for (int s = 0; s < dim_; ++s) {
    const std::uint32_t occ = occupation(s);
    if (!(occ & bit)) continue;
    double sign = 1.0;
    if (stats == Statistics::Fermion && (std::popcount(occ & below) & 1)) sign = -1.0;
    trip.emplace_back(index(occ & ~bit, photons(s)), s, sign);
  }
  SparseMatrixC m(dim_, dim_);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

SparseMatrixC ManyBodyBasis::photon_annihilator() const {
  std::vector<Eigen::Triplet<cplx>> trip;
  for (int s = 0; s < dim_; ++s) {
    const int n = photons(s);
    if (n > 0) trip.emplace_back(s - 1, s, std::sqrt(static_cast<double>(n)));
  }
  SparseMatrixC m(dim_, dim_);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

SparseMatrixC ManyBodyBasis::identity() const {
  SparseMatrixC m(dim_, dim_);
  m.setIdentity();
  return m;
}

Eigen::VectorXd ManyBodyBasis::number(int mode) const {
  Eigen::VectorXd d(dim_);
  for (int s = 0; s < dim_; ++s) d(s) = occupied(s, mode) ? 1.0 : 0.0;
  return d;
}

Eigen::VectorXd ManyBodyBasis::photon_number() const {
  Eigen::VectorXd d(dim_);
  for (int s = 0; s < dim_; ++s) d(s) = photons(s);
  return d;
}

}  // namespace cavitrans
