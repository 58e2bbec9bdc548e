// fock.hpp — fermion (x) photon Fock space with Jordan-Wigner operators
#pragma once

#include <complex>
#include <cstdint>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace cavitrans {

using cplx = std::complex<double>;
using SparseMatrixC = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

enum class Statistics { Fermion, HardcoreBoson };

// Mode order: lower-band sites 1..N, then upper-band sites 1..N (Jordan-Wigner
// order). The photon factor is last: state = occupation_bits * (n_max + 1) + n.
// n_max = 0 gives the electron-only space.
class ManyBodyBasis {
 public:
  ManyBodyBasis(int n_sites, int n_max);

  int n_sites() const { return n_sites_; }
  int n_modes() const { return 2 * n_sites_; }
  int n_max() const { return n_max_; }
  int dim() const { return dim_; }

  int mode(int band, int site) const { return band * n_sites_ + site; }
  std::uint32_t occupation(int state) const { return static_cast<std::uint32_t>(state / (n_max_ + 1)); }
  int photons(int state) const { return state % (n_max_ + 1); }
  int index(std::uint32_t occupation, int photons) const {
    return static_cast<int>(occupation) * (n_max_ + 1) + photons;
  }
  bool occupied(int state, int mode) const { return (occupation(state) >> mode) & 1u; }
  int count(int state, int band) const;  // electrons in a band

  SparseMatrixC annihilator(int mode, Statistics stats = Statistics::Fermion) const;
  SparseMatrixC creator(int mode, Statistics stats = Statistics::Fermion) const {
    return annihilator(mode, stats).adjoint();
  }
  SparseMatrixC photon_annihilator() const;
  SparseMatrixC identity() const;

  // Diagonals of number operators.
  Eigen::VectorXd number(int mode) const;
  Eigen::VectorXd photon_number() const;

 private:
  int n_sites_;
  int n_max_;
  int dim_;
};

}  // namespace cavitrans
