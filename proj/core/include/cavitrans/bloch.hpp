// bloch.hpp — open-chain Bloch states and edge projectors
#pragma once

#include <array>

#include <Eigen/Dense>

#include "cavitrans/params.hpp"

namespace cavitrans {

// Storage is 0-based: phi(j, k) holds the amplitude of Bloch state k+1 on site j+1.
struct BlochBasis {
  int n = 0;
  Eigen::MatrixXd phi;
  std::array<Eigen::VectorXd, 2> dispersion;  // omega_{alpha,k}, increasing in k
  Eigen::MatrixXd sigma1;                     // phi^1_k phi^1_k'
  Eigen::MatrixXd sigmaN;                     // phi^N_k phi^N_k'

  // Projector onto site j (0-based) in the Bloch representation.
  Eigen::MatrixXd sigma(int j) const { return phi.row(j).transpose() * phi.row(j); }
  // Index of the central state for odd n.
  int central_state() const { return (n - 1) / 2; }
};

BlochBasis bloch_basis(const SystemParams& params);

}  // namespace cavitrans
