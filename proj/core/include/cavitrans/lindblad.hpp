// lindblad.hpp — Lindblad generators restricted to charge sectors, RK4 and null-space solvers
#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "cavitrans/fock.hpp"

namespace cavitrans {

using DensityOperator = Eigen::MatrixXcd;

// Contributes rate * D[op], with D[A] rho = 2 A rho A^+ - {A^+ A, rho}.
struct JumpOperator {
  double rate = 0.0;
  SparseMatrixC op;
};

struct LindbladGenerator {
  SparseMatrixC hamiltonian;
  std::vector<JumpOperator> jumps;
};

// Integer charges attached to every basis state. A modulus of 0 marks a U(1)
// charge, m > 0 a Z_m charge. An empty table keeps every matrix element.
struct ChargeTable {
  std::vector<std::vector<int>> values;  // values[state][charge]
  std::vector<int> moduli;
};

// Generator acting on the matrix elements rho_ab whose charge difference
// q(a) - q(b) equals `offset`. With offset zero this is the block holding
// every steady state of a weakly symmetric generator.
class Liouvillian {
 public:
  using Matrix = Eigen::SparseMatrix<cplx, Eigen::ColMajor, int>;

  static Liouvillian build(const LindbladGenerator& gen, const ChargeTable& charges,
                           const std::vector<int>& offset = {});

  int dim() const { return dim_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(rows_.size()); }
  const Matrix& matrix() const { return matrix_; }
  int row(Eigen::Index p) const { return rows_[p]; }
  int col(Eigen::Index p) const { return cols_[p]; }
  Eigen::Index find(int a, int b) const;
  // Index of (b, a), or -1 when that element is outside the block.
  Eigen::Index partner(Eigen::Index p) const { return find(cols_[p], rows_[p]); }
  bool hermitian_block() const { return hermitian_block_; }

  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const { return matrix_ * v; }
  Eigen::VectorXcd vectorize(const DensityOperator& rho) const;
  DensityOperator unvectorize(const Eigen::VectorXcd& v) const;
  cplx trace(const Eigen::VectorXcd& v) const;
  // sum_p conj(op_ab) v_p = Tr(op^+ X) for the operator X stored in v.
  cplx overlap(const SparseMatrixC& op, const Eigen::VectorXcd& v) const;
  // Tr(diag(d) X)
  cplx expectation_diagonal(const Eigen::VectorXd& d, const Eigen::VectorXcd& v) const;

  // Adds c to every diagonal entry of the generator.
  void shift(cplx c);

 private:
  int dim_ = 0;
  std::vector<int> rows_, cols_;
  std::vector<Eigen::Index> lookup_;  // dim*dim, -1 outside
  std::vector<Eigen::Index> diagonal_;
  Matrix matrix_;
  bool hermitian_block_ = true;
};

struct SteadyState {
  DensityOperator rho;
  Eigen::VectorXcd vec;
  double residual = 0.0;  // max |L rho|
};

// Sparse LU solve of L rho = 0 with one equation replaced by Tr rho = 1.
SteadyState steady_state_null(const Liouvillian& L);

// Number of (numerically) zero singular values of the generator, dense path.
int null_space_dimension(const Liouvillian& L, double tol = 1e-9);

struct EvolveOptions {
  double dt = 0.0;
  double t_final = 0.0;
  double steady_tol = 0.0;  // > 0 stops once max |L rho| < steady_tol
  int record_every = 0;     // 0 keeps only the final state
  bool symmetrize = true;   // rho <- (rho + rho^+)/2 after each step
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXcd> states;
  Eigen::VectorXcd final_state;
  double final_time = 0.0;
  long steps = 0;
  bool reached_steady = false;
  double residual = 0.0;
  double max_trace_step_change = 0.0;
};

using StepObserver = std::function<void(double t, const Eigen::VectorXcd& v)>;

// Throws StepTooLarge when the trace drifts by more than 1e-6.
Trajectory evolve_rk4(const Liouvillian& L, const Eigen::VectorXcd& v0, const EvolveOptions& options,
                      const StepObserver& observer = {});

}  // namespace cavitrans
