#include "cavitrans/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>

#include "cavitrans/errors.hpp"

namespace cavitrans {

namespace {

std::vector<int> reduce(std::vector<int> q, const std::vector<int>& moduli) {
  for (std::size_t i = 0; i < q.size(); ++i)
    if (moduli[i] > 0) q[i] = ((q[i] % moduli[i]) + moduli[i]) % moduli[i];
  return q;
}

}  // namespace

Liouvillian Liouvillian::build(const LindbladGenerator& gen, const ChargeTable& charges,
                               const std::vector<int>& offset_in) {
  Liouvillian L;
  const int D = static_cast<int>(gen.hamiltonian.rows());
  L.dim_ = D;
  const std::size_t nq = charges.moduli.size();
  if (!charges.values.empty() && static_cast<int>(charges.values.size()) != D)
    throw Error(ErrorCode::InvalidArgument, "charge table does not match the Hilbert space");
  std::vector<int> offset = offset_in;
  offset.resize(nq, 0);
  L.hermitian_block_ = std::all_of(offset.begin(), offset.end(), [](int x) { return x == 0; });

  auto key = [&](int s) {
    return nq == 0 ? std::vector<int>{} : reduce(charges.values[s], charges.moduli);
  };
  std::map<std::vector<int>, std::vector<int>> groups;
  for (int s = 0; s < D; ++s) groups[key(s)].push_back(s);

  L.lookup_.assign(static_cast<std::size_t>(D) * D, -1);
  for (int a = 0; a < D; ++a) {
    std::vector<int> kb = key(a);
    for (std::size_t i = 0; i < nq; ++i) kb[i] -= offset[i];
    kb = reduce(kb, charges.moduli);
    auto it = groups.find(kb);
    if (it == groups.end()) continue;
    for (int b : it->second) {
      L.lookup_[static_cast<std::size_t>(a) * D + b] = static_cast<Eigen::Index>(L.rows_.size());
      if (a == b) L.diagonal_.push_back(static_cast<Eigen::Index>(L.rows_.size()));
      L.rows_.push_back(a);
      L.cols_.push_back(b);
    }
  }

  SparseMatrixC heff = gen.hamiltonian;
  for (const auto& j : gen.jumps) {
    SparseMatrixC k = SparseMatrixC(j.op.adjoint()) * j.op;
    heff -= cplx(0.0, j.rate) * k;
  }
  heff.makeCompressed();

  const Eigen::Index n = L.size();
  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(static_cast<std::size_t>(n) * 12);
  auto add = [&](Eigen::Index p, int c, int d, cplx v) {
    if (v == cplx(0.0)) return;
    const Eigen::Index q = L.find(c, d);
    if (q < 0) throw Error(ErrorCode::InvalidArgument, "generator does not conserve the declared charges");
    trip.emplace_back(static_cast<int>(p), static_cast<int>(q), v);
  };
  const cplx I(0.0, 1.0);
  for (Eigen::Index p = 0; p < n; ++p) {
    const int a = L.rows_[p], b = L.cols_[p];
    trip.emplace_back(static_cast<int>(p), static_cast<int>(p), cplx(0.0));
    for (SparseMatrixC::InnerIterator it(heff, a); it; ++it) add(p, static_cast<int>(it.col()), b, -I * it.value());
    for (SparseMatrixC::InnerIterator it(heff, b); it; ++it)
      add(p, a, static_cast<int>(it.col()), I * std::conj(it.value()));
    for (const auto& j : gen.jumps) {
      if (j.rate == 0.0) continue;
      for (SparseMatrixC::InnerIterator x(j.op, a); x; ++x)
        for (SparseMatrixC::InnerIterator y(j.op, b); y; ++y)
          add(p, static_cast<int>(x.col()), static_cast<int>(y.col()),
              2.0 * j.rate * x.value() * std::conj(y.value()));
    }
  }
  L.matrix_.resize(n, n);
  L.matrix_.setFromTriplets(trip.begin(), trip.end());
  L.matrix_.makeCompressed();
  return L;
}

Eigen::Index Liouvillian::find(int a, int b) const {
  if (a < 0 || b < 0 || a >= dim_ || b >= dim_) return -1;
  return lookup_[static_cast<std::size_t>(a) * dim_ + b];
}

Eigen::VectorXcd Liouvillian::vectorize(const DensityOperator& rho) const {
  Eigen::VectorXcd v(size());
  for (Eigen::Index p = 0; p < size(); ++p) v(p) = rho(rows_[p], cols_[p]);
  return v;
}

DensityOperator Liouvillian::unvectorize(const Eigen::VectorXcd& v) const {
  DensityOperator rho = DensityOperator::Zero(dim_, dim_);
  for (Eigen::Index p = 0; p < size(); ++p) rho(rows_[p], cols_[p]) = v(p);
  return rho;
}

cplx Liouvillian::trace(const Eigen::VectorXcd& v) const {
  cplx t = 0.0;
  for (auto p : diagonal_) t += v(p);
  return t;
}

cplx Liouvillian::overlap(const SparseMatrixC& op, const Eigen::VectorXcd& v) const {
  cplx s = 0.0;
  for (int r = 0; r < op.outerSize(); ++r)
    for (SparseMatrixC::InnerIterator it(op, r); it; ++it) {
      const Eigen::Index p = find(r, static_cast<int>(it.col()));
      if (p >= 0) s += std::conj(it.value()) * v(p);
    }
  return s;
}

cplx Liouvillian::expectation_diagonal(const Eigen::VectorXd& d, const Eigen::VectorXcd& v) const {
  cplx s = 0.0;
  for (auto p : diagonal_) s += d(rows_[p]) * v(p);
  return s;
}

void Liouvillian::shift(cplx c) {
  for (Eigen::Index p = 0; p < size(); ++p) matrix_.coeffRef(p, p) += c;
}

SteadyState steady_state_null(const Liouvillian& L) {
  if (!L.hermitian_block()) throw Error(ErrorCode::InvalidArgument, "steady state requires the zero-charge block");
  const Eigen::Index n = L.size();
  const Eigen::Index r0 = L.find(0, 0);
  const auto& M = L.matrix();

  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(M.nonZeros() + n);
  for (int k = 0; k < M.outerSize(); ++k)
    for (Liouvillian::Matrix::InnerIterator it(M, k); it; ++it)
      if (it.row() != r0) trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  for (Eigen::Index p = 0; p < n; ++p)
    if (L.row(p) == L.col(p)) trip.emplace_back(static_cast<int>(r0), static_cast<int>(p), cplx(1.0));
  Liouvillian::Matrix A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();

  auto degenerate = [&](const std::string& why) {
    std::string msg = why;
    if (n <= 3000) msg += ", null-space dimension " + std::to_string(null_space_dimension(L));
    return Error(ErrorCode::DegenerateNullSpace, msg);
  };

  Eigen::SparseLU<Liouvillian::Matrix, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success) throw degenerate("sparse LU failed");
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
  rhs(r0) = 1.0;
  Eigen::VectorXcd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite()) throw degenerate("singular constrained system");

  x /= L.trace(x);
  const double scale = M.coeffs().cwiseAbs().maxCoeff();
  const double residual = (M * x).cwiseAbs().maxCoeff();
  if (!(residual <= 1e-8 * std::max(scale, 1e-300))) throw degenerate("residual " + std::to_string(residual));

  SteadyState out;
  DensityOperator rho = L.unvectorize(x);
  out.rho = 0.5 * (rho + rho.adjoint());
  out.vec = L.vectorize(out.rho);
  out.residual = (M * out.vec).cwiseAbs().maxCoeff();
  return out;
}

int null_space_dimension(const Liouvillian& L, double tol) {
  const Eigen::MatrixXcd dense = Eigen::MatrixXcd(L.matrix());
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(dense);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 0;
  const double cut = tol * s(0);
  int count = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) <= cut) ++count;
  return count;
}

Trajectory evolve_rk4(const Liouvillian& L, const Eigen::VectorXcd& v0, const EvolveOptions& o,
                      const StepObserver& observer) {
  if (!(o.dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  const Eigen::Index n = L.size();
  std::vector<Eigen::Index> partner;
  const bool sym = o.symmetrize && L.hermitian_block();
  if (sym) {
    partner.resize(n);
    for (Eigen::Index p = 0; p < n; ++p) partner[p] = L.partner(p);
  }

  Trajectory tr;
  Eigen::VectorXcd v = v0;
  const cplx trace0 = L.trace(v);
  cplx trace_prev = trace0;
  double t = 0.0;
  if (o.record_every > 0) {
    tr.times.push_back(t);
    tr.states.push_back(v);
  }
  Eigen::VectorXcd k1 = L.apply(v), k2(n), k3(n), k4(n);
  tr.residual = k1.cwiseAbs().maxCoeff();
  if (o.steady_tol > 0.0 && tr.residual < o.steady_tol) tr.reached_steady = true;

  while (!tr.reached_steady && t < o.t_final - 1e-12 * o.dt) {
    const double h = std::min(o.dt, o.t_final - t);
    k2 = L.apply(v + 0.5 * h * k1);
    k3 = L.apply(v + 0.5 * h * k2);
    k4 = L.apply(v + h * k3);
    v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (sym) {
      for (Eigen::Index p = 0; p < n; ++p) {
        const Eigen::Index q = partner[p];
        if (q > p) {
          const cplx m = 0.5 * (v(p) + std::conj(v(q)));
          v(p) = m;
          v(q) = std::conj(m);
        } else if (q == p) {
          v(p) = v(p).real();
        }
      }
    }
    t += h;
    ++tr.steps;
    const cplx tc = L.trace(v);
    tr.max_trace_step_change = std::max(tr.max_trace_step_change, std::abs(tc - trace_prev));
    trace_prev = tc;
    if (!std::isfinite(std::abs(tc)) || std::abs(tc - trace0) > 1e-6)
      throw Error(ErrorCode::StepTooLarge, "trace drift at t = " + std::to_string(t));
    if (observer) observer(t, v);
    if (o.record_every > 0 && tr.steps % o.record_every == 0) {
      tr.times.push_back(t);
      tr.states.push_back(v);
    }
    k1 = L.apply(v);
    tr.residual = k1.cwiseAbs().maxCoeff();
    if (o.steady_tol > 0.0 && tr.residual < o.steady_tol) tr.reached_steady = true;
  }
  tr.final_state = v;
  tr.final_time = t;
  return tr;
}

}  // namespace cavitrans
