#include "cavitrans/rates.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "cavitrans/errors.hpp"

namespace cavitrans {

BandCurrent g0_current(double t, double gamma) {
  if (!(gamma > 0.0)) throw Error(ErrorCode::NonPositiveRate, "gamma_alpha");
  if (t == 0.0) return {0.0, 0.0};
  const double r = gamma / (2.0 * t);
  return {0.5 * gamma / (1.0 + r * r), 1.0 / (2.0 + gamma * gamma / (2.0 * t * t))};
}

double g0_total_current(const SystemParams& p) {
  return g0_current(p.t1, p.gamma1).current + g0_current(p.t2, p.gamma2).current;
}

namespace {

using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat5 = Eigen::Matrix<double, 5, 5>;

Vec5 pack(const RateState& s) { return Vec5(s.n11, s.n12, s.n21, s.n22, s.C); }
RateState unpack(const Vec5& v) { return {v(0), v(1), v(2), v(3), v(4)}; }

Mat5 jacobian(const RateState& s, const SystemParams& p, const RateOptions& o) {
  const double g1 = p.gamma1, g2 = p.gamma2, t = p.t2;
  const double a = 4.0 * p.gamma_c();
  const double d = o.coherence_damping ? 2.0 * p.gamma_c() : 0.0;
  Mat5 J = Mat5::Zero();
  J(0, 0) = -g1 - a * s.n21;
  J(0, 2) = a * (1.0 - s.n11);
  J(1, 1) = -g1 - a * s.n22;
  J(1, 3) = a * (1.0 - s.n12);
  J(2, 0) = a * s.n21;
  J(2, 2) = -g2 - a * (1.0 - s.n11);
  J(2, 4) = -2.0 * t;
  J(3, 1) = a * s.n22;
  J(3, 3) = -g2 - a * (1.0 - s.n12);
  J(3, 4) = 2.0 * t;
  J(4, 0) = d * s.C;
  J(4, 1) = d * s.C;
  J(4, 2) = t;
  J(4, 3) = -t;
  J(4, 4) = -g2 - d * (2.0 - s.n11 - s.n12);
  return J;
}

}  // namespace

RateState meanfield_ode_rhs(const RateState& s, const SystemParams& p, const RateOptions& o) {
  const double g1 = p.gamma1, g2 = p.gamma2, t = p.t2;
  const double a = 4.0 * p.gamma_c();
  const double down1 = a * s.n21 * (1.0 - s.n11);
  const double down2 = a * s.n22 * (1.0 - s.n12);
  RateState d;
  d.n11 = -g1 * s.n11 + g1 + down1;
  d.n12 = -g1 * s.n12 + down2;
  d.n21 = -g2 * s.n21 - 2.0 * t * s.C + g2 - down1;
  d.n22 = -g2 * s.n22 + 2.0 * t * s.C - down2;
  d.C = -g2 * s.C + t * (s.n21 - s.n22);
  if (o.coherence_damping) d.C -= 2.0 * p.gamma_c() * (2.0 - s.n11 - s.n12) * s.C;
  return d;
}

double phi_factor(double gamma_c, double gamma, double n22) {
  return (4.0 * gamma_c * n22 + gamma) / (4.0 * gamma_c * (n22 + 1.0) + gamma);
}

MeanFieldResult meanfield_steady_current(const SystemParams& p, const RateOptions& o) {
  const double t = p.t2, g2 = p.gamma2;
  RateState s0;
  s0.C = t * g2 / (g2 * g2 + 4.0 * t * t);
  s0.n22 = 2.0 * t * s0.C / g2;
  s0.n21 = 1.0 - s0.n22;

  MeanFieldResult out;
  out.current_g0 = g2 * s0.n22;

  Vec5 x = pack(s0);
  const double scale = std::max(p.gamma1, p.gamma2);
  int it = 0;
  for (; it < 200; ++it) {
    const Vec5 f = pack(meanfield_ode_rhs(unpack(x), p, o));
    const double fnorm = f.cwiseAbs().maxCoeff();
    if (fnorm < 1e-14 * scale) break;
    const Vec5 step = jacobian(unpack(x), p, o).partialPivLu().solve(-f);
    double lambda = 1.0;
    Vec5 trial = x + step;
    while (lambda > 1e-6 &&
           pack(meanfield_ode_rhs(unpack(trial), p, o)).cwiseAbs().maxCoeff() >= fnorm) {
      lambda *= 0.5;
      trial = x + lambda * step;
    }
    x = trial;
    if (lambda * step.cwiseAbs().maxCoeff() < 1e-12) {
      ++it;
      break;
    }
  }
  const RateState s = unpack(x);
  const double residual = pack(meanfield_ode_rhs(s, p, o)).cwiseAbs().maxCoeff();
  if (!(residual < 1e-10 * scale))
    throw Error(ErrorCode::NoConvergence, "mean-field rate equations, residual " + std::to_string(residual));

  out.state = s;
  out.iterations = it;
  out.current = p.gamma1 * s.n12 + g2 * s.n22;
  out.phi = phi_factor(p.gamma_c(), g2, s.n22);
  out.delta_j = out.current / out.current_g0 - 1.0;
  return out;
}

PerturbativeDeltaJ delta_j_perturbative(const SystemParams& p) {
  const double gamma = p.gamma2;
  const double x = p.gamma_c() / gamma;
  const double t2 = p.t2 * p.t2;
  PerturbativeDeltaJ out;
  out.simplified = 2.0 * x;
  out.full = 2.0 * t2 / (t2 + 0.25 * gamma * gamma) * x;
  out.beyond_validity = x > 0.3;
  return out;
}

}  // namespace cavitrans
