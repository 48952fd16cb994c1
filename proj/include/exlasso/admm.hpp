#ifndef EXLASSO_ADMM_HPP
#define EXLASSO_ADMM_HPP

//! Baseline solver: ADMM applied to the dual of the composite problem.
//!
//! The negated dual  min_u h*(u) + (lambda Delta)*(c - A'u)  is split as
//!   min_{u,w,v} h*(w) + (lambda Delta)*(v)   s.t.  w = u,  v + A'u = c,
//! with multipliers y (for w = u) and x (for v + A'u = c).  The multiplier x
//! converges to the primal solution, which is how iterates are scored here.
//! Both prox updates reduce to the prox operators of h and of the regularizer
//! through the Moreau identity, and the u-update solves a linear system with
//! the sigma-independent matrix I + A A', factorized once.

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "exlasso/problem.hpp"

namespace exlasso {

struct AdmmConfig {
  double sigma0 = 1.0;
  double kappa = 1.618;       // over-relaxed multiplier step
  double tol = 1e-6;          // KKT residual target on the primal iterate
  long max_iter = 200000;
  double max_seconds = 3600.0;
  int balance_every = 50;     // residual-balancing cadence
  double balance_ratio = 10.0;
  double balance_factor = 2.0;
  double sigma_min = 1e-4;
  double sigma_max = 1e4;
  std::optional<Vector> x0;
};

struct AdmmReport {
  Vector x;
  Vector u;
  SolveStatus status = SolveStatus::iteration_limit;
  long iterations = 0;
  double eta_kkt = std::numeric_limits<double>::quiet_NaN();
  double objective = std::numeric_limits<double>::quiet_NaN();
  double sigma_final = 0.0;
  double residual_w = 0.0;          // ||w - u|| at exit
  double residual_v = 0.0;          // ||v + A'u - c|| at exit
  double max_solve_residual = 0.0;  // worst relative residual of the u-solve
  double seconds = 0.0;
};

inline AdmmReport admm_solve(const ProblemSpec& spec, const AdmmConfig& cfg = {}) {
  spec.validate();
  if (!(cfg.sigma0 > 0.0)) throw std::invalid_argument("admm_solve: sigma0 must be positive");
  if (!(cfg.kappa > 0.0 && cfg.kappa < 2.0))
    throw std::invalid_argument("admm_solve: kappa must lie in (0, 2)");
  if (cfg.max_iter < 1) throw std::invalid_argument("admm_solve: max_iter must be positive");

  const auto t_start = std::chrono::steady_clock::now();
  const Index m = spec.A.rows();
  const Index n = spec.A.cols();

  Matrix K = spec.A * spec.A.transpose();
  K.diagonal().array() += 1.0;
  const Eigen::LLT<Matrix> llt(K);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("admm_solve: factorization of I + AA' failed");

  AdmmReport rep;
  Vector x = cfg.x0.value_or(Vector::Zero(n));
  if (x.size() != n) throw std::invalid_argument("admm_solve: x0 has wrong dimension");
  Vector y = Vector::Zero(m);
  Vector u = Vector::Zero(m);
  Vector w = Vector::Zero(m);
  Vector v = Vector::Zero(n);
  double sigma = cfg.sigma0;

  Vector w_prev = w, v_prev = v;
  double r_primal = 0.0, r_dual = 0.0;

  for (long t = 0; t < cfg.max_iter; ++t) {
    const Vector rhs = spec.A * (spec.c + x / sigma - v) + (w - y / sigma);
    u = llt.solve(rhs);
    const double solve_res = (u + spec.A * (spec.A.transpose() * u) - rhs).norm() /
                             (1.0 + rhs.norm());
    if (solve_res > rep.max_solve_residual) rep.max_solve_residual = solve_res;

    const Vector tw = u + y / sigma;
    w = tw - spec.loss.prox(sigma * tw, sigma) / sigma;

    const Vector atu = spec.A.transpose() * u;
    const Vector tv = spec.c - atu + x / sigma;
    v = tv - prox_regularizer(sigma * tv, spec.part, sigma * spec.lambda).x / sigma;

    const Vector res_w = w - u;
    const Vector res_v = v + atu - spec.c;
    y -= cfg.kappa * sigma * res_w;
    x -= cfg.kappa * sigma * res_v;

    ++rep.iterations;
    rep.eta_kkt = kkt_residual(spec, x);
    rep.residual_w = res_w.norm();
    rep.residual_v = res_v.norm();
    if (rep.eta_kkt <= cfg.tol) {
      rep.status = SolveStatus::converged;
      break;
    }

    r_primal = std::sqrt(res_w.squaredNorm() + res_v.squaredNorm());
    r_dual = sigma * (-(w - w_prev) + spec.A * (v - v_prev)).norm();
    w_prev = w;
    v_prev = v;
    if (cfg.balance_every > 0 && (t + 1) % cfg.balance_every == 0) {
      if (r_primal > cfg.balance_ratio * r_dual) {
        sigma = std::min(sigma * cfg.balance_factor, cfg.sigma_max);
      } else if (r_dual > cfg.balance_ratio * r_primal) {
        sigma = std::max(sigma / cfg.balance_factor, cfg.sigma_min);
      }
    }

    if (std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count() >
        cfg.max_seconds) {
      rep.status = SolveStatus::time_limit;
      break;
    }
  }

  rep.x = std::move(x);
  rep.u = std::move(u);
  rep.objective = primal_objective(spec, rep.x);
  rep.sigma_final = sigma;
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return rep;
}

}  // namespace exlasso

#endif  // EXLASSO_ADMM_HPP
