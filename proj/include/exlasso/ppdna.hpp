#ifndef EXLASSO_PPDNA_HPP
#define EXLASSO_PPDNA_HPP

//! Proximal point outer loop driven by the semismooth Newton dual solver.
//!
//! Each outer step k solves the regularized subproblem
//!   min_x f(x) + 1/(2 sigma_k) ||x - x_k||_M^2,   ||d||_M^2 = ||d||^2 + tau ||A d||^2,
//! inexactly through its dual, then accepts the primal prox point recovered
//! from the final dual iterate.  Two stopping regimes for the inner solve are
//! supported: a gradient-norm rule tied to the strong concavity of the dual
//! (identity metric) and a duality-gap rule (A'A-augmented metric).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "exlasso/problem.hpp"
#include "exlasso/spectral.hpp"
#include "exlasso/ssn.hpp"

namespace exlasso {

enum class Preconditioner : std::uint8_t { identity, ata };

struct PpdnaConfig {
  double sigma0 = 1.0;
  double sigma_growth = 3.0;
  double sigma_cap = 1e6;
  double eps0 = 1.0;      // summable inner tolerance, eps_k = eps0 * decay^k
  double delta0 = 0.5;    // relative inner tolerance, delta_k = delta0 * decay^k
  double decay = 0.5;
  double kkt_tol = 1e-6;
  int max_outer = 200;
  double max_seconds = 3600.0;
  std::optional<Preconditioner> preconditioner;  // default chosen by loss kind
  SsnOptions ssn;
  std::optional<Vector> x0;
  std::optional<Vector> u0;
};

struct PpdnaReport {
  Vector x;
  Vector u;
  SolveStatus status = SolveStatus::iteration_limit;
  int outer_iterations = 0;   // accepted subproblem solves
  long inner_iterations = 0;  // total Newton iterations across subproblems
  double eta_kkt = std::numeric_limits<double>::quiet_NaN();
  double objective = std::numeric_limits<double>::quiet_NaN();
  double sigma_final = 0.0;
  double tau = 0.0;
  Preconditioner preconditioner = Preconditioner::identity;
  bool inner_floor_hit = false;  // an inner solve ended on the gradient floor
                                 // or iteration cap before meeting its criteria
  std::vector<double> eta_trace;        // KKT residual before each outer step
  std::vector<double> objective_trace;  // objective at each visited x
  std::vector<double> gap_trace;        // final inner duality gap per step
  std::vector<int> inner_trace;         // Newton iterations per outer step
  double seconds = 0.0;
};

//! Inner-tolerance bound for the identity-metric regime: the subproblem is
//! accepted once ||grad phi(u)|| <= sqrt(alpha_h / sigma) * min(eps, delta * ||x+ - x_k||).
inline double identity_criterion_bound(double alpha_h, double sigma, double eps_k, double delta_k,
                                       double x_move_norm) {
  return std::sqrt(alpha_h / sigma) * std::min(eps_k, delta_k * x_move_norm);
}

//! Inner-tolerance bound for the A'A-metric regime: the subproblem is accepted
//! once the primal-dual gap falls below min(eps^2, delta^2 ||x+ - x_k||_M^2) / (2 sigma).
inline double ata_criterion_bound(double sigma, double eps_k, double delta_k,
                                  double x_move_m_norm_sq) {
  const double by_eps = eps_k * eps_k;
  const double by_delta = delta_k * delta_k * x_move_m_norm_sq;
  return std::min(by_eps, by_delta) / (2.0 * sigma);
}

//! Gap between the subproblem objective at the recovered primal point and the
//! dual objective at u.  Written so the large O(sigma ||z||^2) terms shared by
//! both sides cancel symbolically instead of in floating point.
inline double duality_gap(const SubproblemContext& ctx, const NewtonState& st) {
  const Vector& ax = st.ax_plus;
  if (ctx.tau == 0.0) {
    return ctx.loss.value(ax) + ctx.loss.conjugate_value(st.u) - st.u.dot(ax);
  }
  double gap = ctx.loss.value(ax) - ctx.loss.value(st.w_hat) + st.u.dot(st.w_hat - ax);
  gap += (ctx.tau / (2.0 * ctx.sigma)) *
         ((ax - ctx.a_xtilde).squaredNorm() - (st.w_hat - ctx.a_xtilde).squaredNorm());
  return gap;
}

//! Default starting dual point: the origin for least squares, and the interior
//! point with all conjugate coordinates at 1/2 for logistic loss.
inline Vector default_dual_start(const LossModel& loss) {
  if (loss.kind() == LossKind::logistic) return -0.5 * loss.data();
  return Vector::Zero(loss.m());
}

inline PpdnaReport ppdna_solve(const ProblemSpec& spec, const PpdnaConfig& cfg = {}) {
  spec.validate();
  if (!(cfg.sigma0 > 0.0) || !(cfg.sigma_growth >= 1.0) || !(cfg.sigma_cap >= cfg.sigma0))
    throw std::invalid_argument("ppdna_solve: bad sigma schedule");
  if (!(cfg.decay > 0.0 && cfg.decay < 1.0))
    throw std::invalid_argument("ppdna_solve: decay must lie in (0, 1)");
  if (cfg.max_outer < 1) throw std::invalid_argument("ppdna_solve: max_outer must be positive");

  const auto t_start = std::chrono::steady_clock::now();
  const Index n = spec.A.cols();

  PpdnaReport rep;
  rep.preconditioner = cfg.preconditioner.value_or(
      spec.loss.kind() == LossKind::logistic ? Preconditioner::ata : Preconditioner::identity);
  double tau = 0.0;
  if (rep.preconditioner == Preconditioner::ata) {
    const double lam = power_lambda_max_aat(spec.A);
    tau = lam > 1e-12 ? 1.0 / lam : 1.0;
  }
  rep.tau = tau;

  Vector x = cfg.x0.value_or(Vector::Zero(n));
  if (x.size() != n) throw std::invalid_argument("ppdna_solve: x0 has wrong dimension");
  Vector u = cfg.u0.value_or(default_dual_start(spec.loss));

  const double alpha_h = spec.loss.alpha_h();
  double sigma = cfg.sigma0;

  for (int k = 0; k < cfg.max_outer; ++k) {
    rep.eta_kkt = kkt_residual(spec, x);
    rep.objective = primal_objective(spec, x);
    rep.eta_trace.push_back(rep.eta_kkt);
    rep.objective_trace.push_back(rep.objective);
    if (rep.eta_kkt <= cfg.kkt_tol) {
      rep.status = SolveStatus::converged;
      break;
    }

    const double eps_k = cfg.eps0 * std::pow(cfg.decay, k);
    const double delta_k = cfg.delta0 * std::pow(cfg.decay, k);
    const SubproblemContext ctx(spec.A, spec.c, spec.loss, spec.part, x, sigma, tau, spec.lambda);

    SsnStopPredicate stop;
    if (rep.preconditioner == Preconditioner::identity) {
      stop = [&](const NewtonState& st) {
        const double move = (st.prox_z.x - ctx.x_tilde).norm();
        return st.grad_norm <= identity_criterion_bound(alpha_h, sigma, eps_k, delta_k, move);
      };
    } else {
      stop = [&](const NewtonState& st) {
        const double msq = (st.prox_z.x - ctx.x_tilde).squaredNorm() +
                           ctx.tau * (st.ax_plus - ctx.a_xtilde).squaredNorm();
        return duality_gap(ctx, st) <= ata_criterion_bound(sigma, eps_k, delta_k, msq);
      };
    }

    SsnStats inner;
    const NewtonState state = ssn_solve(ctx, u, stop, cfg.ssn, inner);
    ++rep.outer_iterations;
    rep.inner_iterations += inner.iterations;
    rep.inner_trace.push_back(inner.iterations);
    rep.gap_trace.push_back(duality_gap(ctx, state));
    if (inner.stopped_by != SsnStop::criterion) rep.inner_floor_hit = true;

    x = state.prox_z.x;
    u = state.u;
    sigma = std::min(sigma * cfg.sigma_growth, cfg.sigma_cap);

    if (std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count() >
        cfg.max_seconds) {
      rep.status = SolveStatus::time_limit;
      break;
    }
  }

  if (rep.status != SolveStatus::converged) {
    rep.eta_kkt = kkt_residual(spec, x);
    rep.objective = primal_objective(spec, x);
    rep.eta_trace.push_back(rep.eta_kkt);
    rep.objective_trace.push_back(rep.objective);
    if (rep.eta_kkt <= cfg.kkt_tol) rep.status = SolveStatus::converged;
  }

  rep.x = std::move(x);
  rep.u = std::move(u);
  rep.sigma_final = sigma;
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return rep;
}

}  // namespace exlasso

#endif  // EXLASSO_PPDNA_HPP
