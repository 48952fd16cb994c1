#ifndef EXLASSO_SSN_HPP
#define EXLASSO_SSN_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Cholesky>

#include "exlasso/groups.hpp"
#include "exlasso/jacobian.hpp"
#include "exlasso/losses.hpp"
#include "exlasso/prox.hpp"
#include "exlasso/types.hpp"

namespace exlasso {

//! One proximal subproblem
//!   min_x  h(Ax) - <c,x> + lambda*Delta(x) + 1/(2 sigma) ||x - x_tilde||^2_M
//! with M = I (tau == 0) or M = I + tau A'A (tau > 0), solved through its
//! m-dimensional dual. The context borrows the problem data; the caller owns
//! it for the lifetime of the solve.
struct SubproblemContext {
  const Matrix& A;
  const Vector& c;
  const LossModel& loss;
  const GroupPartition& part;
  Vector x_tilde;
  Vector a_xtilde;  // A * x_tilde, cached
  double sigma = 1.0;
  double tau = 0.0;
  double lambda = 0.0;

  SubproblemContext(const Matrix& A_, const Vector& c_, const LossModel& loss_,
                    const GroupPartition& part_, Vector x_tilde_, double sigma_, double tau_,
                    double lambda_)
      : A(A_),
        c(c_),
        loss(loss_),
        part(part_),
        x_tilde(std::move(x_tilde_)),
        a_xtilde(A_ * x_tilde),
        sigma(sigma_),
        tau(tau_),
        lambda(lambda_) {
    if (!(sigma > 0.0)) throw std::invalid_argument("SubproblemContext: sigma must be positive");
    if (!(tau >= 0.0)) throw std::invalid_argument("SubproblemContext: tau must be nonnegative");
    if (!(lambda >= 0.0)) throw std::invalid_argument("SubproblemContext: lambda must be nonnegative");
  }
};

//! Solver state at one dual point: objective value (maximization convention),
//! gradient, and the cached prox evaluations the Newton system is built from.
//! `prox_z.x` is the primal candidate the outer loop recovers.
struct NewtonState {
  Vector u;
  double value = 0.0;
  Vector grad;
  double grad_norm = 0.0;
  Vector z;            // x_tilde + sigma c - sigma A'u
  ProxResult prox_z;   // regularizer prox at z (multiplier sigma*lambda)
  Vector ax_plus;      // A * prox_z.x
  Vector y;            // A x_tilde + (sigma/tau) u            (tau > 0)
  Vector w_hat;        // loss prox of y with multiplier sigma/tau (tau > 0)
  JacobianElement jac;
  Vector hess_diag;    // smooth block D of the Newton matrix
};

struct SsnOptions {
  double mu = 1e-4;            // Armijo slope fraction
  double backtrack = 0.5;      // step shrink factor
  double gamma_bar = 0.1;      // Newton-system residual cap
  double tau_exp = 0.5;        // superlinear exponent in the residual rule
  int max_iter = 100;
  double grad_floor = 1e-12;   // hard stop on the gradient norm
  int cg_max_iter = 300;
  Index direct_dim_cap = 500;  // largest m solved by dense Cholesky
  int max_backtracks = 60;
  double domain_margin = 1e-12;
  std::vector<Vector>* iterate_log = nullptr;  // optional trace for diagnostics
};

enum class SsnStop { criterion, gradient_floor, iteration_cap };

struct SsnStats {
  int iterations = 0;
  int backtracks = 0;
  long cg_iterations = 0;
  int gradient_fallbacks = 0;
  SsnStop stopped_by = SsnStop::iteration_cap;
  double final_grad_norm = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> value_trace;
};

using SsnStopPredicate = std::function<bool(const NewtonState&)>;

namespace detail {

struct DualEval {
  double value = -std::numeric_limits<double>::infinity();
  ProxResult prox_z;
  Vector z;
  Vector ax_plus;
  Vector y;
  Vector w_hat;
  bool in_domain = false;
};

//! Dual objective in the numerically stable Lagrangian form
//!   tau = 0:  -h*(u) + <u, Ax+> + lambda Delta(x+) - <c,x+> + 1/(2s)||x+ - xt||^2
//!   tau > 0:  h(w^) - <w^,u> + tau/(2s)||w^ - A xt||^2 + (same x+ terms)
//! which stays accurate for large sigma (no ||z||^2-scale cancellation).
inline DualEval eval_dual(const SubproblemContext& ctx, const Vector& u, double domain_margin) {
  DualEval ev;
  if (ctx.tau == 0.0 && !ctx.loss.in_conjugate_domain(u, domain_margin)) {
    return ev;  // value stays -inf; line search rejects the point
  }
  ev.in_domain = true;
  ev.z = ctx.x_tilde + ctx.sigma * ctx.c - ctx.sigma * (ctx.A.transpose() * u);
  ev.prox_z = prox_regularizer(ev.z, ctx.part, ctx.sigma * ctx.lambda);
  const Vector& xp = ev.prox_z.x;
  ev.ax_plus = ctx.A * xp;
  double value = ctx.lambda * regularizer_value(xp, ctx.part) - ctx.c.dot(xp) +
                 (0.5 / ctx.sigma) * (xp - ctx.x_tilde).squaredNorm() + u.dot(ev.ax_plus);
  if (ctx.tau == 0.0) {
    value -= ctx.loss.conjugate_value(u);
  } else {
    const double nu = ctx.sigma / ctx.tau;
    ev.y = ctx.a_xtilde + nu * u;
    ev.w_hat = ctx.loss.prox(ev.y, nu);
    value += ctx.loss.value(ev.w_hat) - ev.w_hat.dot(u) +
             (ctx.tau / (2.0 * ctx.sigma)) * (ev.w_hat - ctx.a_xtilde).squaredNorm();
  }
  ev.value = value;
  return ev;
}

inline NewtonState finish_state(const SubproblemContext& ctx, Vector u, DualEval&& ev) {
  NewtonState st;
  st.u = std::move(u);
  st.value = ev.value;
  st.z = std::move(ev.z);
  st.prox_z = std::move(ev.prox_z);
  st.ax_plus = std::move(ev.ax_plus);
  st.jac = hs_jacobian(st.prox_z, ctx.part, ctx.sigma * ctx.lambda);
  if (ctx.tau == 0.0) {
    st.grad = -ctx.loss.conjugate_grad(st.u) + st.ax_plus;
    st.hess_diag = ctx.loss.conjugate_hess_diag(st.u);
  } else {
    st.y = std::move(ev.y);
    st.w_hat = std::move(ev.w_hat);
    st.grad = st.ax_plus - st.w_hat;
    const double nu = ctx.sigma / ctx.tau;
    st.hess_diag = nu * ctx.loss.prox_jacobian_diag_at(st.w_hat, nu);
  }
  st.grad_norm = st.grad.norm();
  return st;
}

}  // namespace detail

//! Dual objective value at u (maximization convention, constants included so
//! that weak duality against the primal surrogate is exact). Throws
//! std::domain_error if u is outside the conjugate domain in the tau = 0
//! logistic case.
inline double dual_objective(const SubproblemContext& ctx, const Vector& u) {
  detail::DualEval ev = detail::eval_dual(ctx, u, 0.0);
  if (!ev.in_domain) throw std::domain_error("dual_objective: u outside conjugate domain");
  return ev.value;
}

//! Gradient of the dual objective at u.
inline Vector dual_gradient(const SubproblemContext& ctx, const Vector& u) {
  detail::DualEval ev = detail::eval_dual(ctx, u, 0.0);
  if (!ev.in_domain) throw std::domain_error("dual_gradient: u outside conjugate domain");
  return detail::finish_state(ctx, u, std::move(ev)).grad;
}

//! Full state (value, gradient, prox certificates) at u.
inline NewtonState dual_state(const SubproblemContext& ctx, const Vector& u) {
  detail::DualEval ev = detail::eval_dual(ctx, u, 0.0);
  if (!ev.in_domain) throw std::domain_error("dual_state: u outside conjugate domain");
  return detail::finish_state(ctx, u, std::move(ev));
}

//! Apply the (positive definite) Newton matrix of the minimized function,
//!   H = D + sigma * A M A' (+ ridge for tau > 0),
//! to a direction, using the group-structured form of the prox Jacobian M:
//! only inactive columns of A enter, plus one rank-one term per group.
inline Vector apply_newton_operator(const SubproblemContext& ctx, const NewtonState& st,
                                    const Vector& d) {
  const Index m = ctx.A.rows();
  if (d.size() != m) throw std::invalid_argument("apply_newton_operator: dimension mismatch");
  Vector out = st.hess_diag.cwiseProduct(d);
  if (ctx.tau > 0.0) {
    out += (1e-12 * st.hess_diag.lpNorm<Eigen::Infinity>()) * d;
  }
  Vector atd = ctx.A.transpose() * d;
  Vector md = apply_jacobian(st.jac, ctx.part, atd);
  out.noalias() += ctx.sigma * (ctx.A * md);
  return out;
}

namespace detail {

//! Dense assembly of the Newton matrix through the inactive-column structure.
inline Matrix assemble_newton_matrix(const SubproblemContext& ctx, const NewtonState& st) {
  const Index m = ctx.A.rows();
  Matrix H = Matrix::Zero(m, m);
  Index total_inactive = 0;
  for (const auto& inact : st.jac.inactive) total_inactive += static_cast<Index>(inact.size());
  if (total_inactive > 0) {
    Matrix aj(m, total_inactive);
    Index col = 0;
    for (const auto& inact : st.jac.inactive) {
      for (Index i : inact) aj.col(col++) = ctx.A.col(i);
    }
    H.selfadjointView<Eigen::Lower>().rankUpdate(aj, ctx.sigma);
    for (std::size_t g = 0; g < st.jac.inactive.size(); ++g) {
      const auto& inact = st.jac.inactive[g];
      if (inact.empty()) continue;
      Vector qg = Vector::Zero(m);
      for (Index i : inact) qg += st.jac.vtilde[i] * ctx.A.col(i);
      H.selfadjointView<Eigen::Lower>().rankUpdate(qg, -ctx.sigma * st.jac.coeff[static_cast<Index>(g)]);
    }
  }
  H.triangularView<Eigen::StrictlyUpper>() = H.transpose();
  H.diagonal() += st.hess_diag;
  if (ctx.tau > 0.0) {
    H.diagonal().array() += 1e-12 * st.hess_diag.lpNorm<Eigen::Infinity>();
  }
  return H;
}

//! Plain conjugate gradient on the structured operator. Returns the achieved
//! residual norm; `d` holds the best iterate.
inline double newton_cg(const SubproblemContext& ctx, const NewtonState& st, const Vector& rhs,
                        Vector& d, double tol, int max_iter, long& iter_count) {
  Vector r = rhs - apply_newton_operator(ctx, st, d);
  Vector p = r;
  double rr = r.squaredNorm();
  for (int it = 0; it < max_iter; ++it) {
    if (std::sqrt(rr) <= tol) break;
    const Vector hp = apply_newton_operator(ctx, st, p);
    const double php = p.dot(hp);
    if (!(php > 0.0)) break;  // numerical breakdown; keep the current iterate
    const double alpha = rr / php;
    d += alpha * p;
    r -= alpha * hp;
    const double rr_new = r.squaredNorm();
    p = r + (rr_new / rr) * p;
    rr = rr_new;
    ++iter_count;
  }
  return std::sqrt(rr);
}

}  // namespace detail

//! Semismooth Newton ascent on the subproblem dual. Iterates until the
//! caller-supplied stopping predicate accepts the state, the gradient norm
//! falls below the hard floor, or the iteration cap is reached (reported in
//! `stats.stopped_by`; the best state is returned in every case).
//!
//! Each Newton system is solved to residual min(gamma_bar, ||grad||^{1+tau_exp}),
//! by dense Cholesky with one refinement step for m <= direct_dim_cap and by
//! conjugate gradient otherwise; if the target is missed the direction falls
//! back to the gradient. Step sizes follow Armijo backtracking, capped so
//! that logistic iterates stay strictly inside the conjugate domain.
inline NewtonState ssn_solve(const SubproblemContext& ctx, const Vector& u0,
                             const SsnStopPredicate& stop, const SsnOptions& opts,
                             SsnStats& stats) {
  const Index m = ctx.A.rows();
  if (u0.size() != m) throw std::invalid_argument("ssn_solve: u0 dimension mismatch");
  if (ctx.tau == 0.0 && !ctx.loss.in_conjugate_domain(u0, 0.0)) {
    throw std::invalid_argument("ssn_solve: u0 outside the conjugate domain");
  }

  detail::DualEval ev0 = detail::eval_dual(ctx, u0, 0.0);
  NewtonState st = detail::finish_state(ctx, u0, std::move(ev0));
  stats = SsnStats{};
  stats.value_trace.push_back(st.value);
  if (opts.iterate_log) opts.iterate_log->push_back(st.u);

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    if (stop && stop(st)) {
      stats.stopped_by = SsnStop::criterion;
      stats.final_grad_norm = st.grad_norm;
      return st;
    }
    if (st.grad_norm <= opts.grad_floor) {
      stats.stopped_by = SsnStop::gradient_floor;
      stats.final_grad_norm = st.grad_norm;
      return st;
    }

    // Newton direction for the minimized -value: H d = grad
    const double newton_tol =
        std::min(opts.gamma_bar, std::pow(st.grad_norm, 1.0 + opts.tau_exp));
    Vector d = Vector::Zero(m);
    if (m <= opts.direct_dim_cap) {
      const Matrix H = detail::assemble_newton_matrix(ctx, st);
      Eigen::LLT<Matrix> llt(H);
      if (llt.info() == Eigen::Success) {
        d = llt.solve(st.grad);
        // one refinement step keeps the residual near roundoff
        d += llt.solve(st.grad - apply_newton_operator(ctx, st, d));
      }
      const double resid = (apply_newton_operator(ctx, st, d) - st.grad).norm();
      if (resid > newton_tol) {
        detail::newton_cg(ctx, st, st.grad, d, newton_tol, opts.cg_max_iter,
                          stats.cg_iterations);
      }
    } else {
      detail::newton_cg(ctx, st, st.grad, d, newton_tol, opts.cg_max_iter, stats.cg_iterations);
    }
    if ((apply_newton_operator(ctx, st, d) - st.grad).norm() > newton_tol || !(st.grad.dot(d) > 0.0)) {
      d = st.grad;  // steepest ascent fallback
      ++stats.gradient_fallbacks;
    }

    // cap the step so logistic iterates stay strictly inside the domain
    double step = 1.0;
    if (ctx.tau == 0.0 && ctx.loss.kind() == LossKind::logistic) {
      const Vector& b = ctx.loss.data();
      double step_cap = std::numeric_limits<double>::infinity();
      for (Index i = 0; i < m; ++i) {
        const double q = -st.u[i] * b[i];
        const double dq = -d[i] * b[i];  // q moves to q + step*dq
        if (dq < 0.0) step_cap = std::min(step_cap, (opts.domain_margin - q) / dq);
        if (dq > 0.0) step_cap = std::min(step_cap, (1.0 - opts.domain_margin - q) / dq);
      }
      if (step_cap < std::numeric_limits<double>::infinity()) {
        step_cap *= 0.9999;
        while (step > step_cap) step *= opts.backtrack;
      }
    }

    const double slope = st.grad.dot(d);  // ascent slope, positive
    bool accepted = false;
    for (int bt = 0; bt < opts.max_backtracks; ++bt) {
      detail::DualEval trial = detail::eval_dual(ctx, st.u + step * d, opts.domain_margin);
      if (trial.in_domain && trial.value >= st.value + opts.mu * step * slope) {
        st = detail::finish_state(ctx, st.u + step * d, std::move(trial));
        accepted = true;
        break;
      }
      step *= opts.backtrack;
      ++stats.backtracks;
    }
    ++stats.iterations;
    if (!accepted) break;  // line search exhausted; report the current state

    stats.value_trace.push_back(st.value);
    if (opts.iterate_log) opts.iterate_log->push_back(st.u);
  }

  stats.stopped_by = (stop && stop(st)) ? SsnStop::criterion : SsnStop::iteration_cap;
  stats.final_grad_norm = st.grad_norm;
  return st;
}

}  // namespace exlasso

#endif  // EXLASSO_SSN_HPP
