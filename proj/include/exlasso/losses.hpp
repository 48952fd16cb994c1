#ifndef EXLASSO_LOSSES_HPP
#define EXLASSO_LOSSES_HPP

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "exlasso/types.hpp"

namespace exlasso {

enum class LossKind { least_squares, logistic };

namespace detail {

inline double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

//! log(1 + exp(-z)) without overflow for large |z|.
inline double log1p_exp_neg(double z) {
  if (z >= 0.0) return std::log1p(std::exp(-z));
  return -z + std::log1p(std::exp(z));
}

//! x log x extended by continuity with 0 log 0 = 0.
inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

}  // namespace detail

//! Smooth data-fit term h and the pieces of its Fenchel machinery needed by
//! the dual solvers: conjugate value/gradient/curvature, the prox of nu*h,
//! and the strong-convexity modulus alpha_h of the conjugate.
//!
//! Least squares:  h(y) = 1/2 ||y - b||^2, so h*(u) = 1/2||u||^2 + <b, u>
//! with identity conjugate Hessian (alpha_h = 1).
//!
//! Logistic: h(y) = sum_i log(1 + exp(-b_i y_i)) with labels b_i in {-1,+1}.
//! With q_i = -u_i b_i the conjugate is sum_i q log q + (1-q) log(1-q) on
//! q_i in [0,1] (0 log 0 = 0 at the closed boundary); its Hessian is
//! diag(1/(q(1-q))) >= 4 I, hence alpha_h = 4. Conjugate derivatives require
//! the open domain; callers keep iterates strictly inside.
class LossModel {
 public:
  LossModel(LossKind kind, Vector b) : kind_(kind), b_(std::move(b)) {
    if (b_.size() == 0) throw std::invalid_argument("LossModel: empty data vector");
    if (kind_ == LossKind::logistic) {
      for (Index i = 0; i < b_.size(); ++i) {
        if (b_[i] != 1.0 && b_[i] != -1.0) {
          throw std::invalid_argument("LossModel: logistic labels must be +/-1");
        }
      }
    }
  }

  static LossModel least_squares(Vector b) { return LossModel(LossKind::least_squares, std::move(b)); }
  static LossModel logistic(Vector b) { return LossModel(LossKind::logistic, std::move(b)); }

  LossKind kind() const { return kind_; }
  Index m() const { return b_.size(); }
  const Vector& data() const { return b_; }

  //! Strong-convexity modulus of h* (modulus of the conjugate Hessian).
  double alpha_h() const { return kind_ == LossKind::least_squares ? 1.0 : 4.0; }

  //! Lipschitz modulus of grad h (per coordinate).
  double smoothness() const { return kind_ == LossKind::least_squares ? 1.0 : 0.25; }

  double value(const Vector& y) const {
    check_dim(y);
    if (kind_ == LossKind::least_squares) return 0.5 * (y - b_).squaredNorm();
    double total = 0.0;
    for (Index i = 0; i < y.size(); ++i) total += detail::log1p_exp_neg(b_[i] * y[i]);
    return total;
  }

  Vector grad(const Vector& y) const {
    check_dim(y);
    if (kind_ == LossKind::least_squares) return y - b_;
    Vector g(y.size());
    for (Index i = 0; i < y.size(); ++i) g[i] = -b_[i] * detail::sigmoid(-b_[i] * y[i]);
    return g;
  }

  //! True iff u is in the domain of h* with the given margin to the boundary
  //! (least squares has full domain; logistic needs -u_i b_i in (0,1)).
  bool in_conjugate_domain(const Vector& u, double margin = 0.0) const {
    check_dim(u);
    if (kind_ == LossKind::least_squares) return true;
    for (Index i = 0; i < u.size(); ++i) {
      const double q = -u[i] * b_[i];
      if (!(q > margin && q < 1.0 - margin)) return false;
    }
    return true;
  }

  //! h*(u); throws std::domain_error outside the closed domain.
  double conjugate_value(const Vector& u) const {
    check_dim(u);
    if (kind_ == LossKind::least_squares) return 0.5 * u.squaredNorm() + b_.dot(u);
    double total = 0.0;
    for (Index i = 0; i < u.size(); ++i) {
      const double q = -u[i] * b_[i];
      if (q < 0.0 || q > 1.0) throw std::domain_error("LossModel: u outside conjugate domain");
      total += detail::xlogx(q) + detail::xlogx(1.0 - q);
    }
    return total;
  }

  //! grad h*(u); logistic requires the open domain.
  Vector conjugate_grad(const Vector& u) const {
    check_dim(u);
    if (kind_ == LossKind::least_squares) return u + b_;
    Vector g(u.size());
    for (Index i = 0; i < u.size(); ++i) {
      const double q = -u[i] * b_[i];
      if (!(q > 0.0 && q < 1.0)) throw std::domain_error("LossModel: u outside open conjugate domain");
      g[i] = b_[i] * std::log((1.0 - q) / q);
    }
    return g;
  }

  //! Diagonal of hess h*(u); logistic requires the open domain.
  Vector conjugate_hess_diag(const Vector& u) const {
    check_dim(u);
    if (kind_ == LossKind::least_squares) return Vector::Ones(u.size());
    Vector d(u.size());
    for (Index i = 0; i < u.size(); ++i) {
      const double q = -u[i] * b_[i];
      if (!(q > 0.0 && q < 1.0)) throw std::domain_error("LossModel: u outside open conjugate domain");
      d[i] = 1.0 / (q * (1.0 - q));
    }
    return d;
  }

  //! Prox of nu * h: argmin_y h(y) + 1/(2 nu) ||y - v||^2, elementwise.
  //! Least squares is closed form; logistic solves the scalar optimality
  //! equation y - v + nu h'(y) = 0 by safeguarded Newton (tolerance 1e-12,
  //! bisection fallback on the bracket [v - nu, v + nu]).
  Vector prox(const Vector& v, double nu) const {
    check_dim(v);
    if (!(nu >= 0.0)) throw std::invalid_argument("LossModel::prox: nu must be nonnegative");
    if (nu == 0.0) return v;
    if (kind_ == LossKind::least_squares) return (v + nu * b_) / (1.0 + nu);
    Vector y(v.size());
    for (Index i = 0; i < v.size(); ++i) y[i] = scalar_logistic_prox(v[i], b_[i], nu);
    return y;
  }

  //! Diagonal of the prox Jacobian d Prox_{nu h}(v) / d v evaluated via the
  //! prox output y = Prox_{nu h}(v): 1 / (1 + nu h''(y)).
  Vector prox_jacobian_diag_at(const Vector& y, double nu) const {
    check_dim(y);
    if (kind_ == LossKind::least_squares) {
      return Vector::Constant(y.size(), 1.0 / (1.0 + nu));
    }
    Vector d(y.size());
    for (Index i = 0; i < y.size(); ++i) {
      const double s = detail::sigmoid(b_[i] * y[i]);
      d[i] = 1.0 / (1.0 + nu * s * (1.0 - s));
    }
    return d;
  }

 private:
  void check_dim(const Vector& v) const {
    if (v.size() != b_.size()) throw std::invalid_argument("LossModel: dimension mismatch");
  }

  static double scalar_logistic_prox(double v, double b, double nu) {
    const double tol = 1e-12;
    double lo = v - nu;
    double hi = v + nu;
    double y = v;
    auto residual = [&](double t) { return t - v - nu * b * detail::sigmoid(-b * t); };
    for (int iter = 0; iter < 50; ++iter) {
      const double f = residual(y);
      if (std::abs(f) <= tol) return y;
      if (f > 0.0) {
        hi = y;
      } else {
        lo = y;
      }
      const double s = detail::sigmoid(b * y);
      const double fprime = 1.0 + nu * s * (1.0 - s);
      double next = y - f / fprime;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      y = next;
    }
    for (int iter = 0; iter < 200; ++iter) {
      const double f = residual(y);
      if (std::abs(f) <= tol) return y;
      if (f > 0.0) {
        hi = y;
      } else {
        lo = y;
      }
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;  // bracket exhausted in double precision
      y = mid;
    }
    if (std::abs(residual(y)) > tol &&
        hi - lo > 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(y))) {
      throw std::runtime_error("LossModel::prox: scalar solve did not converge");
    }
    return y;
  }

  LossKind kind_;
  Vector b_;
};

}  // namespace exlasso

#endif  // EXLASSO_LOSSES_HPP
