#ifndef EXLASSO_PROX_HPP
#define EXLASSO_PROX_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "exlasso/groups.hpp"
#include "exlasso/types.hpp"

namespace exlasso {

//! Result of a proximal-map evaluation for the squared, group-wise weighted
//! l1 regularizer, together with the certificate that pins down the active
//! piece of the (piecewise linear) map:
//!  - `alpha`: per-group optimal threshold (the maximal prefix ratio),
//!  - `active`: 1 where the output coordinate was clamped to exactly zero,
//!  - `sign`: the sign pattern used for the reduction to the nonnegative
//!     orthant, with sign(0) = +1 by convention,
//!  - `rho`: the multiplier the regularizer was scaled by in this call.
struct ProxResult {
  Vector x;
  Vector alpha;
  std::vector<std::uint8_t> active;
  Vector sign;
  double rho = 0.0;
};

//! Value of the exclusive-lasso regularizer
//!   Delta(x) = sum_g ( sum_{i in g} w_i |x_i| )^2 .
inline double regularizer_value(const Vector& x, const GroupPartition& part) {
  if (x.size() != part.dim()) {
    throw std::invalid_argument("regularizer_value: dimension mismatch");
  }
  const Vector& w = part.weights();
  double total = 0.0;
  for (Index g = 0; g < part.group_count(); ++g) {
    double t = 0.0;
    for (Index i : part.group(g)) t += w[i] * std::abs(x[i]);
    total += t * t;
  }
  return total;
}

namespace detail {

//! Closed-form prox of rho * (sum_i w_i x_i)^2 over the nonnegative orthant
//! for a single group given elementwise nonnegative `a`. Writes the solution
//! into `x` and the activity pattern into `active`; returns the threshold.
//!
//! Sorting is by a_i / w_i non-increasing with ties kept in original index
//! order; the threshold is the maximum of the prefix ratios
//! s_k / (1 + 2 rho L_k) with s_k, L_k prefix sums of w*a and w^2. A
//! coordinate counts as active exactly when the clamped output is 0.0.
inline double prox_group_nonneg(const double* a, const double* w, Index len, double rho,
                                std::vector<Index>& order, double* x, std::uint8_t* active) {
  bool all_zero = true;
  for (Index i = 0; i < len; ++i) {
    if (a[i] != 0.0) {
      all_zero = false;
      break;
    }
  }
  if (all_zero || rho == 0.0) {
    // rho == 0 makes the prox the identity; a == 0 maps to 0 with threshold 0.
    for (Index i = 0; i < len; ++i) {
      x[i] = a[i];
      active[i] = (x[i] == 0.0) ? 1 : 0;
    }
    return 0.0;
  }

  order.resize(static_cast<std::size_t>(len));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index i, Index j) { return a[i] / w[i] > a[j] / w[j]; });

  double s = 0.0;
  double L = 0.0;
  double alpha = 0.0;
  for (Index k = 0; k < len; ++k) {
    const Index j = order[static_cast<std::size_t>(k)];
    s += w[j] * a[j];
    L += w[j] * w[j];
    alpha = std::max(alpha, s / (1.0 + 2.0 * rho * L));
  }

  const double shift = 2.0 * rho * alpha;
  for (Index i = 0; i < len; ++i) {
    const double v = a[i] - shift * w[i];
    x[i] = v > 0.0 ? v : 0.0;
    active[i] = (x[i] == 0.0) ? 1 : 0;
  }
  return alpha;
}

}  // namespace detail

//! Prox of a |-> rho * (sum_i w_i a_i)^2 restricted to a >= 0 (single group).
//! Rejects negative entries of `a`; sign handling belongs to the caller.
inline ProxResult prox_sq_l1_nonneg(const Vector& a, const Vector& w, double rho) {
  const Index n = a.size();
  if (n == 0 || w.size() != n) {
    throw std::invalid_argument("prox_sq_l1_nonneg: dimension mismatch");
  }
  if (!(rho > 0.0)) {
    throw std::invalid_argument("prox_sq_l1_nonneg: rho must be strictly positive");
  }
  for (Index i = 0; i < n; ++i) {
    if (!(w[i] > 0.0)) throw std::invalid_argument("prox_sq_l1_nonneg: weights must be positive");
    if (a[i] < 0.0) throw std::invalid_argument("prox_sq_l1_nonneg: negative input");
  }

  ProxResult res;
  res.x.resize(n);
  res.alpha.resize(1);
  res.active.resize(static_cast<std::size_t>(n));
  res.sign = Vector::Ones(n);
  res.rho = rho;

  std::vector<Index> order;
  res.alpha[0] = detail::prox_group_nonneg(a.data(), w.data(), n, rho, order, res.x.data(),
                                           res.active.data());
  return res;
}

//! Prox of a |-> rho * (sum_i w_i |a_i|)^2 for general-sign `a` (single
//! group): reduce to the nonnegative case on |a| and restore signs.
inline ProxResult prox_sq_l1(const Vector& a, const Vector& w, double rho) {
  const Index n = a.size();
  if (n == 0 || w.size() != n) {
    throw std::invalid_argument("prox_sq_l1: dimension mismatch");
  }
  if (!(rho > 0.0)) {
    throw std::invalid_argument("prox_sq_l1: rho must be strictly positive");
  }
  for (Index i = 0; i < n; ++i) {
    if (!(w[i] > 0.0)) throw std::invalid_argument("prox_sq_l1: weights must be positive");
  }

  ProxResult res;
  res.x.resize(n);
  res.alpha.resize(1);
  res.active.resize(static_cast<std::size_t>(n));
  res.sign.resize(n);
  res.rho = rho;

  Vector abs_a(n);
  for (Index i = 0; i < n; ++i) {
    res.sign[i] = (a[i] >= 0.0) ? 1.0 : -1.0;
    abs_a[i] = std::abs(a[i]);
  }

  std::vector<Index> order;
  res.alpha[0] = detail::prox_group_nonneg(abs_a.data(), w.data(), n, rho, order, res.x.data(),
                                           res.active.data());
  res.x.array() *= res.sign.array();
  return res;
}

//! Prox of the full regularizer scaled by `sigma_lambda`:
//!   argmin_x sigma_lambda * Delta(x) + 1/2 ||x - a||^2 ,
//! computed group by group via the closed form. `sigma_lambda == 0` is
//! allowed and yields the identity map.
inline ProxResult prox_regularizer(const Vector& a, const GroupPartition& part,
                                   double sigma_lambda) {
  const Index n = part.dim();
  if (a.size() != n) {
    throw std::invalid_argument("prox_regularizer: dimension mismatch");
  }
  if (!(sigma_lambda >= 0.0)) {
    throw std::invalid_argument("prox_regularizer: multiplier must be nonnegative");
  }
  const Vector& w = part.weights();

  ProxResult res;
  res.x.resize(n);
  res.alpha.resize(part.group_count());
  res.active.resize(static_cast<std::size_t>(n));
  res.sign.resize(n);
  res.rho = sigma_lambda;

  std::vector<Index> order;
  std::vector<double> ga, gw, gx;
  std::vector<std::uint8_t> gactive;
  for (Index g = 0; g < part.group_count(); ++g) {
    const auto& idx = part.group(g);
    const std::size_t len = idx.size();
    ga.resize(len);
    gw.resize(len);
    gx.resize(len);
    gactive.resize(len);
    for (std::size_t k = 0; k < len; ++k) {
      const Index i = idx[k];
      res.sign[i] = (a[i] >= 0.0) ? 1.0 : -1.0;
      ga[k] = std::abs(a[i]);
      gw[k] = w[i];
    }
    res.alpha[g] = detail::prox_group_nonneg(ga.data(), gw.data(), static_cast<Index>(len),
                                             sigma_lambda, order, gx.data(), gactive.data());
    for (std::size_t k = 0; k < len; ++k) {
      const Index i = idx[k];
      res.x[i] = res.sign[i] * gx[k];
      res.active[static_cast<std::size_t>(i)] = gactive[k];
    }
  }
  return res;
}

//! Moreau envelope of the scaled regularizer p = sigma_lambda * Delta:
//!   E_p(a) = p(Prox_p(a)) + 1/2 ||Prox_p(a) - a||^2 .
inline double moreau_envelope(const Vector& a, const GroupPartition& part, double sigma_lambda) {
  const ProxResult res = prox_regularizer(a, part, sigma_lambda);
  return sigma_lambda * regularizer_value(res.x, part) + 0.5 * (res.x - a).squaredNorm();
}

}  // namespace exlasso

#endif  // EXLASSO_PROX_HPP
