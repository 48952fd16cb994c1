#ifndef EXLASSO_JACOBIAN_HPP
#define EXLASSO_JACOBIAN_HPP

#include <stdexcept>
#include <vector>

#include "exlasso/groups.hpp"
#include "exlasso/prox.hpp"
#include "exlasso/types.hpp"

namespace exlasso {

//! One generalized Jacobian element of the regularizer prox at the point the
//! `ProxResult` certificate was produced for. Per group g the element acts as
//!   d_g |-> mask_g .* d_g - coeff_g * vtilde_g * (vtilde_g' d_g)
//! where mask is 0 on active (clamped-to-zero) coordinates and 1 elsewhere,
//! vtilde = sign .* mask .* w, and coeff = 2 rho / (1 + 2 rho ||vtilde_g||^2).
//! The element is never materialized as a dense matrix.
struct JacobianElement {
  Vector mask;
  Vector vtilde;
  Vector coeff;
  std::vector<std::vector<Index>> inactive;  // per group, global indices
};

//! Assemble the structured Jacobian element from a prox certificate.
//! `sigma_lambda` must equal the multiplier used in the prox call.
inline JacobianElement hs_jacobian(const ProxResult& res, const GroupPartition& part,
                                   double sigma_lambda) {
  const Index n = part.dim();
  if (res.x.size() != n || res.alpha.size() != part.group_count()) {
    throw std::invalid_argument("hs_jacobian: certificate does not match partition");
  }
  if (!(sigma_lambda >= 0.0) || sigma_lambda != res.rho) {
    throw std::invalid_argument("hs_jacobian: multiplier does not match the prox call");
  }
  const Vector& w = part.weights();

  JacobianElement elem;
  elem.mask.setZero(n);
  elem.vtilde.setZero(n);
  elem.coeff.setZero(part.group_count());
  elem.inactive.resize(static_cast<std::size_t>(part.group_count()));

  for (Index g = 0; g < part.group_count(); ++g) {
    double vv = 0.0;
    auto& inact = elem.inactive[static_cast<std::size_t>(g)];
    for (Index i : part.group(g)) {
      if (res.active[static_cast<std::size_t>(i)]) continue;
      elem.mask[i] = 1.0;
      elem.vtilde[i] = res.sign[i] * w[i];
      vv += w[i] * w[i];
      inact.push_back(i);
    }
    elem.coeff[g] = 2.0 * sigma_lambda / (1.0 + 2.0 * sigma_lambda * vv);
  }
  return elem;
}

//! Apply the Jacobian element to a direction: y = M d.
inline Vector apply_jacobian(const JacobianElement& elem, const GroupPartition& part,
                             const Vector& d) {
  if (d.size() != part.dim()) {
    throw std::invalid_argument("apply_jacobian: dimension mismatch");
  }
  Vector y = elem.mask.cwiseProduct(d);
  for (Index g = 0; g < part.group_count(); ++g) {
    const auto& inact = elem.inactive[static_cast<std::size_t>(g)];
    if (inact.empty()) continue;
    double dot = 0.0;
    for (Index i : inact) dot += elem.vtilde[i] * d[i];
    const double scale = elem.coeff[g] * dot;
    for (Index i : inact) y[i] -= scale * elem.vtilde[i];
  }
  return y;
}

}  // namespace exlasso

#endif  // EXLASSO_JACOBIAN_HPP
