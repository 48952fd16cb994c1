#ifndef EXLASSO_SPECTRAL_HPP
#define EXLASSO_SPECTRAL_HPP

#include <cstdint>

#include "exlasso/types.hpp"

namespace exlasso {

//! Largest eigenvalue of A A' estimated by a fixed number of power iterations
//! from a deterministic start, so repeated runs agree bit for bit.  Equals the
//! squared spectral norm of A (and the largest eigenvalue of A'A).
inline double power_lambda_max_aat(const Matrix& A, int iters = 50) {
  const Index m = A.rows();
  if (m == 0 || A.cols() == 0) return 0.0;
  Vector v(m);
  std::uint64_t s = 0x9e3779b97f4a7c15ull;
  for (Index i = 0; i < m; ++i) {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    v[i] = static_cast<double>(s >> 11) * 0x1.0p-53 - 0.5;
  }
  double nv = v.norm();
  if (nv == 0.0) v.setOnes(), nv = v.norm();
  v /= nv;
  double lam = 0.0;
  for (int t = 0; t < iters; ++t) {
    Vector w = A * (A.transpose() * v);
    lam = w.norm();
    if (!(lam > 0.0)) return 0.0;
    v = w / lam;
  }
  return lam;
}

}  // namespace exlasso

#endif  // EXLASSO_SPECTRAL_HPP
