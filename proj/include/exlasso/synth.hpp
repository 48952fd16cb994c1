#ifndef EXLASSO_SYNTH_HPP
#define EXLASSO_SYNTH_HPP

//! Synthetic benchmark instances: correlated Gaussian designs with a
//! group-structured sparse ground truth.
//!
//! Rows of A are drawn from N(0, S) where S_ij = 0.9^|i-j| when coordinates
//! i and j fall in the same group and 0.3^|i-j| otherwise (distance is always
//! the global index distance).  The ground truth holds a fixed number of
//! nonzeros per group with values uniform on [0, 10].  Responses are either
//! b = A x* + eps (regression) or b = sign(A x* + eps) (classification) with
//! standard normal noise.
//!
//! All randomness flows through one deterministic generator with explicit
//! double mappings, so a given seed reproduces the instance bit for bit on
//! any platform with the same mt19937_64 stream.  Draw order: design matrix
//! rows first, then per-group support positions and values, then noise.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>

#include <Eigen/Cholesky>

#include "exlasso/problem.hpp"

namespace exlasso {

//! Deterministic RNG with explicit double mappings (no std distribution
//! objects, whose algorithms vary between standard libraries).
class SynthRng {
 public:
  explicit SynthRng(std::uint64_t seed) : eng_(seed) {}

  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  double normal() {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
  std::uint64_t integer(std::uint64_t bound) { return eng_() % bound; }  // [0, bound)

 private:
  std::mt19937_64 eng_;
};

struct SynthConfig {
  Index m = 0;
  Index n_groups = 0;
  Index group_size = 0;
  Index nnz_per_group = 10;
  LossKind task = LossKind::least_squares;
  std::uint64_t seed = 0;
  double within_corr = 0.9;
  double across_corr = 0.3;
  double value_lo = 0.0;
  double value_hi = 10.0;
};

struct SynthInstance {
  Matrix A;
  Vector b;
  Vector x_star;
  GroupPartition part;
  LossKind task = LossKind::least_squares;
  std::uint64_t seed = 0;
};

//! Population covariance of the design distribution.
inline Matrix synth_covariance(const SynthConfig& cfg) {
  const Index n = cfg.n_groups * cfg.group_size;
  Matrix S(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const bool same = (i / cfg.group_size) == (j / cfg.group_size);
      const double base = same ? cfg.within_corr : cfg.across_corr;
      S(i, j) = std::pow(base, static_cast<double>(i > j ? i - j : j - i));
    }
  }
  return S;
}

inline SynthInstance synth_generate(const SynthConfig& cfg) {
  if (cfg.m < 1 || cfg.n_groups < 1 || cfg.group_size < 1)
    throw std::invalid_argument("synth_generate: dimensions must be positive");
  if (cfg.nnz_per_group < 1 || cfg.nnz_per_group > cfg.group_size)
    throw std::invalid_argument("synth_generate: nnz_per_group must lie in [1, group_size]");
  if (!(std::abs(cfg.within_corr) < 1.0 && std::abs(cfg.across_corr) < 1.0))
    throw std::invalid_argument("synth_generate: correlations must lie in (-1, 1)");

  const Index n = cfg.n_groups * cfg.group_size;
  const Matrix S = synth_covariance(cfg);
  const Eigen::LLT<Matrix> llt(S);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("synth_generate: covariance is not positive definite");
  const Matrix L = llt.matrixL();

  SynthRng rng(cfg.seed);
  SynthInstance inst{Matrix(cfg.m, n), Vector(cfg.m), Vector::Zero(n),
                     GroupPartition::contiguous(cfg.n_groups, cfg.group_size), cfg.task, cfg.seed};

  Vector z(n);
  for (Index i = 0; i < cfg.m; ++i) {
    for (Index j = 0; j < n; ++j) z[j] = rng.normal();
    inst.A.row(i) = (L * z).transpose();
  }

  std::vector<Index> pos(cfg.group_size);
  for (Index g = 0; g < cfg.n_groups; ++g) {
    for (Index t = 0; t < cfg.group_size; ++t) pos[t] = t;
    // partial Fisher-Yates: the first nnz_per_group entries become the support
    for (Index t = 0; t < cfg.nnz_per_group; ++t) {
      const Index swap_with =
          t + static_cast<Index>(rng.integer(static_cast<std::uint64_t>(cfg.group_size - t)));
      std::swap(pos[t], pos[swap_with]);
    }
    for (Index t = 0; t < cfg.nnz_per_group; ++t) {
      inst.x_star[g * cfg.group_size + pos[t]] = rng.uniform(cfg.value_lo, cfg.value_hi);
    }
  }

  Vector signal = inst.A * inst.x_star;
  for (Index i = 0; i < cfg.m; ++i) signal[i] += rng.normal();
  if (cfg.task == LossKind::least_squares) {
    inst.b = signal;
  } else {
    for (Index i = 0; i < cfg.m; ++i) inst.b[i] = signal[i] >= 0.0 ? 1.0 : -1.0;
  }
  return inst;
}

inline ProblemSpec synth_problem(const SynthInstance& inst, double lambda) {
  LossModel loss = inst.task == LossKind::least_squares ? LossModel::least_squares(inst.b)
                                                        : LossModel::logistic(inst.b);
  return make_problem(inst.A, std::move(loss), lambda, inst.part);
}

}  // namespace exlasso

#endif  // EXLASSO_SYNTH_HPP
