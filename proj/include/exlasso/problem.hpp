#ifndef EXLASSO_PROBLEM_HPP
#define EXLASSO_PROBLEM_HPP

#include <cstdint>
#include <stdexcept>
#include <utility>

#include "exlasso/groups.hpp"
#include "exlasso/losses.hpp"
#include "exlasso/prox.hpp"
#include "exlasso/types.hpp"

namespace exlasso {

//! Shared termination status for the iterative solvers.
enum class SolveStatus : std::uint8_t { converged, iteration_limit, time_limit };

//! One instance of the composite problem
//!   min_x  h(A x) - <c, x> + lambda * Delta(x)
//! with h a LossModel, Delta the group-wise squared weighted l1 regularizer
//! of `part`, and c an optional linear tilt (zero in the standard setting).
struct ProblemSpec {
  Matrix A;
  LossModel loss;
  Vector c;
  double lambda = 0.0;
  GroupPartition part;

  void validate() const {
    if (A.rows() != loss.m()) throw std::invalid_argument("ProblemSpec: A rows != loss size");
    if (A.cols() != part.dim()) throw std::invalid_argument("ProblemSpec: A cols != partition dim");
    if (c.size() != A.cols()) throw std::invalid_argument("ProblemSpec: c size != A cols");
    if (!(lambda >= 0.0)) throw std::invalid_argument("ProblemSpec: lambda must be nonnegative");
  }
};

inline ProblemSpec make_problem(Matrix A, LossModel loss, double lambda, GroupPartition part) {
  const Index n = A.cols();
  ProblemSpec spec{std::move(A), std::move(loss), Vector::Zero(n), lambda, std::move(part)};
  spec.validate();
  return spec;
}

inline double primal_objective(const ProblemSpec& spec, const Vector& x) {
  return spec.loss.value(spec.A * x) - spec.c.dot(x) +
         spec.lambda * regularizer_value(x, spec.part);
}

//! Relative KKT residual
//!   || x - Prox_p(x - g) || / (1 + ||x|| + ||g||),  g = A' grad h(A x) - c,
//! with p = lambda * Delta. Zero exactly at optimality.
inline double kkt_residual(const ProblemSpec& spec, const Vector& x) {
  const Vector g = spec.A.transpose() * spec.loss.grad(spec.A * x) - spec.c;
  const Vector r = x - prox_regularizer(x - g, spec.part, spec.lambda).x;
  return r.norm() / (1.0 + x.norm() + g.norm());
}

}  // namespace exlasso

#endif  // EXLASSO_PROBLEM_HPP
