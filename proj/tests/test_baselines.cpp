#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "exlasso/admm.hpp"
#include "exlasso/apg.hpp"
#include "exlasso/ppdna.hpp"
#include "oracles.hpp"

using exlasso::AdmmConfig;
using exlasso::AdmmReport;
using exlasso::ApgConfig;
using exlasso::ApgReport;
using exlasso::GroupPartition;
using exlasso::Index;
using exlasso::LossModel;
using exlasso::Matrix;
using exlasso::ProblemSpec;
using exlasso::SolveStatus;
using exlasso::Vector;

namespace {

Matrix random_matrix(testor::TestRng& rng, Index rows, Index cols, double scale = 1.0) {
  Matrix A(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) A(i, j) = scale * rng.normal();
  }
  return A;
}

Vector random_labels(testor::TestRng& rng, Index m) {
  Vector b(m);
  for (Index i = 0; i < m; ++i) b[i] = rng.uniform01() < 0.5 ? -1.0 : 1.0;
  return b;
}

ProblemSpec small_ls_problem(unsigned seed, Index m, Index n, Index n_groups, double lambda) {
  testor::TestRng rng(seed);
  const Matrix A = random_matrix(rng, m, n);
  Vector b(m);
  for (Index i = 0; i < m; ++i) b[i] = rng.normal();
  return exlasso::make_problem(A, LossModel::least_squares(b), lambda,
                               GroupPartition::contiguous(n_groups, n / n_groups));
}

std::vector<Index> support_of(const Vector& x, double thresh = 1e-8) {
  std::vector<Index> s;
  for (Index i = 0; i < x.size(); ++i) {
    if (std::abs(x[i]) > thresh) s.push_back(i);
  }
  return s;
}

}  // namespace

TEST_CASE("admm matches the proximal-gradient oracle on least squares") {
  const ProblemSpec spec = small_ls_problem(41, 8, 6, 3, 0.2);
  AdmmConfig cfg;
  cfg.tol = 1e-9;
  const AdmmReport rep = exlasso::admm_solve(spec, cfg);
  CHECK(rep.status == SolveStatus::converged);
  CHECK(rep.eta_kkt <= 1e-9);
  CHECK(rep.max_solve_residual <= 1e-10);  // u-solve accuracy contract

  const Vector x_ref = testor::pg_reference(
      spec.A, spec.c, spec.part, spec.lambda,
      [&](const Vector& x) { return spec.loss.value(spec.A * x); },
      [&](const Vector& x) { return Vector(spec.A.transpose() * spec.loss.grad(spec.A * x)); });
  CHECK((rep.x - x_ref).norm() <= 1e-6 * (1.0 + x_ref.norm()));
}

TEST_CASE("admm feasibility residuals vanish at a tight tolerance") {
  const ProblemSpec spec = small_ls_problem(42, 20, 30, 6, 0.1);
  AdmmConfig cfg;
  cfg.tol = 1e-10;
  const AdmmReport rep = exlasso::admm_solve(spec, cfg);
  CHECK(rep.status == SolveStatus::converged);
  CHECK(rep.residual_w <= 1e-6 * (1.0 + rep.u.norm()));
  CHECK(rep.residual_v <= 1e-6 * (1.0 + rep.u.norm()));
}

TEST_CASE("admm handles the logistic loss") {
  testor::TestRng rng(43);
  const Index m = 20, n = 24;
  const Matrix A = random_matrix(rng, m, n);
  const Vector b = random_labels(rng, m);
  const ProblemSpec spec =
      exlasso::make_problem(A, LossModel::logistic(b), 0.05, GroupPartition::contiguous(6, 4));
  const AdmmReport rep = exlasso::admm_solve(spec);
  CHECK(rep.status == SolveStatus::converged);
  CHECK(rep.eta_kkt <= 1e-6);
}

TEST_CASE("admm converges on a zero design matrix") {
  Vector b(3);
  b << 1.0, -1.0, 2.0;
  const ProblemSpec spec = exlasso::make_problem(Matrix::Zero(3, 4),
                                                 LossModel::least_squares(b), 0.5,
                                                 GroupPartition::contiguous(2, 2));
  const AdmmReport rep = exlasso::admm_solve(spec);
  CHECK(rep.status == SolveStatus::converged);
  CHECK(rep.x.norm() <= 1e-8);
}

TEST_CASE("apg matches the proximal-gradient oracle") {
  const ProblemSpec spec = small_ls_problem(44, 10, 6, 3, 0.15);
  ApgConfig cfg;
  cfg.tol = 1e-9;
  const ApgReport rep = exlasso::apg_solve(spec, cfg);
  CHECK(rep.status == SolveStatus::converged);

  const Vector x_ref = testor::pg_reference(
      spec.A, spec.c, spec.part, spec.lambda,
      [&](const Vector& x) { return spec.loss.value(spec.A * x); },
      [&](const Vector& x) { return Vector(spec.A.transpose() * spec.loss.grad(spec.A * x)); });
  CHECK((rep.x - x_ref).norm() <= 1e-6 * (1.0 + x_ref.norm()));
}

TEST_CASE("apg restart keeps the objective trace non-increasing") {
  const ProblemSpec spec = small_ls_problem(45, 30, 40, 8, 0.02);
  ApgConfig cfg;
  cfg.tol = 1e-8;
  const ApgReport rep = exlasso::apg_solve(spec, cfg);
  CHECK(rep.status == SolveStatus::converged);
  REQUIRE(rep.objective_trace.size() >= 2);
  for (std::size_t k = 1; k < rep.objective_trace.size(); ++k) {
    const double prev = rep.objective_trace[k - 1];
    CHECK(rep.objective_trace[k] <= prev + 1e-12 * (1.0 + std::abs(prev)));
  }
}

TEST_CASE("apg with zero lambda reduces to accelerated gradient") {
  testor::TestRng rng(46);
  const Index m = 12, n = 6;
  const Matrix A = random_matrix(rng, m, n);
  Vector b(m);
  for (Index i = 0; i < m; ++i) b[i] = rng.normal();
  const ProblemSpec spec = exlasso::make_problem(A, LossModel::least_squares(b), 0.0,
                                                 GroupPartition::contiguous(3, 2));
  ApgConfig cfg;
  cfg.tol = 1e-10;
  const ApgReport rep = exlasso::apg_solve(spec, cfg);
  CHECK(rep.status == SolveStatus::converged);
  // unregularized least squares: compare to the normal-equations solution
  const Vector x_ls = (A.transpose() * A).ldlt().solve(A.transpose() * b);
  CHECK((rep.x - x_ls).norm() <= 1e-7 * (1.0 + x_ls.norm()));
}

TEST_CASE("all three solvers agree on objective and support") {
  for (unsigned seed : {51u, 52u, 53u, 54u}) {
    testor::TestRng rng(seed);
    const Index m = 50, n = 50;
    const Matrix A = random_matrix(rng, m, n);
    Vector b(m);
    for (Index i = 0; i < m; ++i) b[i] = rng.normal();
    const ProblemSpec spec = exlasso::make_problem(A, LossModel::least_squares(b), 0.1,
                                                   GroupPartition::contiguous(5, 10));

    exlasso::PpdnaConfig pc;
    pc.kkt_tol = 1e-8;
    const exlasso::PpdnaReport rp = exlasso::ppdna_solve(spec, pc);
    AdmmConfig ac;
    ac.tol = 1e-8;
    const AdmmReport ra = exlasso::admm_solve(spec, ac);
    ApgConfig gc;
    gc.tol = 1e-8;
    const ApgReport rg = exlasso::apg_solve(spec, gc);

    REQUIRE(rp.status == SolveStatus::converged);
    REQUIRE(ra.status == SolveStatus::converged);
    REQUIRE(rg.status == SolveStatus::converged);

    const double f = rp.objective;
    CHECK(std::abs(ra.objective - f) <= 1e-5 * (1.0 + std::abs(f)));
    CHECK(std::abs(rg.objective - f) <= 1e-5 * (1.0 + std::abs(f)));
    CHECK(support_of(rp.x) == support_of(ra.x));
    CHECK(support_of(rp.x) == support_of(rg.x));
  }
}

TEST_CASE("baseline configs are validated") {
  const ProblemSpec spec = small_ls_problem(55, 4, 4, 2, 0.1);
  AdmmConfig ac;
  ac.kappa = 2.5;
  CHECK_THROWS_AS(exlasso::admm_solve(spec, ac), std::invalid_argument);
  ApgConfig gc;
  gc.max_iter = 0;
  CHECK_THROWS_AS(exlasso::apg_solve(spec, gc), std::invalid_argument);
}
