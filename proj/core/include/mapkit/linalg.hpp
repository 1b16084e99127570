#pragma once

// Dense linear-algebra kernels: matrix exponential, pivoted linear solves
// with an explicit accuracy contract, and the stationary vector of a CTMC
// generator. Storage and factorisations come from Eigen; the exponential
// is implemented here (scaling-and-squaring with diagonal Pade
// approximants and degree selection by 1-norm) because downstream
// accuracy claims hinge on its behaviour, not on a black box.
//
// The scalar type is fixed by the aliases below; nothing in the module
// depends on `double` beyond them, so swapping precision is a recompile,
// not a redesign.

#include <Eigen/Dense>

#include "mapkit/errors.hpp"
#include "mapkit/prob_vector.hpp"
#include "mapkit/tolerances.hpp"

namespace mapkit {

using Scalar = double;
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

// e^A for square finite A. Throws numeric_error on non-finite input or
// overflow (the message names the offending magnitude).
Matrix expm(const Matrix& A, const Tolerances& tol = default_tolerances());

// e^{At} for t >= 0.
Matrix expm(const Matrix& A, double t,
            const Tolerances& tol = default_tolerances());

// Pivoted LU factorisation with the module's singularity and residual
// contract, reusable across many right-hand sides.
class LinearSolver {
 public:
  explicit LinearSolver(Matrix A, const Tolerances& tol = default_tolerances());

  // Solve A x = b. Runs one step of iterative refinement if the residual
  // check fails, and throws numeric_error if it still fails.
  Vector solve(const Vector& b) const;
  // Columnwise solve A X = B.
  Matrix solve(const Matrix& B) const;
  Matrix inverse() const;

  Eigen::Index order() const { return n_; }
  double norm_inf() const { return anorm_; }

 private:
  Eigen::PartialPivLU<Matrix> lu_;
  Matrix a_;
  double anorm_ = 0.0;
  Eigen::Index n_ = 0;
  Tolerances tol_;
};

// One-shot conveniences over LinearSolver.
Vector solve_linear(const Matrix& A, const Vector& b,
                    const Tolerances& tol = default_tolerances());
Matrix solve_linear(const Matrix& A, const Matrix& B,
                    const Tolerances& tol = default_tolerances());
Matrix inverse(const Matrix& A, const Tolerances& tol = default_tolerances());

// Stationary distribution of an irreducible CTMC generator Q (row sums
// zero): the unique probability row vector with pi Q = 0. Solved via the
// augmented system that replaces one redundant balance equation with the
// normalisation constraint; rank deficiency beyond the expected one
// dimension (a reducible Q) surfaces as validation_error.
ProbVector left_null_prob_vector(const Matrix& Q,
                                 const Tolerances& tol = default_tolerances());

}  // namespace mapkit
