#include "mapkit/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace mapkit {

namespace {

std::string fmt(double x) { return std::to_string(x); }

// Pade numerator coefficients for degrees 3..13 and the 1-norm switch
// points theta_m at which each degree keeps the backward error of the
// approximant below double-precision unit roundoff (Higham 2005).
constexpr double kTheta3 = 1.495585217958292e-2;
constexpr double kTheta5 = 2.539398330063230e-1;
constexpr double kTheta7 = 9.504178996162932e-1;
constexpr double kTheta9 = 2.097847961257068e0;
constexpr double kTheta13 = 5.371920351148152e0;

constexpr double kB3[] = {120.0, 60.0, 12.0, 1.0};
constexpr double kB5[] = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
constexpr double kB7[] = {17297280.0, 8648640.0, 1995840.0, 277200.0,
                          25200.0,    1512.0,    56.0,      1.0};
constexpr double kB9[] = {17643225600.0, 8821612800.0, 2075673600.0,
                          302702400.0,   30270240.0,   2162160.0,
                          110880.0,      3960.0,       90.0,
                          1.0};
constexpr double kB13[] = {64764752532480000.0,
                           32382376266240000.0,
                           7771770303897600.0,
                           1187353796428800.0,
                           129060195264000.0,
                           10559470521600.0,
                           670442572800.0,
                           33522128640.0,
                           1323241920.0,
                           40840800.0,
                           960960.0,
                           16380.0,
                           182.0,
                           1.0};

// U = odd part, V = even part of the degree-m Pade numerator, evaluated
// in powers of A^2 so only matrix products of even powers are formed.
void pade_uv(const Matrix& A, const double* b, int m, Matrix& U, Matrix& V) {
  const Eigen::Index n = A.rows();
  const Matrix A2 = A * A;
  Matrix even = Matrix::Identity(n, n) * b[0];
  Matrix odd = Matrix::Identity(n, n) * b[1];
  Matrix p = Matrix::Identity(n, n);
  for (int k = 2; k <= m; k += 2) {
    p = (k == 2) ? A2 : Matrix(p * A2);
    even += b[k] * p;
    if (k + 1 <= m) odd += b[k + 1] * p;
  }
  U = A * odd;
  V = std::move(even);
}

void pade13_uv(const Matrix& A, Matrix& U, Matrix& V) {
  const Eigen::Index n = A.rows();
  const double* b = kB13;
  const Matrix A2 = A * A;
  const Matrix A4 = A2 * A2;
  const Matrix A6 = A2 * A4;
  const Matrix I = Matrix::Identity(n, n);
  U = A * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 +
           b[5] * A4 + b[3] * A2 + b[1] * I);
  V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 +
      b[2] * A2 + b[0] * I;
}

}  // namespace

Matrix expm(const Matrix& A, const Tolerances& tol) {
  if (A.rows() != A.cols())
    throw validation_error("expm: matrix is " + std::to_string(A.rows()) +
                           "x" + std::to_string(A.cols()) +
                           ", must be square");
  if (!A.allFinite())
    throw numeric_error("expm: input has non-finite entries (max |entry| = " +
                        fmt(A.cwiseAbs().maxCoeff()) + ")");
  const Eigen::Index n = A.rows();
  if (n == 0) return Matrix(0, 0);

  const double norm1 = A.cwiseAbs().colwise().sum().maxCoeff();

  Matrix U, V;
  int squarings = 0;
  if (norm1 <= kTheta3) {
    pade_uv(A, kB3, 3, U, V);
  } else if (norm1 <= kTheta5) {
    pade_uv(A, kB5, 5, U, V);
  } else if (norm1 <= kTheta7) {
    pade_uv(A, kB7, 7, U, V);
  } else if (norm1 <= kTheta9) {
    pade_uv(A, kB9, 9, U, V);
  } else if (norm1 <= kTheta13) {
    pade13_uv(A, U, V);
  } else {
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / kTheta13)));
    const Matrix As = A / std::ldexp(1.0, squarings);
    pade13_uv(As, U, V);
  }

  Matrix X = Eigen::PartialPivLU<Matrix>(V - U).solve(V + U);
  for (int s = 0; s < squarings; ++s) {
    X = X * X;
    if (!X.allFinite())
      throw numeric_error(
          "expm: overflow while squaring (max |entry| reached " +
          fmt(X.cwiseAbs().maxCoeff()) + ")");
  }
  if (!X.allFinite())
    throw numeric_error("expm: non-finite result (max |entry| = " +
                        fmt(X.cwiseAbs().maxCoeff()) + ")");
  (void)tol;
  return X;
}

Matrix expm(const Matrix& A, double t, const Tolerances& tol) {
  if (!(t >= 0.0))
    throw validation_error("expm: time must be nonnegative, got " + fmt(t));
  return expm(Matrix(A * t), tol);
}

LinearSolver::LinearSolver(Matrix A, const Tolerances& tol)
    : a_(std::move(A)), tol_(tol) {
  if (a_.rows() != a_.cols())
    throw validation_error("solve: matrix is " + std::to_string(a_.rows()) +
                           "x" + std::to_string(a_.cols()) +
                           ", must be square");
  if (!a_.allFinite())
    throw numeric_error("solve: matrix has non-finite entries");
  n_ = a_.rows();
  anorm_ = (n_ > 0) ? a_.cwiseAbs().rowwise().sum().maxCoeff() : 0.0;
  lu_.compute(a_);
  const double floor = tol_.pivot_rel * anorm_;
  double min_pivot = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n_; ++i)
    min_pivot = std::min(min_pivot, std::abs(lu_.matrixLU()(i, i)));
  if (n_ > 0 && !(min_pivot >= floor))
    throw singular_error("solve: matrix is singular to working tolerance "
                         "(|pivot| = " +
                         fmt(min_pivot) + " < " + fmt(floor) + ")");
}

Vector LinearSolver::solve(const Vector& b) const {
  if (b.size() != n_)
    throw validation_error("solve: rhs length " + std::to_string(b.size()) +
                           " does not match order " + std::to_string(n_));
  if (!b.allFinite()) throw numeric_error("solve: rhs has non-finite entries");
  Vector x = lu_.solve(b);
  const double bound =
      tol_.solve_residual * (1.0 + b.cwiseAbs().maxCoeff());
  double resid = (a_ * x - b).cwiseAbs().maxCoeff();
  if (resid > bound) {
    x += lu_.solve(Vector(b - a_ * x));  // one refinement step
    resid = (a_ * x - b).cwiseAbs().maxCoeff();
    if (resid > bound)
      throw numeric_error("solve: residual " + fmt(resid) +
                          " exceeds bound " + fmt(bound) +
                          " after refinement");
  }
  return x;
}

Matrix LinearSolver::solve(const Matrix& B) const {
  if (B.rows() != n_)
    throw validation_error("solve: rhs has " + std::to_string(B.rows()) +
                           " rows, expected " + std::to_string(n_));
  Matrix X(n_, B.cols());
  for (Eigen::Index j = 0; j < B.cols(); ++j)
    X.col(j) = solve(Vector(B.col(j)));
  return X;
}

Matrix LinearSolver::inverse() const {
  return solve(Matrix(Matrix::Identity(n_, n_)));
}

Vector solve_linear(const Matrix& A, const Vector& b, const Tolerances& tol) {
  return LinearSolver(A, tol).solve(b);
}

Matrix solve_linear(const Matrix& A, const Matrix& B, const Tolerances& tol) {
  return LinearSolver(A, tol).solve(B);
}

Matrix inverse(const Matrix& A, const Tolerances& tol) {
  return LinearSolver(A, tol).inverse();
}

ProbVector left_null_prob_vector(const Matrix& Q, const Tolerances& tol) {
  if (Q.rows() != Q.cols())
    throw validation_error("stationary vector: generator is " +
                           std::to_string(Q.rows()) + "x" +
                           std::to_string(Q.cols()) + ", must be square");
  const Eigen::Index p = Q.rows();
  if (p == 0) throw validation_error("stationary vector: empty generator");
  if (!Q.allFinite())
    throw numeric_error("stationary vector: generator has non-finite entries");
  if (p == 1) return ProbVector(RowVector::Ones(1), tol);

  // pi Q = 0 with the last (redundant) balance equation replaced by the
  // normalisation pi 1 = 1: solve A x = e_p where A is Q^T with its last
  // row set to ones.
  Matrix A = Q.transpose();
  A.row(p - 1).setOnes();
  Vector b = Vector::Zero(p);
  b(p - 1) = 1.0;

  Vector x;
  try {
    x = LinearSolver(std::move(A), tol).solve(b);
  } catch (const singular_error& e) {
    throw validation_error(
        "stationary vector: generator is rank-deficient beyond the expected "
        "one-dimensional null space (is Q reducible?): " +
        std::string(e.what()));
  }

  for (Eigen::Index i = 0; i < p; ++i) {
    if (!(x(i) > 0.0))
      throw validation_error("stationary vector: component " +
                             std::to_string(i) + " = " + fmt(x(i)) +
                             " is not strictly positive (is Q reducible?)");
  }
  RowVector pi = x.transpose() / x.sum();

  const double scale = std::max(1.0, Q.cwiseAbs().rowwise().sum().maxCoeff());
  const double resid = (pi * Q).cwiseAbs().maxCoeff();
  if (resid > tol.stationary_residual * scale)
    throw numeric_error("stationary vector: ||pi Q||_inf = " + fmt(resid) +
                        " exceeds tolerance");
  return ProbVector(std::move(pi), tol);
}

}  // namespace mapkit
