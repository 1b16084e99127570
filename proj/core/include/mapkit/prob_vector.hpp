#pragma once

// A row probability vector: finite, componentwise nonnegative, sums to one.
// Construction renormalises and clamps harmless negative round-off; real
// negativity is rejected. Shared by the linear-algebra kernels (which
// produce stationary vectors) and the model layer (which consumes them).

#include <Eigen/Dense>

#include "mapkit/errors.hpp"
#include "mapkit/tolerances.hpp"

namespace mapkit {

class ProbVector {
 public:
  explicit ProbVector(Eigen::RowVectorXd v,
                      const Tolerances& tol = default_tolerances())
      : v_(std::move(v)) {
    if (v_.size() == 0)
      throw validation_error("probability vector must be non-empty");
    if (!v_.allFinite())
      throw validation_error("probability vector has non-finite entries");
    for (Eigen::Index i = 0; i < v_.size(); ++i) {
      if (v_(i) < 0.0) {
        if (v_(i) < -tol.prob_negativity)
          throw validation_error("probability vector entry " +
                                 std::to_string(i) + " = " +
                                 std::to_string(v_(i)) + " is negative");
        v_(i) = 0.0;  // round-off, clamp
      }
    }
    const double total = v_.sum();
    if (!(total > 0.0))
      throw validation_error("probability vector has zero total mass");
    v_ /= total;
  }

  static ProbVector uniform(Eigen::Index p) {
    return ProbVector(Eigen::RowVectorXd::Constant(p, 1.0 / double(p)));
  }

  static ProbVector point_mass(Eigen::Index p, Eigen::Index i) {
    if (i < 0 || i >= p)
      throw validation_error("point mass index out of range");
    Eigen::RowVectorXd v = Eigen::RowVectorXd::Zero(p);
    v(i) = 1.0;
    return ProbVector(std::move(v));
  }

  const Eigen::RowVectorXd& row() const { return v_; }
  double operator()(Eigen::Index i) const { return v_(i); }
  Eigen::Index size() const { return v_.size(); }

 private:
  Eigen::RowVectorXd v_;
};

}  // namespace mapkit
