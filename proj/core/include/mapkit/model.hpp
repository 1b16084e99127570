#pragma once

// The central model type: a two-matrix point process (C, D) on p phases.
// C carries the no-event dynamics (strictly negative diagonal, nonnegative
// off-diagonal), D the event-generating rates (nonnegative, not all zero),
// and Q = C + D must be an irreducible conservative generator. Construction
// goes through validate_model(), which either returns a well-formed value
// or throws a validation_error naming the first offending entry -- there is
// no way to hold a malformed model.

#include <Eigen/Dense>

#include "mapkit/linalg.hpp"
#include "mapkit/prob_vector.hpp"
#include "mapkit/tolerances.hpp"

namespace mapkit {

enum class MapClass {
  GeneralMap,  // neither structure below
  Mmpp,        // D diagonal: Poisson process modulated by the phase
  Mspp,        // C diagonal: phase changes only at events
};

const char* to_string(MapClass c);

class MapModel {
 public:
  Eigen::Index order() const { return c_.rows(); }
  const Matrix& C() const { return c_; }
  const Matrix& D() const { return d_; }
  const Matrix& Q() const { return q_; }
  MapClass map_class() const { return class_; }

 private:
  MapModel(Matrix C, Matrix D, Matrix Q, MapClass cls)
      : c_(std::move(C)), d_(std::move(D)), q_(std::move(Q)), class_(cls) {}
  friend MapModel validate_model(const Matrix&, const Matrix&,
                                 const Tolerances&);

  Matrix c_, d_, q_;
  MapClass class_;
};

// Validates (C, D) and classifies the model. Checks, in order: shape,
// finiteness, sign patterns, vanishing row sums of C + D, D != 0, and
// irreducibility of Q (a failure names an absorbing subset of phases).
MapModel validate_model(const Matrix& C, const Matrix& D,
                        const Tolerances& tol = default_tolerances());

// The time-stationary phase distribution pi (of Q), the event-stationary
// phase distribution alpha = pi D / (pi D 1), and the mean event rate
// lambda_star = pi D 1. Construction cross-checks alpha against the
// fixed point of the embedded chain and fails loudly on disagreement.
struct StationaryPair {
  ProbVector pi;
  ProbVector alpha;
  double lambda_star;
};

StationaryPair stationary_pair(const MapModel& m,
                               const Tolerances& tol = default_tolerances());

// Embedded phase-transition matrix at event epochs, P = (-C)^{-1} D.
Matrix embedded_chain(const MapModel& m,
                      const Tolerances& tol = default_tolerances());

// Phase-type representation (eta, C) of the time to the next event from a
// given start: survival eta e^{Ct} 1 and density eta e^{Ct} D 1.
struct PhaseTypeDist {
  ProbVector eta;
  Matrix C;
  Matrix D;  // kept for the density; (-C)1 = D1 for a valid model

  double survival(double t, const Tolerances& tol = default_tolerances()) const;
  double density(double t, const Tolerances& tol = default_tolerances()) const;
  double cdf(double t, const Tolerances& tol = default_tolerances()) const;
};

enum class Start {
  TimeStationary,   // eta = pi: the interval seen from a random time point
  EventStationary,  // eta = alpha: the interval seen from a random event
};

PhaseTypeDist ph_distribution(const MapModel& m, Start start,
                              const Tolerances& tol = default_tolerances());
PhaseTypeDist ph_distribution(const MapModel& m, const ProbVector& eta,
                              const Tolerances& tol = default_tolerances());

}  // namespace mapkit
