#include "mapkit/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace mapkit {

namespace {

std::string entry(const char* name, Eigen::Index i, Eigen::Index j,
                  double v) {
  return std::string(name) + "(" + std::to_string(i) + "," +
         std::to_string(j) + ") = " + std::to_string(v);
}

// Strongly connected components of the directed support graph of Q
// (Kosaraju). Returns the component id of each vertex.
std::vector<int> scc_ids(const Matrix& Q, int& n_comp) {
  const Eigen::Index p = Q.rows();
  std::vector<std::vector<int>> adj(p), radj(p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j)
      if (i != j && Q(i, j) > 0.0) {
        adj[i].push_back(int(j));
        radj[j].push_back(int(i));
      }

  std::vector<char> seen(p, 0);
  std::vector<int> order;
  order.reserve(p);
  for (Eigen::Index s = 0; s < p; ++s) {
    if (seen[s]) continue;
    // iterative DFS, post-order
    std::vector<std::pair<int, size_t>> stack{{int(s), 0}};
    seen[s] = 1;
    while (!stack.empty()) {
      auto& [v, k] = stack.back();
      if (k < adj[v].size()) {
        int w = adj[v][k++];
        if (!seen[w]) {
          seen[w] = 1;
          stack.push_back({w, 0});
        }
      } else {
        order.push_back(v);
        stack.pop_back();
      }
    }
  }

  std::vector<int> comp(p, -1);
  n_comp = 0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (comp[*it] != -1) continue;
    std::vector<int> stack{*it};
    comp[*it] = n_comp;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int w : radj[v])
        if (comp[w] == -1) {
          comp[w] = n_comp;
          stack.push_back(w);
        }
    }
    ++n_comp;
  }
  return comp;
}

bool is_diagonal(const Matrix& M) {
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j)
      if (i != j && M(i, j) != 0.0) return false;
  return true;
}

}  // namespace

const char* to_string(MapClass c) {
  switch (c) {
    case MapClass::Mmpp:
      return "mmpp";
    case MapClass::Mspp:
      return "mspp";
    default:
      return "map";
  }
}

MapModel validate_model(const Matrix& C, const Matrix& D,
                        const Tolerances& tol) {
  if (C.rows() != C.cols())
    throw validation_error("C is " + std::to_string(C.rows()) + "x" +
                           std::to_string(C.cols()) + ", must be square");
  if (D.rows() != D.cols())
    throw validation_error("D is " + std::to_string(D.rows()) + "x" +
                           std::to_string(D.cols()) + ", must be square");
  if (C.rows() != D.rows())
    throw validation_error("C is " + std::to_string(C.rows()) + "x" +
                           std::to_string(C.cols()) + " but D is " +
                           std::to_string(D.rows()) + "x" +
                           std::to_string(D.cols()));
  const Eigen::Index p = C.rows();
  if (p == 0) throw validation_error("model must have at least one phase");
  if (!C.allFinite()) throw validation_error("C has non-finite entries");
  if (!D.allFinite()) throw validation_error("D has non-finite entries");

  for (Eigen::Index i = 0; i < p; ++i) {
    if (!(C(i, i) < 0.0))
      throw validation_error(entry("C", i, i, C(i, i)) +
                             ": diagonal of C must be strictly negative");
    for (Eigen::Index j = 0; j < p; ++j) {
      if (i != j && C(i, j) < 0.0)
        throw validation_error(entry("C", i, j, C(i, j)) +
                               ": off-diagonal of C must be nonnegative");
      if (D(i, j) < 0.0)
        throw validation_error(entry("D", i, j, D(i, j)) +
                               ": D must be nonnegative");
    }
  }

  Matrix Q = C + D;
  for (Eigen::Index i = 0; i < p; ++i) {
    const double r = Q.row(i).sum();
    if (std::abs(r) > tol.row_sum)
      throw validation_error("row " + std::to_string(i) +
                             " of C + D sums to " + std::to_string(r) +
                             ", must vanish (|sum| <= " +
                             std::to_string(tol.row_sum) + ")");
  }

  if (!(D.maxCoeff() > 0.0))
    throw validation_error("D is identically zero: the model never "
                           "generates an event");

  int n_comp = 0;
  const std::vector<int> comp = scc_ids(Q, n_comp);
  if (n_comp > 1) {
    // A sink component of the condensation is an absorbing subset; name it.
    std::vector<char> has_exit(n_comp, 0);
    for (Eigen::Index i = 0; i < p; ++i)
      for (Eigen::Index j = 0; j < p; ++j)
        if (i != j && Q(i, j) > 0.0 && comp[i] != comp[j])
          has_exit[comp[i]] = 1;
    int sink = 0;
    while (sink < n_comp && has_exit[sink]) ++sink;
    std::string states;
    for (Eigen::Index i = 0; i < p; ++i)
      if (comp[i] == sink) states += (states.empty() ? "" : ", ") +
                                     std::to_string(i);
    throw validation_error("Q = C + D is reducible: phases {" + states +
                           "} form an absorbing subset");
  }

  MapClass cls = MapClass::GeneralMap;
  if (is_diagonal(D))
    cls = MapClass::Mmpp;
  else if (is_diagonal(C))
    cls = MapClass::Mspp;

  return MapModel(C, D, std::move(Q), cls);
}

StationaryPair stationary_pair(const MapModel& m, const Tolerances& tol) {
  ProbVector pi = left_null_prob_vector(m.Q(), tol);
  const RowVector pid = pi.row() * m.D();
  const double lambda = pid.sum();
  const double lambda_c = -(pi.row() * m.C()).sum();
  if (std::abs(lambda - lambda_c) >
      tol.pair_agreement * std::max(1.0, lambda))
    throw numeric_error(
        "stationary pair: pi D 1 = " + std::to_string(lambda) +
        " and -pi C 1 = " + std::to_string(lambda_c) + " disagree");
  if (!(lambda > 0.0))
    throw numeric_error("stationary pair: mean event rate is not positive");
  ProbVector alpha(pid / lambda, tol);

  // Independent route: alpha must be the stationary vector of the embedded
  // chain P = (-C)^{-1} D. Solve alpha (P - I) = 0 the same way as pi.
  const Matrix P = embedded_chain(m, tol);
  ProbVector alpha_chain =
      left_null_prob_vector(Matrix(P - Matrix::Identity(P.rows(), P.cols())),
                            tol);
  const double gap = (alpha.row() - alpha_chain.row()).cwiseAbs().maxCoeff();
  if (gap > tol.pair_agreement)
    throw numeric_error(
        "stationary pair: post-event vector disagrees with the embedded "
        "fixed point by " +
        std::to_string(gap));

  return StationaryPair{std::move(pi), std::move(alpha), lambda};
}

Matrix embedded_chain(const MapModel& m, const Tolerances& tol) {
  const Matrix P = LinearSolver(Matrix(-m.C()), tol).solve(m.D());
  for (Eigen::Index i = 0; i < P.rows(); ++i) {
    const double r = P.row(i).sum();
    if (std::abs(r - 1.0) > tol.stochastic_row)
      throw numeric_error("embedded chain: row " + std::to_string(i) +
                          " sums to " + std::to_string(r) +
                          ", must be stochastic");
    for (Eigen::Index j = 0; j < P.cols(); ++j)
      if (P(i, j) < -tol.stochastic_row)
        throw numeric_error("embedded chain: entry (" + std::to_string(i) +
                            "," + std::to_string(j) + ") = " +
                            std::to_string(P(i, j)) + " is negative");
  }
  return P;
}

double PhaseTypeDist::survival(double t, const Tolerances& tol) const {
  if (!(t >= 0.0))
    throw validation_error("survival: time must be nonnegative");
  return (eta.row() * expm(C, t, tol)).sum();
}

double PhaseTypeDist::density(double t, const Tolerances& tol) const {
  if (!(t >= 0.0))
    throw validation_error("density: time must be nonnegative");
  return (eta.row() * expm(C, t, tol) * D.rowwise().sum()).sum();
}

double PhaseTypeDist::cdf(double t, const Tolerances& tol) const {
  return 1.0 - survival(t, tol);
}

PhaseTypeDist ph_distribution(const MapModel& m, Start start,
                              const Tolerances& tol) {
  StationaryPair sp = stationary_pair(m, tol);
  ProbVector eta =
      (start == Start::TimeStationary) ? std::move(sp.pi) : std::move(sp.alpha);
  return PhaseTypeDist{std::move(eta), m.C(), m.D()};
}

PhaseTypeDist ph_distribution(const MapModel& m, const ProbVector& eta,
                              const Tolerances& tol) {
  (void)tol;
  if (eta.size() != m.order())
    throw validation_error("start vector has " + std::to_string(eta.size()) +
                           " entries but the model has " +
                           std::to_string(m.order()) + " phases");
  return PhaseTypeDist{eta, m.C(), m.D()};
}

}  // namespace mapkit
