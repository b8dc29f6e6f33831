#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "qeclipse/geometry.hpp"

namespace qeclipse::solvers {

struct SolverConfig {
  // Tolerances are applied to the instance normalised by ||c||_2, so they
  // are scale-free. eps_abs also bounds the accepted constraint violation.
  double eps_abs = 1e-6;
  double eps_rel = 1e-4;
  std::int64_t max_iter = 100000;
};

struct MarginResult {
  double tau;                // value at the returned point (upper estimate)
  double lower_bound;        // certified dual lower bound, >= 0
  Eigen::VectorXd minimizer;
  std::int64_t iterations;
  bool converged;
};

struct ConeMargins {
  // tau_j[j] = min |phi_j . z| over the piece of the difference ball where
  // row j dominates; +infinity when that piece is empty.
  std::vector<double> tau_j;
  std::int64_t iterations;  // summed over all sign-split subproblems
  bool converged;
};

// min over the difference ball of ||Phi z||_inf, by a primal-dual
// first-order scheme with an exact duality-gap stopping rule.
MarginResult infinity_margin(const Eigen::MatrixXd& phi,
                             const geometry::DifferenceBall& d,
                             const SolverConfig& cfg = {});

// Per-row margins over the dominance partition. Each piece splits into two
// convex sign subproblems (linear objective over ball-and-halfspaces);
// infeasible pieces are detected by a feasibility phase first.
ConeMargins cone_margins(const Eigen::MatrixXd& phi,
                         const geometry::DifferenceBall& d,
                         const SolverConfig& cfg = {});

// Closed-form separability of the unquantised projections:
// || P_rowspace(phi) c ||_2 > r, rank cutoff 1e-10 * sigma_max.
bool linear_eclipse_holds(const Eigen::MatrixXd& phi,
                          const geometry::DifferenceBall& d);

}  // namespace qeclipse::solvers
