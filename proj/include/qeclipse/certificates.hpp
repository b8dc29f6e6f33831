#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "qeclipse/embedding.hpp"
#include "qeclipse/geometry.hpp"
#include "qeclipse/solvers.hpp"

namespace qeclipse::certificates {

// 1 if tau > delta (strict), else 0.
double pbar_indicator(double tau, double delta);

// prod_j min(1, tau_j / delta); +infinity entries (empty cone pieces)
// contribute a factor of 1.
double pbarbar_factor(const std::vector<double>& tau_j, double delta);

// Everything about one random draw of the sensing matrix that does not
// depend on delta, so a trial can be reused across a delta sweep.
struct TrialCore {
  std::uint64_t seed;
  double tau;
  double tau_lower;  // certified lower bound on tau
  std::vector<double> tau_j;
  bool linear;     // closed-form separability of the projections
  bool converged;  // all solves certified
};

struct TrialOutcome {
  std::int64_t trial_index;
  std::uint64_t seed;
  double tau;
  double pbar;    // 1[tau > delta]
  double pbarbar; // product factor
  double linear;  // 1[projections separable]
};

struct ProbabilityEstimates {
  double p_bar_hat, p_bbar_hat, p_lin_hat;
  double se_bar, se_bbar, se_lin;  // sample std / sqrt(included trials)
  std::int64_t trials;             // included trials
  std::int64_t excluded;           // non-converged, left out of the means
};

// Draws Phi from the seed and computes margins once. When the closed-form
// linear test fails, a kernel point lies in the difference ball; it belongs
// to every dominance cone, so tau and every tau_j are exactly zero and the
// solves are skipped. Otherwise cone margins are floored at tau (they can
// never be smaller), which keeps the indicator chain exact under rounding.
TrialCore run_trial(const geometry::DifferenceBall& d, std::int64_t m,
                    std::uint64_t seed, const solvers::SolverConfig& cfg = {});

TrialOutcome outcome_for_delta(const TrialCore& core, std::int64_t trial_index,
                               double delta);

// One core per trial index, child seed derive_seed(master_seed, index),
// optionally fanned out over threads; results are index-placed, so the
// batch is identical for any thread count.
std::vector<TrialCore> run_trials(const geometry::DifferenceBall& d,
                                  std::int64_t m, std::int64_t trials,
                                  std::uint64_t master_seed,
                                  const solvers::SolverConfig& cfg = {},
                                  int threads = 1);

// Means and standard errors over the converged cores at one delta.
ProbabilityEstimates aggregate_for_delta(const std::vector<TrialCore>& cores,
                                         double delta);

// Monte Carlo estimates over `trials` draws of Phi, child seed per trial
// index. The dither never needs drawing: both certified quantities average
// over it analytically. Throws SolverBudgetError when more than 5% of
// trials fail to converge.
ProbabilityEstimates estimate(const geometry::DifferenceBall& d,
                              std::int64_t m, double delta,
                              std::int64_t trials, std::uint64_t master_seed,
                              const solvers::SolverConfig& cfg = {},
                              int threads = 1);

struct CollisionWitness {
  bool found;
  Eigen::VectorXd x1, x2;  // apply(map, x1) == apply(map, x2) when found
  std::int64_t samples_used;
};

// Randomised search for a colliding pair, one point per ball, mixing
// boundary-cap samples around the facing poles with uniform ball samples
// (50/50). Deterministic per seed.
CollisionWitness collision_search(const embedding::QuantisedMap& map,
                                  const geometry::Ball& c1,
                                  const geometry::Ball& c2,
                                  std::int64_t samples, std::uint64_t seed);

}  // namespace qeclipse::certificates
