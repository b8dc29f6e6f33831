#include "qeclipse/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>

#include "qeclipse/errors.hpp"
#include "qeclipse/rng.hpp"

namespace qeclipse::certificates {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

void check_delta(double delta) {
  require(std::isfinite(delta) && delta > 0.0, "delta must be > 0");
}

// Run fn(t) for t in [0, count) on `threads` workers, results landing in
// caller-owned slots indexed by t, so the outcome is placement-deterministic.
template <class Fn>
void indexed_parallel_for(std::int64_t count, int threads, Fn&& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::int64_t t = 0; t < count; ++t) fn(t);
    return;
  }
  int workers = static_cast<int>(std::min<std::int64_t>(threads, count));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (std::int64_t t = w; t < count; t += workers) fn(t);
    });
  }
  for (auto& th : pool) th.join();
}

struct Welford {
  double sum = 0.0, sumsq = 0.0;
  std::int64_t count = 0;
  void add(double x) {
    sum += x;
    sumsq += x * x;
    ++count;
  }
  double mean() const { return sum / static_cast<double>(count); }
  double se() const {
    if (count < 2) return 0.0;
    double var = (sumsq - sum * mean()) / static_cast<double>(count - 1);
    return std::sqrt(std::max(var, 0.0) / static_cast<double>(count));
  }
};

}  // namespace

double pbar_indicator(double tau, double delta) {
  check_delta(delta);
  require(std::isfinite(tau) && tau >= 0.0, "pbar_indicator: bad tau");
  return tau > delta ? 1.0 : 0.0;
}

double pbarbar_factor(const std::vector<double>& tau_j, double delta) {
  check_delta(delta);
  require(!tau_j.empty(), "pbarbar_factor: empty margins");
  double prod = 1.0;
  for (double t : tau_j) {
    require(!std::isnan(t) && t >= 0.0, "pbarbar_factor: bad margin");
    if (t == kInf) continue;  // empty cone piece contributes 1
    prod *= std::min(1.0, t / delta);
  }
  return prod;
}

TrialCore run_trial(const geometry::DifferenceBall& d, std::int64_t m,
                    std::uint64_t seed, const solvers::SolverConfig& cfg) {
  require(m >= 1, "run_trial: need m >= 1");
  TrialCore core;
  core.seed = seed;
  Eigen::MatrixXd phi = embedding::draw_sensing(m, d.dim(), seed);
  core.linear = solvers::linear_eclipse_holds(phi, d);
  if (!core.linear) {
    core.tau = 0.0;
    core.tau_lower = 0.0;
    core.tau_j.assign(static_cast<size_t>(m), 0.0);
    core.converged = true;
    return core;
  }
  solvers::MarginResult inf = solvers::infinity_margin(phi, d, cfg);
  solvers::ConeMargins cones = solvers::cone_margins(phi, d, cfg);
  core.tau = inf.tau;
  core.tau_lower = inf.lower_bound;
  core.tau_j = cones.tau_j;
  for (double& t : core.tau_j)
    if (t < core.tau) t = core.tau;
  core.converged = inf.converged && cones.converged;
  return core;
}

TrialOutcome outcome_for_delta(const TrialCore& core, std::int64_t trial_index,
                               double delta) {
  TrialOutcome out;
  out.trial_index = trial_index;
  out.seed = core.seed;
  out.tau = core.tau;
  out.pbar = pbar_indicator(core.tau, delta);
  out.pbarbar = pbarbar_factor(core.tau_j, delta);
  out.linear = core.linear ? 1.0 : 0.0;
  return out;
}

std::vector<TrialCore> run_trials(const geometry::DifferenceBall& d,
                                  std::int64_t m, std::int64_t trials,
                                  std::uint64_t master_seed,
                                  const solvers::SolverConfig& cfg,
                                  int threads) {
  require(trials >= 1, "run_trials: need trials >= 1");
  std::vector<TrialCore> cores(static_cast<size_t>(trials));
  indexed_parallel_for(trials, threads, [&](std::int64_t t) {
    cores[static_cast<size_t>(t)] = run_trial(
        d, m, rng::derive_seed(master_seed, static_cast<std::uint64_t>(t)),
        cfg);
  });
  return cores;
}

ProbabilityEstimates aggregate_for_delta(const std::vector<TrialCore>& cores,
                                         double delta) {
  require(!cores.empty(), "aggregate_for_delta: no trials");
  std::int64_t excluded = 0;
  Welford wb, wf, wl;
  for (size_t t = 0; t < cores.size(); ++t) {
    const TrialCore& core = cores[t];
    if (!core.converged) {
      ++excluded;
      continue;
    }
    TrialOutcome o = outcome_for_delta(core, static_cast<std::int64_t>(t), delta);
    wb.add(o.pbar);
    wf.add(o.pbarbar);
    wl.add(o.linear);
  }
  if (wb.count == 0)
    throw SolverBudgetError("aggregate_for_delta: every trial failed");

  ProbabilityEstimates est;
  est.p_bar_hat = wb.mean();
  est.p_bbar_hat = wf.mean();
  est.p_lin_hat = wl.mean();
  est.se_bar = wb.se();
  est.se_bbar = wf.se();
  est.se_lin = wl.se();
  est.trials = wb.count;
  est.excluded = excluded;
  return est;
}

ProbabilityEstimates estimate(const geometry::DifferenceBall& d,
                              std::int64_t m, double delta,
                              std::int64_t trials, std::uint64_t master_seed,
                              const solvers::SolverConfig& cfg, int threads) {
  check_delta(delta);
  require(trials >= 2, "estimate: need trials >= 2");
  std::vector<TrialCore> cores =
      run_trials(d, m, trials, master_seed, cfg, threads);
  ProbabilityEstimates est = aggregate_for_delta(cores, delta);
  if (static_cast<double>(est.excluded) > 0.05 * static_cast<double>(trials))
    throw SolverBudgetError("estimate: " + std::to_string(est.excluded) +
                            " of " + std::to_string(trials) +
                            " trials failed to converge");
  return est;
}

CollisionWitness collision_search(const embedding::QuantisedMap& map,
                                  const geometry::Ball& c1,
                                  const geometry::Ball& c2,
                                  std::int64_t samples, std::uint64_t seed) {
  require(samples >= 1, "collision_search: need samples >= 1");
  require(c1.dim() == map.n() && c2.dim() == map.n(),
          "collision_search: dimension mismatch");

  std::int64_t n = map.n();
  rng::Engine eng(seed);
  Eigen::VectorXd axis = c2.center - c1.center;
  double axis_norm = axis.norm();
  require(axis_norm > 0.0, "collision_search: coincident centers");
  axis /= axis_norm;
  const double spread = 0.4 / std::sqrt(static_cast<double>(n));

  Eigen::VectorXd g(n), x1(n), x2(n);
  auto sample_point = [&](const geometry::Ball& ball,
                          const Eigen::VectorXd& pole_dir,
                          Eigen::VectorXd& out) {
    bool cap = eng.uniform01() < 0.5;
    for (std::int64_t i = 0; i < n; ++i) g[i] = eng.normal();
    if (cap) {
      // boundary point near the facing pole
      g = pole_dir + spread * g;
      double gn = g.norm();
      if (gn == 0.0) g = pole_dir; else g /= gn;
      out = ball.center + ball.radius * g;
    } else {
      double gn = g.norm();
      if (gn == 0.0) g = pole_dir; else g /= gn;
      double rad =
          std::pow(eng.uniform01(), 1.0 / static_cast<double>(n)) * ball.radius;
      out = ball.center + rad * g;
    }
  };

  for (std::int64_t k = 0; k < samples; ++k) {
    sample_point(c1, axis, x1);
    sample_point(c2, -axis, x2);
    embedding::Signature s1 = embedding::apply(map, x1);
    embedding::Signature s2 = embedding::apply(map, x2);
    if ((s1.array() == s2.array()).all())
      return CollisionWitness{true, x1, x2, k + 1};
  }
  return CollisionWitness{false, Eigen::VectorXd(), Eigen::VectorXd(), samples};
}

}  // namespace qeclipse::certificates
