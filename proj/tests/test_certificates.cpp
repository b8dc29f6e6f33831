#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "qeclipse/certificates.hpp"
#include "qeclipse/embedding.hpp"
#include "qeclipse/errors.hpp"
#include "qeclipse/geometry.hpp"
#include "qeclipse/rng.hpp"
#include "qeclipse/solvers.hpp"

using namespace qeclipse;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

Eigen::VectorXd axis_center(Eigen::Index n, double norm) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  c[0] = norm;
  return c;
}

bool same_core(const certificates::TrialCore& a,
               const certificates::TrialCore& b) {
  return a.seed == b.seed && a.tau == b.tau && a.tau_lower == b.tau_lower &&
         a.tau_j == b.tau_j && a.linear == b.linear &&
         a.converged == b.converged;
}

}  // namespace

TEST_CASE("single-draw indicator") {
  CHECK(certificates::pbar_indicator(3.0, 2.0) == 1.0);
  CHECK(certificates::pbar_indicator(3.0, 3.0) == 0.0);  // strict
  CHECK(certificates::pbar_indicator(0.0, 0.5) == 0.0);
  CHECK_THROWS_AS(certificates::pbar_indicator(3.0, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(certificates::pbar_indicator(-1.0, 1.0),
                  std::invalid_argument);
}

TEST_CASE("product factor") {
  CHECK(certificates::pbarbar_factor({3.0, 3.0}, 4.0) == 0.5625);
  CHECK(certificates::pbarbar_factor({5.0, 7.0, 6.0}, 5.0) == 1.0);
  CHECK(certificates::pbarbar_factor({3.0, 0.0}, 1.0) == 0.0);
  CHECK(certificates::pbarbar_factor({kInf, 2.0}, 4.0) == 0.5);
  CHECK(certificates::pbarbar_factor({kInf, kInf}, 1.0) == 1.0);
  CHECK_THROWS_AS(certificates::pbarbar_factor({}, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(certificates::pbarbar_factor({-1.0}, 1.0),
                  std::invalid_argument);
}

TEST_CASE("outcome fills the per-delta values") {
  certificates::TrialCore core;
  core.seed = 9;
  core.tau = 3.0;
  core.tau_lower = 3.0;
  core.tau_j = {3.0, 3.0};
  core.linear = true;
  core.converged = true;
  auto lo = certificates::outcome_for_delta(core, 4, 2.0);
  CHECK(lo.trial_index == 4);
  CHECK(lo.seed == 9);
  CHECK(lo.pbar == 1.0);
  CHECK(lo.pbarbar == 1.0);
  CHECK(lo.linear == 1.0);
  auto hi = certificates::outcome_for_delta(core, 4, 4.0);
  CHECK(hi.pbar == 0.0);
  CHECK(hi.pbarbar == 0.5625);
  CHECK(hi.linear == 1.0);
}

TEST_CASE("kernel hits zero out a trial without a solve") {
  // one wide row against a ball straddling its kernel
  geometry::DifferenceBall d(vec({0.0, 5.0}), 1.0);
  auto core = certificates::run_trial(d, 1, 12345);
  // row space is a random line in the plane; for most seeds it misses the
  // ball around (0,5) (projection of c can be short), but either branch
  // must keep the chain exact
  if (!core.linear) {
    CHECK(core.tau == 0.0);
    CHECK(core.tau_j == std::vector<double>{0.0});
    CHECK(core.converged);
  } else {
    CHECK(core.tau > 0.0);
  }
}

TEST_CASE("indicator chain never breaks on a random batch") {
  geometry::DifferenceBall d(axis_center(8, 4.0), 2.0);
  auto cores = certificates::run_trials(d, 5, 40, 77);
  int nontrivial = 0;
  for (const auto& core : cores) {
    REQUIRE(core.converged);
    for (double delta : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
      auto o = certificates::outcome_for_delta(core, 0, delta);
      CHECK(o.pbar <= o.pbarbar);
      CHECK(o.pbarbar <= o.linear);
      if (o.pbarbar > 0.0 && o.pbarbar < 1.0) ++nontrivial;
    }
    for (double tj : core.tau_j) {
      CHECK(tj >= core.tau);  // cone pieces restrict the feasible set
    }
  }
  CHECK(nontrivial > 10);  // the delta grid actually exercises the product
}

TEST_CASE("product factor is nonincreasing in delta on shared trials") {
  geometry::DifferenceBall d(axis_center(8, 5.0), 2.0);
  auto cores = certificates::run_trials(d, 4, 24, 31);
  std::vector<double> deltas = {0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0};
  double prev_bar = 2.0, prev_bbar = 2.0;
  for (double delta : deltas) {
    for (const auto& core : cores) {
      double lo = certificates::pbarbar_factor(core.tau_j, delta);
      double hi = certificates::pbarbar_factor(core.tau_j, delta / 2.0);
      CHECK(lo <= hi);
    }
    auto est = certificates::aggregate_for_delta(cores, delta);
    CHECK(est.p_bar_hat <= prev_bar);
    CHECK(est.p_bbar_hat <= prev_bbar);
    prev_bar = est.p_bar_hat;
    prev_bbar = est.p_bbar_hat;
  }
}

TEST_CASE("estimates are bit-identical across runs and thread counts") {
  geometry::DifferenceBall d(axis_center(6, 4.0), 1.5);
  auto a = certificates::estimate(d, 4, 1.0, 24, 99, {}, 1);
  auto b = certificates::estimate(d, 4, 1.0, 24, 99, {}, 1);
  CHECK(a.p_bar_hat == b.p_bar_hat);
  CHECK(a.p_bbar_hat == b.p_bbar_hat);
  CHECK(a.p_lin_hat == b.p_lin_hat);
  CHECK(a.se_bar == b.se_bar);
  CHECK(a.se_bbar == b.se_bbar);
  CHECK(a.se_lin == b.se_lin);
  CHECK(a.trials == 24);
  CHECK(a.excluded == 0);

  auto cores1 = certificates::run_trials(d, 4, 24, 99, {}, 1);
  auto cores2 = certificates::run_trials(d, 4, 24, 99, {}, 2);
  REQUIRE(cores1.size() == cores2.size());
  for (size_t t = 0; t < cores1.size(); ++t)
    CHECK(same_core(cores1[t], cores2[t]));

  auto c = certificates::estimate(d, 4, 1.0, 24, 100, {}, 1);
  bool differs = c.p_bar_hat != a.p_bar_hat || c.p_bbar_hat != a.p_bbar_hat ||
                 c.se_bbar != a.se_bbar;
  CHECK(differs);
}

TEST_CASE("vanishing delta collapses the product onto the linear test") {
  geometry::DifferenceBall d(axis_center(8, 4.0), 2.0);
  auto cores = certificates::run_trials(d, 5, 32, 55);
  for (const auto& core : cores) {
    auto o = certificates::outcome_for_delta(core, 0, 1e-12);
    CHECK(o.pbarbar == o.linear);
  }
  auto est = certificates::aggregate_for_delta(cores, 1e-12);
  CHECK(est.p_bbar_hat == est.p_lin_hat);
  CHECK(est.se_bbar == est.se_lin);
}

TEST_CASE("huge separation pins every estimate at one") {
  geometry::DifferenceBall d(axis_center(8, 1e6), 2.0);
  auto est = certificates::estimate(d, 8, 1.0, 16, 7);
  CHECK(est.p_bar_hat == 1.0);
  CHECK(est.p_bbar_hat == 1.0);
  CHECK(est.p_lin_hat == 1.0);
  CHECK(est.se_bar == 0.0);
  CHECK(est.excluded == 0);
}

TEST_CASE("starved solver budget fails the whole estimate") {
  geometry::DifferenceBall d(axis_center(8, 4.0), 2.0);
  solvers::SolverConfig cfg;
  cfg.max_iter = 1;
  cfg.eps_abs = 1e-12;
  cfg.eps_rel = 0.0;
  CHECK_THROWS_AS(certificates::estimate(d, 4, 1.0, 16, 5, cfg),
                  SolverBudgetError);
  // the per-trial cores still come back, flagged instead of thrown
  auto cores = certificates::run_trials(d, 4, 16, 5, cfg);
  std::int64_t bad = 0;
  for (const auto& core : cores)
    if (!core.converged) ++bad;
  CHECK(bad > 0);
  auto est = certificates::aggregate_for_delta(cores, 1.0);
  CHECK(est.excluded == bad);
  CHECK(est.trials == 16 - bad);
}

TEST_CASE("input validation") {
  geometry::DifferenceBall d(axis_center(4, 4.0), 1.0);
  CHECK_THROWS_AS(certificates::estimate(d, 4, 0.0, 8, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(certificates::estimate(d, 4, 1.0, 1, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(certificates::estimate(d, 0, 1.0, 8, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(certificates::run_trials(d, 4, 0, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      certificates::aggregate_for_delta(std::vector<certificates::TrialCore>{},
                                        1.0),
      std::invalid_argument);
}

TEST_CASE("certified margins rule out collisions") {
  rng::Engine eng(61);
  for (int k = 0; k < 5; ++k) {
    Eigen::Index n = 4;
    Eigen::VectorXd c1(n), c2(n);
    for (Eigen::Index i = 0; i < n; ++i) c1[i] = eng.normal();
    for (Eigen::Index i = 0; i < n; ++i) c2[i] = eng.normal();
    c2 = c1 + (c2 - c1).normalized() * 6.0;
    geometry::Ball b1(c1, 1.0), b2(c2, 1.0);
    auto d = geometry::difference_set(b1, b2);
    auto phi = embedding::draw_sensing(n, n, 200 + k);
    auto res = solvers::infinity_margin(phi, d);
    REQUIRE(res.converged);
    REQUIRE(res.lower_bound > 0.0);
    double delta = 0.5 * res.lower_bound;
    embedding::QuantisedMap map(phi, embedding::draw_dither(n, delta, 300 + k),
                                delta);
    auto witness = certificates::collision_search(map, b1, b2, 2000, 400 + k);
    CHECK_FALSE(witness.found);
    CHECK(witness.samples_used == 2000);
  }
}

TEST_CASE("coarse one-dimensional quantiser admits a collision") {
  Eigen::MatrixXd phi(1, 1);
  phi << 1.0;
  embedding::QuantisedMap map(phi, vec({0.5}), 10.0);
  geometry::Ball b1(vec({0.0}), 1.0), b2(vec({3.0}), 1.0);
  auto witness = certificates::collision_search(map, b1, b2, 500, 17);
  REQUIRE(witness.found);
  CHECK((witness.x1 - b1.center).norm() <= b1.radius + 1e-12);
  CHECK((witness.x2 - b2.center).norm() <= b2.radius + 1e-12);
  CHECK(embedding::apply(map, witness.x1) ==
        embedding::apply(map, witness.x2));
  CHECK(witness.samples_used >= 1);
  CHECK(witness.samples_used <= 500);

  auto again = certificates::collision_search(map, b1, b2, 500, 17);
  CHECK(again.found);
  CHECK(again.x1 == witness.x1);
  CHECK(again.x2 == witness.x2);

  CHECK_THROWS_AS(certificates::collision_search(map, b1, b2, 0, 17),
                  std::invalid_argument);
}
