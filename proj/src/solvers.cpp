#include "qeclipse/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qeclipse::solvers {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

void check_config(const SolverConfig& cfg) {
  require(std::isfinite(cfg.eps_abs) && cfg.eps_abs > 0.0,
          "SolverConfig: eps_abs must be > 0");
  require(std::isfinite(cfg.eps_rel) && cfg.eps_rel >= 0.0,
          "SolverConfig: eps_rel must be >= 0");
  require(cfg.max_iter >= 1, "SolverConfig: max_iter must be >= 1");
}

// Spectral norm by power iteration on K^T K; slightly inflated so the step
// product stays below 1/||K||^2 even with estimation error.
double operator_norm_bound(const Eigen::MatrixXd& k) {
  double fro = k.norm();
  if (fro == 0.0) return 0.0;
  Eigen::VectorXd v = Eigen::VectorXd::Ones(k.cols());
  v /= v.norm();
  Eigen::VectorXd w;
  double est = 0.0;
  for (int it = 0; it < 80; ++it) {
    w.noalias() = k * v;
    v.noalias() = k.transpose() * w;
    double nv = v.norm();
    if (nv == 0.0) return fro;  // v fell in the kernel; fall back
    est = std::sqrt(nv);
    v /= nv;
  }
  return std::min(est * 1.02, fro) + 1e-300;
}

void project_ball(Eigen::VectorXd& z, const Eigen::VectorXd& center,
                  double radius) {
  double dist = (z - center).norm();
  if (dist > radius) z = center + (z - center) * (radius / dist);
}

// Euclidean projection onto the l1 ball of radius 1 (sort-based).
void project_l1_ball(Eigen::VectorXd& v, std::vector<double>& scratch) {
  double s = v.lpNorm<1>();
  if (s <= 1.0) return;
  scratch.resize(static_cast<size_t>(v.size()));
  for (std::int64_t i = 0; i < v.size(); ++i)
    scratch[static_cast<size_t>(i)] = std::abs(v[i]);
  std::sort(scratch.begin(), scratch.end(), std::greater<double>());
  double acc = 0.0, theta = 0.0;
  for (size_t k = 0; k < scratch.size(); ++k) {
    acc += scratch[k];
    double cand = (acc - 1.0) / static_cast<double>(k + 1);
    if (scratch[k] - cand > 0.0)
      theta = cand;
    else
      break;
  }
  for (std::int64_t i = 0; i < v.size(); ++i) {
    double m = std::abs(v[i]) - theta;
    v[i] = m > 0.0 ? (v[i] > 0.0 ? m : -m) : 0.0;
  }
}

// Projection onto {y >= 0, sum y <= 1}.
void project_capped_simplex(Eigen::VectorXd& v, std::vector<double>& scratch) {
  double s = 0.0;
  for (std::int64_t i = 0; i < v.size(); ++i) s += std::max(v[i], 0.0);
  if (s <= 1.0) {
    v = v.cwiseMax(0.0);
    return;
  }
  scratch.assign(v.data(), v.data() + v.size());
  std::sort(scratch.begin(), scratch.end(), std::greater<double>());
  double acc = 0.0, theta = 0.0;
  for (size_t k = 0; k < scratch.size(); ++k) {
    acc += scratch[k];
    double cand = (acc - 1.0) / static_cast<double>(k + 1);
    if (scratch[k] - cand > 0.0)
      theta = cand;
    else
      break;
  }
  for (std::int64_t i = 0; i < v.size(); ++i) v[i] = std::max(v[i] - theta, 0.0);
}

struct NormalisedInstance {
  Eigen::VectorXd chat;  // c / ||c||
  double rhat;           // r / ||c||
  double scale;          // ||c||
};

NormalisedInstance normalise(const geometry::DifferenceBall& d) {
  double s = d.center_norm();
  return NormalisedInstance{d.c / s, d.r / s, s};
}

// ---- sign-split cone subproblem: min q.z over {A z <= 0} n B(chat, rhat) --

struct PieceResult {
  bool feasible = false;
  double value = kInf;     // certified upper value when feasible
  double lower = 0.0;      // certified lower bound (>= 0 by the sign row)
  Eigen::VectorXd z;
  std::int64_t iterations = 0;
  bool converged = false;
};

double max_violation(const Eigen::VectorXd& az) {
  return az.size() == 0 ? 0.0 : std::max(0.0, az.maxCoeff());
}

// Feasibility phase: minimise max(0, max_i a_i.z) over the ball. Rows of A
// are unit-normalised so violations are geometric distances. Decides
// "feasible" as soon as a point with violation <= feas_exit is found, and
// "infeasible" once the dual bound exceeds eps_abs.
struct FeasOutcome {
  bool feasible;
  bool decided;
  Eigen::VectorXd z;
  std::int64_t iterations;
};

FeasOutcome feasibility_phase(const Eigen::MatrixXd& a,
                              const NormalisedInstance& inst,
                              const SolverConfig& cfg, double op_norm,
                              const Eigen::VectorXd& z_init,
                              std::vector<double>& scratch) {
  const double feas_exit = 0.25 * cfg.eps_abs;
  Eigen::VectorXd z = z_init;
  Eigen::VectorXd az = a * z;
  if (max_violation(az) <= feas_exit)
    return FeasOutcome{true, true, std::move(z), 0};

  // Each unit dual vector e_i certifies the bound min over the ball of
  // a_i.z, which rejects clearly empty pieces before any iteration.
  double d_init = (a * inst.chat).maxCoeff() - inst.rhat;
  if (d_init > cfg.eps_abs) return FeasOutcome{false, true, z, 0};

  double step = 0.99 / op_norm;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(a.rows());
  Eigen::VectorXd zbar = z, aty(a.cols()), znew(a.cols());
  Eigen::VectorXd z_best = z;
  double p_best = max_violation(az);
  double d_best = std::max(d_init, 0.0);

  std::int64_t it = 0;
  for (; it < cfg.max_iter; ++it) {
    az.noalias() = a * zbar;
    y += step * az;
    project_capped_simplex(y, scratch);
    aty.noalias() = a.transpose() * y;
    double dual = aty.dot(inst.chat) - inst.rhat * aty.norm();
    d_best = std::max(d_best, dual);
    znew = z - step * aty;
    project_ball(znew, inst.chat, inst.rhat);
    zbar = 2.0 * znew - z;
    z = znew;
    if (d_best > cfg.eps_abs) return FeasOutcome{false, true, z_best, it + 1};
    if ((it & 7) == 0 || it == cfg.max_iter - 1) {
      az.noalias() = a * z;
      double p = max_violation(az);
      if (p < p_best) {
        p_best = p;
        z_best = z;
      }
      if (p_best <= feas_exit) return FeasOutcome{true, true, z_best, it + 1};
      // Gap closed without either exit: the optimum sits between the exit
      // threshold and eps_abs; classify by the best value seen.
      if (p_best - d_best <= 0.05 * cfg.eps_abs)
        return FeasOutcome{p_best <= cfg.eps_abs, true, z_best, it + 1};
    }
  }
  return FeasOutcome{max_violation(Eigen::VectorXd(a * z_best)) <= cfg.eps_abs,
                     false, z_best, it};
}

// The dominance pieces can be thin slivers on which plain primal-dual
// iterations crawl: the dual ranks the binding rows quickly, but the
// iterate takes ages to produce a near-feasible near-optimal point. Both
// sides close at once if we periodically solve the subproblem restricted
// to the face the dual currently points at, which is exact in closed form
// (project onto the span of the top rows, slice the ball, and read the
// multipliers back off the KKT system). Wrong guesses are filtered by a
// feasibility check on the primal side and a residual check on the dual
// side, so every recorded bound stays certified.
void try_face_candidates(const Eigen::MatrixXd& a, const Eigen::VectorXd& q,
                         const NormalisedInstance& inst,
                         const Eigen::VectorXd& y, double feas_tol,
                         double& p_best, Eigen::VectorXd& z_best,
                         double& d_best) {
  std::int64_t rows = a.rows();
  std::vector<std::int64_t> order(static_cast<size_t>(rows));
  for (std::int64_t i = 0; i < rows; ++i) order[static_cast<size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::int64_t i, std::int64_t j) { return y[i] > y[j]; });
  std::int64_t kmax = std::min<std::int64_t>(8, rows);
  Eigen::VectorXd az(rows);
  for (std::int64_t k = 1; k <= kmax; ++k) {
    if (y[order[static_cast<size_t>(k - 1)]] <= 0.0) break;
    Eigen::MatrixXd as(k, a.cols());
    for (std::int64_t i = 0; i < k; ++i)
      as.row(i) = a.row(order[static_cast<size_t>(i)]);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(as.transpose());
    std::int64_t rank = qr.rank();
    if (rank == 0) continue;
    Eigen::MatrixXd basis =
        qr.householderQ() * Eigen::MatrixXd::Identity(a.cols(), rank);
    Eigen::VectorXd cf = inst.chat - basis * (basis.transpose() * inst.chat);
    double rho2 = inst.rhat * inst.rhat - (inst.chat - cf).squaredNorm();
    if (rho2 <= 0.0) continue;  // the face misses the ball
    double rho = std::sqrt(rho2);
    Eigen::VectorXd qf = q - basis * (basis.transpose() * q);
    double qfn = qf.norm();
    Eigen::VectorXd zf = qfn > 0.0 ? Eigen::VectorXd(cf - (rho / qfn) * qf) : cf;
    az.noalias() = a * zf;
    if (max_violation(az) <= feas_tol) {
      double p = q.dot(zf);
      if (p < p_best) {
        p_best = p;
        z_best = zf;
      }
    }
    double nu = qfn / rho;
    Eigen::VectorXd w = -q - nu * (zf - inst.chat);
    Eigen::VectorXd lam = qr.solve(w);
    if ((as.transpose() * lam - w).norm() <= 1e-9 * (1.0 + w.norm())) {
      lam = lam.cwiseMax(0.0);
      Eigen::VectorXd u = q + as.transpose() * lam;
      d_best = std::max(d_best, u.dot(inst.chat) - inst.rhat * u.norm());
    }
  }
}

PieceResult solve_piece(const Eigen::MatrixXd& a, const Eigen::VectorXd& q,
                        const NormalisedInstance& inst, const SolverConfig& cfg,
                        const Eigen::VectorXd& z_init,
                        std::vector<double>& scratch) {
  PieceResult out;
  double op_norm = operator_norm_bound(a);

  if (op_norm == 0.0) {
    // No effective constraints: minimise q.z over the ball directly.
    out.feasible = true;
    out.converged = true;
    double qn = q.norm();
    if (qn == 0.0) {
      out.z = inst.chat;
      out.value = out.lower = 0.0;
    } else {
      out.z = inst.chat - (inst.rhat / qn) * q;
      out.value = std::max(q.dot(out.z), 0.0);
      out.lower = out.value;
    }
    return out;
  }

  FeasOutcome feas =
      feasibility_phase(a, inst, cfg, op_norm, z_init, scratch);
  out.iterations = feas.iterations;
  if (!feas.feasible) {
    out.converged = feas.decided;
    return out;
  }
  out.feasible = true;

  const double feas_tol = cfg.eps_abs;
  const double base = 0.99 / op_norm;
  double omega = 1.0;  // dual over primal step ratio, rebalanced at restarts
  Eigen::VectorXd z = feas.z;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(a.rows());
  Eigen::VectorXd zbar = z, az(a.rows()), grad(a.cols()), znew(a.cols());

  // q.z >= 0 on the feasible set (the sign row is part of A), so 0 is a
  // valid initial lower bound.
  double d_best = 0.0;
  double p_best = kInf;
  Eigen::VectorXd z_best = z;
  az.noalias() = a * z;
  if (max_violation(az) <= feas_tol) {
    p_best = q.dot(z);
    z_best = z;
  }

  // Restarting at the running average turns the tail of the convergence
  // from sublinear into effectively linear on these small problems.
  Eigen::VectorXd z_sum = Eigen::VectorXd::Zero(a.cols());
  Eigen::VectorXd y_sum = Eigen::VectorXd::Zero(a.rows());
  Eigen::VectorXd z_epoch = z, y_epoch = y;
  std::int64_t epoch_len = 0;
  double epoch_gap = kInf;

  std::int64_t it = 0;
  bool converged = false;
  for (; it < cfg.max_iter; ++it) {
    az.noalias() = a * zbar;
    y += (omega * base) * az;
    y = y.cwiseMax(0.0);
    grad.noalias() = a.transpose() * y;
    grad += q;
    double dual = grad.dot(inst.chat) - inst.rhat * grad.norm();
    d_best = std::max(d_best, dual);
    znew = z - (base / omega) * grad;
    project_ball(znew, inst.chat, inst.rhat);
    zbar = 2.0 * znew - z;
    z = znew;
    z_sum += z;
    y_sum += y;
    ++epoch_len;
    if ((it & 7) == 0 || it == cfg.max_iter - 1) {
      az.noalias() = a * z;
      if (max_violation(az) <= feas_tol) {
        double p = q.dot(z);
        if (p < p_best) {
          p_best = p;
          z_best = z;
        }
      }
      if ((it & 63) == 0)
        try_face_candidates(a, q, inst, y, feas_tol, p_best, z_best, d_best);
      if (epoch_len >= 64) {
        Eigen::VectorXd z_avg = z_sum / static_cast<double>(epoch_len);
        Eigen::VectorXd y_avg = y_sum / static_cast<double>(epoch_len);
        az.noalias() = a * z_avg;
        if (max_violation(az) <= feas_tol) {
          double p = q.dot(z_avg);
          if (p < p_best) {
            p_best = p;
            z_best = z_avg;
          }
        }
        grad.noalias() = a.transpose() * y_avg;
        grad += q;
        d_best = std::max(d_best,
                          grad.dot(inst.chat) - inst.rhat * grad.norm());
        double gap = p_best - d_best;
        if (gap <= 0.5 * epoch_gap || epoch_len >= 4096) {
          double dz = (z_avg - z_epoch).norm(), dy = (y_avg - y_epoch).norm();
          if (dz > 1e-14 && dy > 1e-14) {
            double balance = std::sqrt(dy / dz);
            omega = std::clamp(std::sqrt(omega * balance), 0.25 * omega,
                               4.0 * omega);
            omega = std::clamp(omega, 0x1p-10, 0x1p10);
          }
          z = z_avg;
          y = y_avg;
          zbar = z;
          z_epoch = z;
          y_epoch = y;
          z_sum.setZero();
          y_sum.setZero();
          epoch_len = 0;
          epoch_gap = gap;
        }
      }
      if (p_best < kInf &&
          p_best - d_best <= cfg.eps_abs + cfg.eps_rel * std::abs(p_best)) {
        converged = true;
        ++it;
        break;
      }
    }
  }
  out.iterations += it;
  out.converged = converged;
  out.value = std::max(p_best, 0.0);
  out.lower = d_best;
  out.z = z_best;
  return out;
}

// Constraint rows for the sign-split piece of cone j: s*phi_j.z >= 0 and
// |phi_i.z| <= s*phi_j.z for i != j, all as unit-normalised a.z <= 0 rows;
// identically-zero rows are dropped.
Eigen::MatrixXd piece_constraints(const Eigen::MatrixXd& phi, std::int64_t j,
                                  double s) {
  std::int64_t m = phi.rows(), n = phi.cols();
  Eigen::MatrixXd a(2 * m - 1, n);
  std::int64_t row = 0;
  auto push = [&](const Eigen::RowVectorXd& v) {
    double nv = v.norm();
    if (nv > 0.0) a.row(row++) = v / nv;
  };
  push(-s * phi.row(j));
  for (std::int64_t i = 0; i < m; ++i) {
    if (i == j) continue;
    push(phi.row(i) - s * phi.row(j));
    push(-phi.row(i) - s * phi.row(j));
  }
  return a.topRows(row);
}

}  // namespace

MarginResult infinity_margin(const Eigen::MatrixXd& phi,
                             const geometry::DifferenceBall& d,
                             const SolverConfig& cfg) {
  check_config(cfg);
  require(phi.cols() == d.dim(), "infinity_margin: dimension mismatch");
  require(phi.rows() >= 1, "infinity_margin: need at least one row");
  require(phi.allFinite(), "infinity_margin: non-finite matrix");

  NormalisedInstance inst = normalise(d);
  std::int64_t m = phi.rows();

  double op_norm = operator_norm_bound(phi);
  if (op_norm == 0.0) {
    return MarginResult{0.0, 0.0, d.c, 0, true};
  }

  Eigen::VectorXd phi_chat = phi * inst.chat;
  double step = 0.99 / op_norm;

  Eigen::VectorXd z = inst.chat;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd zbar = z, w(m), kty(phi.cols()), znew(phi.cols());
  std::vector<double> scratch;

  double p_best = phi_chat.lpNorm<Eigen::Infinity>();
  Eigen::VectorXd z_best = z;
  double d_best = 0.0;  // the objective is a norm, so 0 is a valid bound

  std::int64_t it = 0;
  bool converged =
      p_best - d_best <= cfg.eps_abs + cfg.eps_rel * std::abs(p_best);
  if (!converged) {
    for (; it < cfg.max_iter; ++it) {
      w.noalias() = phi * zbar;
      y += step * w;
      project_l1_ball(y, scratch);
      kty.noalias() = phi.transpose() * y;
      double dual = y.dot(phi_chat) - inst.rhat * kty.norm();
      d_best = std::max(d_best, dual);
      znew = z - step * kty;
      project_ball(znew, inst.chat, inst.rhat);
      zbar = 2.0 * znew - z;
      z = znew;
      if ((it & 7) == 0 || it == cfg.max_iter - 1) {
        w.noalias() = phi * z;
        double p = w.lpNorm<Eigen::Infinity>();
        if (p < p_best) {
          p_best = p;
          z_best = z;
        }
        if (p_best - d_best <= cfg.eps_abs + cfg.eps_rel * std::abs(p_best)) {
          converged = true;
          ++it;
          break;
        }
      }
    }
  }

  MarginResult res;
  res.tau = p_best * inst.scale;
  res.lower_bound = std::max(d_best, 0.0) * inst.scale;
  res.minimizer = z_best * inst.scale;
  res.iterations = it;
  res.converged = converged;
  return res;
}

ConeMargins cone_margins(const Eigen::MatrixXd& phi,
                         const geometry::DifferenceBall& d,
                         const SolverConfig& cfg) {
  check_config(cfg);
  require(phi.cols() == d.dim(), "cone_margins: dimension mismatch");
  require(phi.rows() >= 1, "cone_margins: need at least one row");
  require(phi.allFinite(), "cone_margins: non-finite matrix");

  NormalisedInstance inst = normalise(d);
  std::int64_t m = phi.rows();
  ConeMargins out;
  out.tau_j.assign(static_cast<size_t>(m), kInf);
  out.iterations = 0;
  out.converged = true;
  std::vector<double> scratch;

  for (std::int64_t j = 0; j < m; ++j) {
    double best = kInf;
    bool piece_converged = true;
    for (double s : {1.0, -1.0}) {
      Eigen::MatrixXd a = piece_constraints(phi, j, s);
      Eigen::VectorXd q = s * phi.row(j).transpose();
      // Warm candidate: the ball point pushed toward the sign of row j;
      // it often sits inside the piece and lets the feasibility phase
      // exit immediately.
      Eigen::VectorXd z0 = inst.chat;
      double qn = q.norm();
      if (qn > 0.0) z0 += (inst.rhat / qn) * q;
      PieceResult piece = solve_piece(a, q, inst, cfg, z0, scratch);
      out.iterations += piece.iterations;
      piece_converged = piece_converged && piece.converged;
      if (piece.feasible) best = std::min(best, piece.value);
    }
    if (best < kInf) out.tau_j[static_cast<size_t>(j)] = best * inst.scale;
    out.converged = out.converged && piece_converged;
  }
  return out;
}

bool linear_eclipse_holds(const Eigen::MatrixXd& phi,
                          const geometry::DifferenceBall& d) {
  require(phi.cols() == d.dim(), "linear_eclipse_holds: dimension mismatch");
  require(phi.rows() >= 1, "linear_eclipse_holds: need at least one row");
  require(phi.allFinite(), "linear_eclipse_holds: non-finite matrix");

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(phi, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return false;
  double cutoff = 1e-10 * sv(0);
  double norm_sq = 0.0;
  for (std::int64_t k = 0; k < sv.size(); ++k) {
    if (sv(k) > cutoff) {
      double t = svd.matrixV().col(k).dot(d.c);
      norm_sq += t * t;
    }
  }
  return std::sqrt(norm_sq) > d.r;
}

}  // namespace qeclipse::solvers
