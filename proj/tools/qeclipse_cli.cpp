#include <CLI11.hpp>

#include <Eigen/Dense>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "qeclipse/bounds.hpp"
#include "qeclipse/certificates.hpp"
#include "qeclipse/embedding.hpp"
#include "qeclipse/errors.hpp"
#include "qeclipse/geometry.hpp"
#include "qeclipse/harness.hpp"
#include "qeclipse/rng.hpp"
#include "qeclipse/solvers.hpp"

using namespace qeclipse;

namespace {

std::string fmt(double x) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

struct SolverFlags {
  solvers::SolverConfig cfg;

  void attach(CLI::App* sub) {
    sub->add_option("--eps-abs", cfg.eps_abs, "absolute gap tolerance");
    sub->add_option("--eps-rel", cfg.eps_rel, "relative gap tolerance");
    sub->add_option("--max-iter", cfg.max_iter, "iteration budget per solve");
  }
};

void write_text_file(const std::string& body, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw IoError("cannot open " + path);
  size_t written = std::fwrite(body.data(), 1, body.size(), f);
  int rc = std::fclose(f);
  if (written != body.size() || rc != 0) throw IoError("short write on " + path);
}

// CLI11 only consults config files attached to the root command, so each
// subcommand takes a plain path and the key=value pairs are pushed through
// the option machinery here.  Values from the file never shadow flags that
// were given on the command line, and they bump count() so downstream
// profile defaults see them as explicit.
void apply_config(CLI::App& sub, const std::string& path) {
  if (path.empty()) return;
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path);
  auto blank = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view v(line);
    while (!v.empty() && blank(v.front())) v.remove_prefix(1);
    while (!v.empty() && blank(v.back())) v.remove_suffix(1);
    if (v.empty() || v.front() == '#' || v.front() == ';') continue;
    std::size_t eq = v.find('=');
    if (eq == std::string_view::npos)
      throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                  ": expected key=value");
    std::string_view key = v.substr(0, eq);
    std::string_view val = v.substr(eq + 1);
    while (!key.empty() && blank(key.back())) key.remove_suffix(1);
    while (!val.empty() && blank(val.front())) val.remove_prefix(1);
    if (val.size() >= 2 &&
        ((val.front() == '"' && val.back() == '"') ||
         (val.front() == '\'' && val.back() == '\''))) {
      val.remove_prefix(1);
      val.remove_suffix(1);
    }
    if (key.empty())
      throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                  ": empty key");
    CLI::Option* op = sub.get_option_no_throw("--" + std::string(key));
    if (op == nullptr)
      throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                  ": unknown key '" + std::string(key) + "'");
    if (op->count() > 0) continue;
    op->add_result(std::string(val));
    op->run_callback();
  }
}

// ---- margins ----------------------------------------------------------------

struct MarginsArgs {
  std::int64_t n = 8;
  std::vector<std::int64_t> m_list = {4};
  std::vector<double> sigma_list = {4.0};
  std::vector<double> delta_list = {1.0};
  double r = 2.0;
  std::uint64_t seed = 1;
  std::uint64_t direction_seed = 1;
  std::string out;
  SolverFlags solver;
};

int run_margins(const MarginsArgs& a) {
  if (a.m_list.size() != 1 || a.sigma_list.size() != 1)
    throw std::invalid_argument(
        "margins solves one instance: pass exactly one m and one sigma");
  std::int64_t m = a.m_list[0];
  double sigma = a.sigma_list[0];
  harness::Scene scene =
      harness::scene_from_sigma(a.n, sigma, a.r, a.direction_seed);
  geometry::DifferenceBall d = geometry::difference_set(scene.c1, scene.c2);
  certificates::TrialCore core =
      certificates::run_trial(d, m, a.seed, a.solver.cfg);
  if (!core.converged)
    throw SolverBudgetError("margins: solve did not converge; raise --max-iter");

  if (!a.out.empty()) {
    std::string body =
        "n,m,sigma,r,seed,tau,tau_lower,linear,delta,pbar,pbarbar\n";
    for (double delta : a.delta_list) {
      auto o = certificates::outcome_for_delta(core, 0, delta);
      body += std::to_string(a.n) + ',' + std::to_string(m) + ',' +
              fmt(sigma) + ',' + fmt(a.r) + ',' + std::to_string(a.seed) +
              ',' + fmt(core.tau) + ',' + fmt(core.tau_lower) + ',' +
              fmt(o.linear) + ',' + fmt(delta) + ',' + fmt(o.pbar) + ',' +
              fmt(o.pbarbar) + '\n';
    }
    write_text_file(body, a.out);
    return 0;
  }

  std::printf("n=%lld m=%lld sigma=%s r=%s seed=%llu\n",
              static_cast<long long>(a.n), static_cast<long long>(m),
              fmt(sigma).c_str(), fmt(a.r).c_str(),
              static_cast<unsigned long long>(a.seed));
  std::printf("tau=%s (lower bound %s)\n", fmt(core.tau).c_str(),
              fmt(core.tau_lower).c_str());
  std::string taus;
  for (double tj : core.tau_j) {
    if (!taus.empty()) taus += ' ';
    taus += std::isinf(tj) ? "inf" : fmt(tj);
  }
  std::printf("tau_j: %s\n", taus.c_str());
  std::printf("linear_separable: %s\n", core.linear ? "yes" : "no");
  for (double delta : a.delta_list) {
    auto o = certificates::outcome_for_delta(core, 0, delta);
    std::printf("delta=%s pbar=%s pbarbar=%s\n", fmt(delta).c_str(),
                fmt(o.pbar).c_str(), fmt(o.pbarbar).c_str());
  }
  return 0;
}

// ---- phase ------------------------------------------------------------------

struct PhaseArgs {
  harness::GridSpec spec;
  std::string out = "phase.csv";
  std::string svg;
  int threads = 1;
  SolverFlags solver;
};

int run_phase(const PhaseArgs& a) {
  std::vector<harness::ResultRow> rows =
      harness::run_grid(a.spec, a.solver.cfg, a.out, a.threads);
  std::printf("wrote %zu rows to %s\n", rows.size(), a.out.c_str());
  for (double delta : a.spec.delta_values) {
    harness::PhaseCurve curve =
        harness::extract_phase_curve(rows, delta, a.spec.level);
    for (const auto& pt : curve.points) {
      if (pt.m_star)
        std::printf("delta=%s sigma=%s m_star=%lld\n", fmt(delta).c_str(),
                    fmt(pt.sigma).c_str(), static_cast<long long>(*pt.m_star));
      else
        std::printf("delta=%s sigma=%s m_star=none\n", fmt(delta).c_str(),
                    fmt(pt.sigma).c_str());
    }
  }
  if (!a.svg.empty()) {
    double delta = a.spec.delta_values.front();
    harness::PhaseCurve curve =
        harness::extract_phase_curve(rows, delta, a.spec.level);
    harness::render_heatmap(rows, delta, &curve, a.svg);
    std::printf("wrote heat map for delta=%s to %s\n", fmt(delta).c_str(),
                a.svg.c_str());
  }
  return 0;
}

// ---- widths -----------------------------------------------------------------

struct WidthArgs {
  std::int64_t n = 64;
  std::vector<double> sigma_list = {4.0};
  double r = 2.0;
  std::int64_t trials = 4096;  // width samples
  std::uint64_t seed = 1;
  std::uint64_t direction_seed = 1;
};

int run_widths(const WidthArgs& a) {
  for (double sigma : a.sigma_list) {
    harness::Scene scene =
        harness::scene_from_sigma(a.n, sigma, a.r, a.direction_seed);
    geometry::DifferenceBall d = geometry::difference_set(scene.c1, scene.c2);
    geometry::WidthEstimate w =
        geometry::mean_width_estimate(d, a.trials, a.seed);
    std::printf("sigma=%s width=%s se=%s samples=%lld bound=%s\n",
                fmt(sigma).c_str(), fmt(w.estimate).c_str(),
                fmt(w.se).c_str(), static_cast<long long>(w.samples),
                fmt(bounds::ball_width_bound(d)).c_str());
  }
  return 0;
}

// ---- bound ------------------------------------------------------------------

struct BoundArgs {
  std::int64_t n = 64;
  std::vector<double> sigma_list = {4.0};
  std::vector<double> delta_list = {1.0};
  double r = 2.0;
  double level = 0.9;
  std::int64_t trials = 4096;  // width samples feeding the formulas
  std::uint64_t seed = 1;
  std::uint64_t direction_seed = 1;
  bounds::BoundConfig cfg;
};

int run_bound(const BoundArgs& a) {
  if (a.level <= 0.0 || a.level >= 1.0)
    throw std::invalid_argument("bound: level must lie in (0, 1)");
  double eta = 1.0 - a.level;
  for (double sigma : a.sigma_list) {
    harness::Scene scene =
        harness::scene_from_sigma(a.n, sigma, a.r, a.direction_seed);
    geometry::DifferenceBall d = geometry::difference_set(scene.c1, scene.c2);
    geometry::WidthEstimate w =
        geometry::mean_width_estimate(d, a.trials, a.seed);
    const char* flag =
        w.estimate < 0.1 ? " [w<0.1: the eta term dominates artificially]" : "";
    std::printf("sigma=%s w=%s%s m_linear=%lld\n", fmt(sigma).c_str(),
                fmt(w.estimate).c_str(), flag,
                static_cast<long long>(bounds::prop1_m(w.estimate, eta, a.cfg)));
    for (double delta : a.delta_list) {
      std::int64_t m = bounds::prop2_m(w.estimate, a.n, delta, sigma, a.r, eta,
                                       a.cfg);
      std::printf("sigma=%s delta=%s m_quantised=%lld\n", fmt(sigma).c_str(),
                  fmt(delta).c_str(), static_cast<long long>(m));
    }
  }
  return 0;
}

// ---- distcheck --------------------------------------------------------------

struct DistArgs {
  std::uint64_t seed = 1;
  std::int64_t trials = 256;
};

struct CheckReport {
  int failures = 0;

  void note(bool ok, const char* name, const std::string& detail = "") {
    if (ok) {
      std::printf("ok   %s%s%s\n", name, detail.empty() ? "" : " ",
                  detail.c_str());
    } else {
      ++failures;
      std::printf("FAIL %s%s%s\n", name, detail.empty() ? "" : " ",
                  detail.c_str());
    }
  }
};

double scan_hard(double a, double b, double delta) {
  // independent threshold count, same contract as the library call
  double lo = std::min(a, b), hi = std::max(a, b);
  std::int64_t count = 0;
  for (std::int64_t k = static_cast<std::int64_t>(std::floor(lo / delta)) - 2;
       k <= static_cast<std::int64_t>(std::ceil(hi / delta)) + 2; ++k) {
    double thr = delta * static_cast<double>(k);
    if (thr >= lo && thr <= hi) ++count;
  }
  return delta * static_cast<double>(count);
}

double scan_soft(double a, double b, double t, double delta) {
  double lo = std::min(a, b) - std::abs(t) - 2.0 * delta;
  double hi = std::max(a, b) + std::abs(t) + 2.0 * delta;
  std::int64_t count = 0;
  for (std::int64_t k = static_cast<std::int64_t>(std::floor(lo / delta));
       k <= static_cast<std::int64_t>(std::ceil(hi / delta)); ++k) {
    double u = a - delta * static_cast<double>(k);
    double v = b - delta * static_cast<double>(k);
    bool fwd = u < -t && v > t;
    bool bwd = u > t && v < -t;
    if (fwd || bwd) ++count;
  }
  return delta * static_cast<double>(count);
}

int run_distcheck(const DistArgs& a) {
  CheckReport rep;
  rng::Engine eng(a.seed);

  {
    bool ok = embedding::quantise(Eigen::VectorXd::Constant(1, 0.5), 1.0)[0] ==
                  0.0 &&
              embedding::quantise(Eigen::VectorXd::Constant(1, -0.1), 1.0)[0] ==
                  -1.0 &&
              embedding::quantise(Eigen::VectorXd::Constant(1, 3.7), 2.0)[0] ==
                  2.0;
    rep.note(ok, "quantiser floor convention");
  }

  {
    bool ok = true;
    for (std::int64_t k = 0; ok && k < 40 * a.trials; ++k) {
      double delta = 0.25 + 2.0 * eng.uniform01();
      double x = 10.0 * (eng.uniform01() - 0.5);
      double y = 10.0 * (eng.uniform01() - 0.5);
      ok = std::abs(embedding::hard_distance(x, y, delta) -
                    scan_hard(x, y, delta)) < 1e-9;
    }
    rep.note(ok, "hard distance threshold count");
  }

  {
    bool ok = true;
    for (std::int64_t k = 0; ok && k < 40 * a.trials; ++k) {
      double delta = 0.25 + 2.0 * eng.uniform01();
      double t = (eng.uniform01() - 0.5) * 0.98 * delta;
      double x = 8.0 * (eng.uniform01() - 0.5);
      double y = 8.0 * (eng.uniform01() - 0.5);
      ok = std::abs(embedding::soft_distance(x, y, {t, delta}) -
                    scan_soft(x, y, t, delta)) < 1e-9;
    }
    rep.note(ok, "soft distance region count");
  }

  {
    bool ok = true;
    for (std::int64_t k = 0; ok && k < 4 * a.trials; ++k) {
      double delta = 0.5 + eng.uniform01();
      double x = 6.0 * (eng.uniform01() - 0.5);
      double y = 6.0 * (eng.uniform01() - 0.5);
      double prev = -1.0;
      for (double t = 0.45; t >= -0.46; t -= 0.05) {
        double d = embedding::soft_distance(x, y, {t * delta, delta});
        if (prev >= 0.0 && d < prev) ok = false;
        prev = d;
      }
    }
    rep.note(ok, "soft distance monotone in t");
  }

  {
    const double delta = 1.0;
    const std::int64_t draws = 20000;
    bool ok = true;
    std::string detail;
    for (double gap : {0.57, 2.13, 4.96}) {
      double base = 0.3;
      auto xi = embedding::draw_dither(draws, delta, eng.bits());
      double sum = 0.0, sumsq = 0.0;
      for (std::int64_t k = 0; k < draws; ++k) {
        Eigen::VectorXd v(2);
        v << base + xi[k], base + gap + xi[k];
        auto q = embedding::quantise(v, delta);
        double x = std::abs(q[0] - q[1]);
        sum += x;
        sumsq += x * x;
      }
      double mean = sum / draws;
      double var = (sumsq - sum * mean) / (draws - 1);
      double se = std::sqrt(std::max(var, 0.0) / draws);
      if (std::abs(mean - gap) > 4.0 * se + 1e-12) {
        ok = false;
        detail = "gap " + fmt(gap) + " mean " + fmt(mean);
      }
    }
    rep.note(ok, "dithered quantisation unbiased", detail);
  }

  {
    auto phi = embedding::draw_sensing(3, 4, eng.bits());
    double delta = 2.0;
    embedding::QuantisedMap map(phi, embedding::draw_dither(3, delta, eng.bits()),
                                delta);
    std::int64_t collisions = 0;
    bool ok = true;
    for (std::int64_t k = 0; k < 20 * a.trials; ++k) {
      Eigen::VectorXd x1(4), x2(4);
      for (int i = 0; i < 4; ++i) x1[i] = eng.normal();
      for (int i = 0; i < 4; ++i) x2[i] = x1[i] + 0.05 * eng.normal();
      if (embedding::apply(map, x1) == embedding::apply(map, x2)) {
        ++collisions;
        if ((phi * (x1 - x2)).cwiseAbs().maxCoeff() >= delta) ok = false;
      }
    }
    ok = ok && collisions > 0;
    rep.note(ok, "consistency implication",
             "(" + std::to_string(collisions) + " collisions)");
  }

  {
    auto phi = embedding::draw_sensing(2000, 64, eng.bits());
    bool ok = true;
    for (int k = 0; ok && k < 100; ++k) {
      Eigen::VectorXd u(64);
      for (int i = 0; i < 64; ++i) u[i] = eng.normal();
      u.normalize();
      double val = embedding::kKappa0 / 2000.0 * (phi * u).lpNorm<1>();
      ok = val > 0.9 && val < 1.1;
    }
    rep.note(ok, "l1 image norm concentration");
  }

  {
    const std::int64_t m = 2000;
    const double delta = 1.5;
    Eigen::VectorXd va(m), vb(m);
    for (std::int64_t i = 0; i < m; ++i) va[i] = 4.0 * eng.normal();
    for (std::int64_t i = 0; i < m; ++i) vb[i] = va[i] + 2.5 * eng.normal();
    double raw = embedding::l1_distance(va, vb);
    bool ok = true;
    for (int k = 0; ok && k < 100; ++k) {
      auto xi = embedding::draw_dither(m, delta, eng.bits());
      double q = embedding::l1_distance(embedding::quantise(va + xi, delta),
                                        embedding::quantise(vb + xi, delta));
      ok = std::abs(q - raw) <= 0.1 * delta;
    }
    rep.note(ok, "signature distance tracks raw distance");
  }

  {
    const double P = 10.0;
    bool ok = true;
    for (std::int64_t inst = 0; ok && inst < 2 * a.trials; ++inst) {
      std::int64_t m = 2 + static_cast<std::int64_t>(eng.uniform01() * 8.0);
      double delta = 0.5 + 1.5 * eng.uniform01();
      double rho = 0.01 * static_cast<double>(m) * delta;
      double shift = rho * P / static_cast<double>(m);
      double t = (eng.uniform01() - 0.5) * 0.7 * delta;
      double band = 8.0 * (delta / P + rho / static_cast<double>(m));
      Eigen::VectorXd va(m), vb(m), ea(m), eb(m);
      for (std::int64_t i = 0; i < m; ++i) va[i] = 5.0 * eng.normal();
      for (std::int64_t i = 0; i < m; ++i) vb[i] = va[i] + 2.0 * eng.normal();
      for (std::int64_t i = 0; i < m; ++i) ea[i] = eng.normal();
      for (std::int64_t i = 0; i < m; ++i) eb[i] = eng.normal();
      ea *= rho * eng.uniform01() / ea.lpNorm<1>();
      eb *= rho * eng.uniform01() / eb.lpNorm<1>();
      double base = embedding::soft_l1_distance(va, vb, {t, delta});
      double widened =
          embedding::soft_l1_distance(va + ea, vb + eb, {t + shift, delta});
      double narrowed =
          embedding::soft_l1_distance(va + ea, vb + eb, {t - shift, delta});
      ok = base >= widened - band && base <= narrowed + band;
    }
    rep.note(ok, "soft distance perturbation bands");
  }

  std::printf("%s: %d failure(s)\n", rep.failures == 0 ? "PASS" : "FAIL",
              rep.failures);
  return rep.failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quantised eclipse experiments"};
  app.require_subcommand(1);

  MarginsArgs margins;
  std::string margins_config;
  CLI::App* sub_margins =
      app.add_subcommand("margins", "margins and indicators for one instance");
  sub_margins->add_option("--config", margins_config,
                          "read key=value defaults from this file");
  sub_margins->add_option("--n", margins.n, "ambient dimension");
  sub_margins->add_option("--m-list", margins.m_list, "rows (single value)")
      ->delimiter(',');
  sub_margins
      ->add_option("--sigma-list", margins.sigma_list,
                   "separation (single value)")
      ->delimiter(',');
  sub_margins->add_option("--delta-list", margins.delta_list, "bin widths")
      ->delimiter(',');
  sub_margins->add_option("--r", margins.r, "summed radius");
  sub_margins->add_option("--seed", margins.seed, "sensing draw seed");
  sub_margins->add_option("--direction-seed", margins.direction_seed,
                          "center direction seed");
  sub_margins->add_option("--out", margins.out, "write CSV here instead");
  margins.solver.attach(sub_margins);

  PhaseArgs phase;
  std::string profile = "desk";
  std::int64_t ph_n = 0, ph_trials = 0;
  std::vector<std::int64_t> ph_m;
  std::vector<double> ph_sigma, ph_delta;
  double ph_r = 0.0, ph_level = 0.0;
  std::uint64_t ph_seed = 0, ph_dir = 0;
  std::string phase_config;
  CLI::App* sub_phase =
      app.add_subcommand("phase", "estimate grid, curves, optional heat map");
  sub_phase->add_option("--config", phase_config,
                        "read key=value defaults from this file");
  sub_phase->add_option("--profile", profile, "grid preset")
      ->check(CLI::IsMember({"desk", "paper"}));
  CLI::Option* o_n = sub_phase->add_option("--n", ph_n, "ambient dimension");
  CLI::Option* o_m =
      sub_phase->add_option("--m-list", ph_m, "rows")->delimiter(',');
  CLI::Option* o_sigma =
      sub_phase->add_option("--sigma-list", ph_sigma, "separations")
          ->delimiter(',');
  CLI::Option* o_delta =
      sub_phase->add_option("--delta-list", ph_delta, "bin widths")
          ->delimiter(',');
  CLI::Option* o_r = sub_phase->add_option("--r", ph_r, "summed radius");
  CLI::Option* o_trials =
      sub_phase->add_option("--trials", ph_trials, "draws per cell");
  CLI::Option* o_seed =
      sub_phase->add_option("--seed", ph_seed, "master seed");
  CLI::Option* o_dir = sub_phase->add_option("--direction-seed", ph_dir,
                                             "center direction seed");
  CLI::Option* o_level =
      sub_phase->add_option("--level", ph_level, "phase threshold");
  sub_phase->add_option("--out", phase.out, "CSV path");
  sub_phase->add_option("--svg", phase.svg,
                        "heat map path (smallest delta)");
  sub_phase->add_option("--threads", phase.threads, "worker threads");
  phase.solver.attach(sub_phase);

  WidthArgs widths;
  std::string widths_config;
  CLI::App* sub_widths =
      app.add_subcommand("widths", "cap width estimates against the bound");
  sub_widths->add_option("--config", widths_config,
                         "read key=value defaults from this file");
  sub_widths->add_option("--n", widths.n, "ambient dimension");
  sub_widths->add_option("--sigma-list", widths.sigma_list, "separations")
      ->delimiter(',');
  sub_widths->add_option("--r", widths.r, "summed radius");
  sub_widths->add_option("--trials", widths.trials, "width samples");
  sub_widths->add_option("--seed", widths.seed, "sampling seed");
  sub_widths->add_option("--direction-seed", widths.direction_seed,
                         "center direction seed");

  BoundArgs bound;
  std::string bound_config;
  CLI::App* sub_bound =
      app.add_subcommand("bound", "sample-size formulas at a success level");
  sub_bound->add_option("--config", bound_config,
                        "read key=value defaults from this file");
  sub_bound->add_option("--n", bound.n, "ambient dimension");
  sub_bound->add_option("--sigma-list", bound.sigma_list, "separations")
      ->delimiter(',');
  sub_bound->add_option("--delta-list", bound.delta_list, "bin widths")
      ->delimiter(',');
  sub_bound->add_option("--r", bound.r, "summed radius");
  sub_bound->add_option("--level", bound.level, "target success probability");
  sub_bound->add_option("--trials", bound.trials, "width samples");
  sub_bound->add_option("--seed", bound.seed, "sampling seed");
  sub_bound->add_option("--direction-seed", bound.direction_seed,
                        "center direction seed");
  sub_bound->add_option("--c1", bound.cfg.c1, "linear bound constant");
  sub_bound->add_option("--c2", bound.cfg.c2, "quantised bound constant");

  DistArgs dist;
  std::string dist_config;
  CLI::App* sub_dist =
      app.add_subcommand("distcheck", "distance and embedding self-checks");
  sub_dist->add_option("--config", dist_config,
                       "read key=value defaults from this file");
  sub_dist->add_option("--seed", dist.seed, "battery seed");
  sub_dist->add_option("--trials", dist.trials, "battery size multiplier");

  try {
    app.parse(argc, argv);

    if (sub_margins->parsed()) {
      apply_config(*sub_margins, margins_config);
      return run_margins(margins);
    }
    if (sub_phase->parsed()) {
      apply_config(*sub_phase, phase_config);
      phase.spec = (profile == "paper") ? harness::paper_profile()
                                        : harness::desk_profile();
      if (o_n->count()) phase.spec.n = ph_n;
      if (o_m->count()) phase.spec.m_values = ph_m;
      if (o_sigma->count()) phase.spec.sigma_values = ph_sigma;
      if (o_delta->count()) phase.spec.delta_values = ph_delta;
      if (o_r->count()) phase.spec.r = ph_r;
      if (o_trials->count()) phase.spec.trials = ph_trials;
      if (o_seed->count()) phase.spec.master_seed = ph_seed;
      if (o_dir->count()) phase.spec.direction_seed = ph_dir;
      if (o_level->count()) phase.spec.level = ph_level;
      return run_phase(phase);
    }
    if (sub_widths->parsed()) {
      apply_config(*sub_widths, widths_config);
      return run_widths(widths);
    }
    if (sub_bound->parsed()) {
      apply_config(*sub_bound, bound_config);
      return run_bound(bound);
    }
    if (sub_dist->parsed()) {
      apply_config(*sub_dist, dist_config);
      return run_distcheck(dist);
    }
    throw std::invalid_argument("no subcommand");
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const SolverBudgetError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
