#include "qeclipse/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>
#include <string>

#include "qeclipse/errors.hpp"
#include "qeclipse/rng.hpp"

namespace qeclipse::harness {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

std::string fmt(double x) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string fmt(std::int64_t x) { return std::to_string(x); }
std::string fmt(std::uint64_t x) { return std::to_string(x); }

void check_spec(const GridSpec& spec) {
  require(spec.n >= 1, "GridSpec: need n >= 1");
  require(std::isfinite(spec.r) && spec.r > 0.0, "GridSpec: r must be > 0");
  require(spec.trials >= 1, "GridSpec: need trials >= 1");
  require(spec.level > 0.0 && spec.level < 1.0,
          "GridSpec: level must lie in (0, 1)");
  require(!spec.m_values.empty(), "GridSpec: empty m list");
  require(!spec.sigma_values.empty(), "GridSpec: empty sigma list");
  require(!spec.delta_values.empty(), "GridSpec: empty delta list");
  for (size_t i = 0; i < spec.m_values.size(); ++i) {
    require(spec.m_values[i] >= 1, "GridSpec: m values must be >= 1");
    require(i == 0 || spec.m_values[i] > spec.m_values[i - 1],
            "GridSpec: m list must be strictly increasing");
  }
  auto check_list = [&](const std::vector<double>& v, const char* what) {
    for (size_t i = 0; i < v.size(); ++i) {
      require(std::isfinite(v[i]) && v[i] > 0.0, what);
      require(i == 0 || v[i] > v[i - 1], what);
    }
  };
  check_list(spec.sigma_values,
             "GridSpec: sigma list must be positive, strictly increasing");
  check_list(spec.delta_values,
             "GridSpec: delta list must be positive, strictly increasing");
}

std::vector<std::int64_t> pow2_list(int from, int to) {
  std::vector<std::int64_t> v;
  for (int k = from; k <= to; ++k) v.push_back(std::int64_t{1} << k);
  return v;
}

std::vector<double> pow2_list_d(int from, int to) {
  std::vector<double> v;
  for (int k = from; k <= to; ++k) v.push_back(std::ldexp(1.0, k));
  return v;
}

// Rows for one delta, validated as a complete m x sigma grid.
struct GridView {
  std::vector<double> sigmas;        // ascending
  std::vector<std::int64_t> ms;      // ascending
  // est(which)[is][im]
  std::vector<std::vector<const ResultRow*>> cells;
};

GridView view_for_delta(const std::vector<ResultRow>& rows, double delta) {
  std::set<double> sig_set;
  std::set<std::int64_t> m_set;
  for (const ResultRow& r : rows) {
    if (r.delta == delta) {
      sig_set.insert(r.sigma);
      m_set.insert(r.m);
    }
  }
  require(!sig_set.empty(), "no rows for the requested delta");
  GridView v;
  v.sigmas.assign(sig_set.begin(), sig_set.end());
  v.ms.assign(m_set.begin(), m_set.end());
  v.cells.assign(v.sigmas.size(),
                 std::vector<const ResultRow*>(v.ms.size(), nullptr));
  for (const ResultRow& r : rows) {
    if (r.delta != delta) continue;
    size_t is = static_cast<size_t>(
        std::lower_bound(v.sigmas.begin(), v.sigmas.end(), r.sigma) -
        v.sigmas.begin());
    size_t im = static_cast<size_t>(
        std::lower_bound(v.ms.begin(), v.ms.end(), r.m) - v.ms.begin());
    require(v.cells[is][im] == nullptr, "duplicate (m, sigma) row");
    v.cells[is][im] = &r;
  }
  for (const auto& col : v.cells)
    for (const ResultRow* p : col)
      require(p != nullptr, "ragged grid: missing (m, sigma) cell");
  return v;
}

double pick(const ResultRow& r, Estimator which) {
  switch (which) {
    case Estimator::pbar: return r.p_bar_hat;
    case Estimator::pbbar: return r.p_bbar_hat;
    default: return r.p_lin_hat;
  }
}

void write_text_file(const std::string& body, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw IoError("cannot open " + path);
  size_t written = std::fwrite(body.data(), 1, body.size(), f);
  int rc = std::fclose(f);
  if (written != body.size() || rc != 0)
    throw IoError("short write on " + path);
}

}  // namespace

GridSpec desk_profile() {
  GridSpec spec;
  spec.n = 32;
  spec.m_values = pow2_list(0, 5);
  spec.sigma_values = pow2_list_d(0, 7);
  spec.delta_values = pow2_list_d(0, 5);
  spec.r = 2.0;
  spec.trials = 64;
  return spec;
}

GridSpec paper_profile() {
  GridSpec spec;
  spec.n = 64;
  spec.m_values = pow2_list(0, 6);
  spec.sigma_values = pow2_list_d(0, 9);
  spec.delta_values = pow2_list_d(0, 9);
  spec.r = 2.0;
  spec.trials = 128;
  return spec;
}

Scene scene_from_sigma(std::int64_t n, double sigma, double r,
                       std::uint64_t direction_seed) {
  require(n >= 1, "scene_from_sigma: need n >= 1");
  require(std::isfinite(sigma) && sigma > 0.0,
          "scene_from_sigma: sigma must be > 0");
  require(std::isfinite(r) && r > 0.0, "scene_from_sigma: r must be > 0");
  rng::Engine eng(direction_seed);
  Eigen::VectorXd u(n);
  double nu = 0.0;
  while (nu == 0.0) {
    for (std::int64_t i = 0; i < n; ++i) u[i] = eng.normal();
    nu = u.norm();
  }
  u /= nu;
  geometry::Ball c1(Eigen::VectorXd::Zero(n), r / 2.0);
  geometry::Ball c2(-(sigma + r) * u, r / 2.0);
  return Scene{std::move(c1), std::move(c2)};
}

std::vector<ResultRow> compute_grid(const GridSpec& spec,
                                    const solvers::SolverConfig& cfg,
                                    int threads) {
  check_spec(spec);
  std::vector<ResultRow> rows;
  rows.reserve(spec.m_values.size() * spec.sigma_values.size() *
               spec.delta_values.size());

  for (size_t im = 0; im < spec.m_values.size(); ++im) {
    std::int64_t m = spec.m_values[im];
    for (size_t is = 0; is < spec.sigma_values.size(); ++is) {
      double sigma = spec.sigma_values[is];
      Scene scene =
          scene_from_sigma(spec.n, sigma, spec.r, spec.direction_seed);
      geometry::DifferenceBall d = geometry::difference_set(scene.c1, scene.c2);

      std::uint64_t cell_index =
          static_cast<std::uint64_t>(im) * spec.sigma_values.size() + is;
      std::uint64_t cell_seed = rng::derive_seed(spec.master_seed, cell_index);
      std::vector<certificates::TrialCore> cores =
          certificates::run_trials(d, m, spec.trials, cell_seed, cfg, threads);

      std::int64_t excluded = 0;
      for (const auto& core : cores)
        if (!core.converged) ++excluded;
      if (static_cast<double>(excluded) >
          0.05 * static_cast<double>(spec.trials))
        throw SolverBudgetError(
            "compute_grid: cell m=" + std::to_string(m) +
            " sigma=" + fmt(sigma) + ": " + std::to_string(excluded) + " of " +
            std::to_string(spec.trials) + " trials failed to converge");

      for (double delta : spec.delta_values) {
        certificates::ProbabilityEstimates est =
            certificates::aggregate_for_delta(cores, delta);
        ResultRow row;
        row.n = spec.n;
        row.m = m;
        row.sigma = sigma;
        row.delta = delta;
        row.r = spec.r;
        row.trials = spec.trials;
        row.master_seed = spec.master_seed;
        row.p_bar_hat = est.p_bar_hat;
        row.p_bbar_hat = est.p_bbar_hat;
        row.p_lin_hat = est.p_lin_hat;
        row.se_bar = est.se_bar;
        row.se_bbar = est.se_bbar;
        row.se_lin = est.se_lin;
        row.excluded_trials = est.excluded;
        rows.push_back(row);
      }
    }
  }
  return rows;
}

std::vector<ResultRow> run_grid(const GridSpec& spec,
                                const solvers::SolverConfig& cfg,
                                const std::string& out_csv_path, int threads) {
  std::vector<ResultRow> rows = compute_grid(spec, cfg, threads);
  write_csv(rows, out_csv_path);
  return rows;
}

void write_csv(const std::vector<ResultRow>& rows, const std::string& path) {
  std::string body =
      "n,m,sigma,delta,r,trials,master_seed,p_bar_hat,p_bbar_hat,p_lin_hat,"
      "se_bar,se_bbar,se_lin,excluded_trials\n";
  for (const ResultRow& r : rows) {
    body += fmt(r.n) + ',' + fmt(r.m) + ',' + fmt(r.sigma) + ',' +
            fmt(r.delta) + ',' + fmt(r.r) + ',' + fmt(r.trials) + ',' +
            fmt(r.master_seed) + ',' + fmt(r.p_bar_hat) + ',' +
            fmt(r.p_bbar_hat) + ',' + fmt(r.p_lin_hat) + ',' + fmt(r.se_bar) +
            ',' + fmt(r.se_bbar) + ',' + fmt(r.se_lin) + ',' +
            fmt(r.excluded_trials) + '\n';
  }
  write_text_file(body, path);
}

PhaseCurve extract_phase_curve(const std::vector<ResultRow>& rows, double delta,
                               double level, Estimator which) {
  require(level > 0.0 && level < 1.0, "extract_phase_curve: bad level");
  GridView v = view_for_delta(rows, delta);
  PhaseCurve curve;
  curve.delta = delta;
  curve.level = level;
  for (size_t is = 0; is < v.sigmas.size(); ++is) {
    PhasePoint pt;
    pt.sigma = v.sigmas[is];
    for (size_t im = 0; im < v.ms.size(); ++im) {
      if (pick(*v.cells[is][im], which) >= level) {
        pt.m_star = v.ms[im];
        break;
      }
    }
    curve.points.push_back(pt);
  }
  return curve;
}

void render_heatmap(const std::vector<ResultRow>& rows, double delta,
                    const PhaseCurve* curve, const std::string& path) {
  GridView v = view_for_delta(rows, delta);
  const std::int64_t n = v.cells[0][0]->n;

  const int cw = 54, ch = 34;
  const int left = 78, top = 42, bottom = 52, right = 24;
  const int ncol = static_cast<int>(v.sigmas.size());
  const int nrow = static_cast<int>(v.ms.size());
  const int width = left + ncol * cw + right;
  const int height = top + nrow * ch + bottom;

  // probability 0 -> deep blue, 1 -> sand yellow, linear per channel
  auto color = [](double p) {
    p = std::clamp(p, 0.0, 1.0);
    const int lo[3] = {18, 44, 92}, hi[3] = {246, 214, 68};
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x",
                  static_cast<int>(std::lround(lo[0] + p * (hi[0] - lo[0]))),
                  static_cast<int>(std::lround(lo[1] + p * (hi[1] - lo[1]))),
                  static_cast<int>(std::lround(lo[2] + p * (hi[2] - lo[2]))));
    return std::string(buf);
  };

  auto cell_x = [&](size_t is) { return left + static_cast<int>(is) * cw; };
  // m ascending bottom -> top
  auto cell_y = [&](size_t im) {
    return top + (nrow - 1 - static_cast<int>(im)) * ch;
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(width) + "\" height=\"" + std::to_string(height) +
         "\" viewBox=\"0 0 " + std::to_string(width) + " " +
         std::to_string(height) + "\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(width) +
         "\" height=\"" + std::to_string(height) + "\" fill=\"#ffffff\"/>\n";
  svg += "<text x=\"" + std::to_string(left) +
         "\" y=\"24\" font-family=\"monospace\" font-size=\"15\">"
         "p_bbar estimate, delta = " +
         fmt(delta) + "</text>\n";

  for (size_t is = 0; is < v.sigmas.size(); ++is) {
    for (size_t im = 0; im < v.ms.size(); ++im) {
      const ResultRow& r = *v.cells[is][im];
      svg += "<rect x=\"" + std::to_string(cell_x(is)) + "\" y=\"" +
             std::to_string(cell_y(im)) + "\" width=\"" + std::to_string(cw) +
             "\" height=\"" + std::to_string(ch) + "\" fill=\"" +
             color(r.p_bbar_hat) + "\"/>\n";
    }
  }

  // axis ticks: log2(1/sigma^2) across, log2(m/n) up
  for (size_t is = 0; is < v.sigmas.size(); ++is) {
    double lx = -2.0 * std::log2(v.sigmas[is]);
    svg += "<text x=\"" + std::to_string(cell_x(is) + cw / 2) + "\" y=\"" +
           std::to_string(top + nrow * ch + 18) +
           "\" font-family=\"monospace\" font-size=\"11\" "
           "text-anchor=\"middle\">" +
           fmt(lx) + "</text>\n";
  }
  for (size_t im = 0; im < v.ms.size(); ++im) {
    double ly = std::log2(static_cast<double>(v.ms[im]) /
                          static_cast<double>(n));
    svg += "<text x=\"" + std::to_string(left - 8) + "\" y=\"" +
           std::to_string(cell_y(im) + ch / 2 + 4) +
           "\" font-family=\"monospace\" font-size=\"11\" "
           "text-anchor=\"end\">" +
           fmt(ly) + "</text>\n";
  }
  svg += "<text x=\"" + std::to_string(left + (ncol * cw) / 2) + "\" y=\"" +
         std::to_string(height - 14) +
         "\" font-family=\"monospace\" font-size=\"13\" "
         "text-anchor=\"middle\">log2(1/sigma^2)</text>\n";
  svg += "<text x=\"16\" y=\"" + std::to_string(top - 8) +
         "\" font-family=\"monospace\" font-size=\"13\">log2(m/n)</text>\n";

  if (curve != nullptr) {
    std::string pts;
    for (const PhasePoint& pt : curve->points) {
      if (!pt.m_star) continue;
      auto is = static_cast<size_t>(
          std::lower_bound(v.sigmas.begin(), v.sigmas.end(), pt.sigma) -
          v.sigmas.begin());
      require(is < v.sigmas.size() && v.sigmas[is] == pt.sigma,
              "render_heatmap: curve sigma not on the grid");
      auto im = static_cast<size_t>(
          std::lower_bound(v.ms.begin(), v.ms.end(), *pt.m_star) -
          v.ms.begin());
      require(im < v.ms.size() && v.ms[im] == *pt.m_star,
              "render_heatmap: curve m not on the grid");
      if (!pts.empty()) pts += ' ';
      pts += std::to_string(cell_x(is) + cw / 2) + ',' +
             std::to_string(cell_y(im) + ch / 2);
    }
    if (!pts.empty())
      svg += "<polyline points=\"" + pts +
             "\" fill=\"none\" stroke=\"#e2453c\" stroke-width=\"2.5\"/>\n";
  }

  svg += "</svg>\n";
  write_text_file(svg, path);
}

}  // namespace qeclipse::harness
