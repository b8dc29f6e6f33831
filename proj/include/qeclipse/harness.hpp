#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qeclipse/certificates.hpp"
#include "qeclipse/geometry.hpp"
#include "qeclipse/solvers.hpp"

namespace qeclipse::harness {

struct GridSpec {
  std::int64_t n = 64;
  std::vector<std::int64_t> m_values;   // strictly increasing
  std::vector<double> sigma_values;     // strictly increasing separations
  std::vector<double> delta_values;     // strictly increasing
  double r = 2.0;                       // summed radius of the two balls
  std::int64_t trials = 128;
  std::uint64_t master_seed = 1;
  std::uint64_t direction_seed = 1;     // one center direction per grid
  double level = 0.9;                   // phase-transition threshold
};

// CI-scale and full-scale grids (powers of two throughout).
GridSpec desk_profile();
GridSpec paper_profile();

struct Scene {
  geometry::Ball c1, c2;
};

// Two balls of radius r/2 with separation exactly sigma: one at the origin,
// the other at -(sigma + r) * u for a unit u drawn from direction_seed.
Scene scene_from_sigma(std::int64_t n, double sigma, double r,
                       std::uint64_t direction_seed);

struct ResultRow {
  std::int64_t n, m;
  double sigma, delta, r;
  std::int64_t trials;
  std::uint64_t master_seed;
  double p_bar_hat, p_bbar_hat, p_lin_hat;
  double se_bar, se_bbar, se_lin;
  std::int64_t excluded_trials;
};

// One row per (m, sigma, delta) in lexicographic order. Margins are solved
// once per (m, sigma, trial) and reused across the delta sweep.
std::vector<ResultRow> compute_grid(const GridSpec& spec,
                                    const solvers::SolverConfig& cfg = {},
                                    int threads = 1);

// compute_grid + write_csv.
std::vector<ResultRow> run_grid(const GridSpec& spec,
                                const solvers::SolverConfig& cfg,
                                const std::string& out_csv_path,
                                int threads = 1);

void write_csv(const std::vector<ResultRow>& rows, const std::string& path);

enum class Estimator { pbar, pbbar, plin };

struct PhasePoint {
  double sigma;
  std::optional<std::int64_t> m_star;  // absent: level never reached
};

struct PhaseCurve {
  double delta;
  double level;
  std::vector<PhasePoint> points;  // sigma ascending
};

// Smallest grid m whose estimate reaches `level`, per sigma, for one delta.
// No interpolation. Requires a complete (m, sigma) grid for that delta.
PhaseCurve extract_phase_curve(const std::vector<ResultRow>& rows,
                               double delta, double level,
                               Estimator which = Estimator::pbbar);

// Deterministic SVG heat map for one delta: log2(1/sigma^2) across,
// log2(m/n) up, one rect per cell colored by p_bbar_hat, optional phase
// curve overlaid as a polyline.
void render_heatmap(const std::vector<ResultRow>& rows, double delta,
                    const PhaseCurve* curve, const std::string& path);

}  // namespace qeclipse::harness
