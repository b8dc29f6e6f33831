#include "qeclipse/bounds.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qeclipse::bounds {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

void check_common(double w, double eta, const BoundConfig& cfg) {
  require(std::isfinite(w) && w > 0.0, "bounds: width must be > 0");
  require(std::isfinite(eta) && eta > 0.0 && eta < 1.0,
          "bounds: eta must lie in (0, 1)");
  require(std::isfinite(cfg.c1) && cfg.c1 > 0.0, "bounds: c1 must be > 0");
  require(std::isfinite(cfg.c2) && cfg.c2 > 0.0, "bounds: c2 must be > 0");
  require(cfg.max_fixed_point_iters >= 1, "bounds: bad iteration cap");
}

}  // namespace

std::int64_t prop1_m(double w, double eta, const BoundConfig& cfg) {
  check_common(w, eta, cfg);
  double root = w + std::sqrt(2.0 * std::log(1.0 / eta));
  return static_cast<std::int64_t>(std::ceil(cfg.c1 * (root * root + 1.0)));
}

std::int64_t prop2_m(double w, std::int64_t n, double delta, double sigma,
                     double r, double eta, const BoundConfig& cfg) {
  check_common(w, eta, cfg);
  require(n >= 1, "prop2_m: need n >= 1");
  require(std::isfinite(delta) && delta > 0.0, "prop2_m: delta must be > 0");
  require(std::isfinite(sigma) && sigma > 0.0, "prop2_m: sigma must be > 0");
  require(std::isfinite(r) && r > 0.0, "prop2_m: r must be > 0");

  const double lead =
      w * w + static_cast<double>(n) * (delta / sigma) * (delta / sigma);
  const double tail = 1.0 + std::log(1.0 / eta) / (w * w);
  auto step = [&](double m) {
    double ratio = r * m / (delta * static_cast<double>(n));
    double val =
        cfg.c2 * lead * (tail + std::log1p(std::min(ratio, cfg.log_arg_cap)));
    return std::ceil(val);
  };

  double m = 1.0;
  for (std::int64_t it = 0; it < cfg.max_fixed_point_iters; ++it) {
    double next = step(m);
    if (!(next < 9.0e15))
      throw std::runtime_error("prop2_m: fixed-point iteration diverged");
    if (next == m) return static_cast<std::int64_t>(m);
    m = next;
  }
  throw std::runtime_error(
      "prop2_m: no fixed point within " +
      std::to_string(cfg.max_fixed_point_iters) + " iterations");
}

double ball_width_bound(const geometry::DifferenceBall& d) {
  return d.r / d.center_norm() * std::sqrt(static_cast<double>(d.dim()));
}

}  // namespace qeclipse::bounds
