#pragma once

#include <cstdint>
#include <limits>

#include "qeclipse/geometry.hpp"

namespace qeclipse::bounds {

struct BoundConfig {
  double c1 = 1.0;  // absolute constant in the unquantised bound
  double c2 = 1.0;  // absolute constant in the quantised bound
  std::int64_t max_fixed_point_iters = 100;
  // Optional cap on the ratio r*m/(delta*n) inside the log term; keeps
  // regime-comparison studies away from the delta -> 0 divergence. Off by
  // default.
  double log_arg_cap = std::numeric_limits<double>::infinity();
};

// Unquantised sample complexity: ceil(c1 * ((w + sqrt(2 ln(1/eta)))^2 + 1)).
std::int64_t prop1_m(double w, double eta, const BoundConfig& cfg = {});

// Quantised sample complexity: least fixed point of
//   m -> ceil(c2 * (w^2 + n d^2/s^2) * (1 + ln(1 + r m/(d n)) + ln(1/eta)/w^2))
// iterated from m = 1 (the map is nondecreasing, so the iteration climbs
// monotonically to the smallest self-consistent m). Throws when it has not
// become stationary within max_fixed_point_iters.
std::int64_t prop2_m(double w, std::int64_t n, double delta, double sigma,
                     double r, double eta, const BoundConfig& cfg = {});

// (r / ||c||_2) * sqrt(n), the closed-form cap width bound.
double ball_width_bound(const geometry::DifferenceBall& d);

}  // namespace qeclipse::bounds
