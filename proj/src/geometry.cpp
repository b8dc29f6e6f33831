#include "qeclipse/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qeclipse/rng.hpp"

namespace qeclipse::geometry {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

Ball::Ball(Eigen::VectorXd center_, double radius_)
    : center(std::move(center_)), radius(radius_) {
  require(center.size() >= 1, "Ball: empty center");
  require(center.allFinite(), "Ball: non-finite center");
  require(std::isfinite(radius) && radius > 0.0, "Ball: radius must be > 0");
}

DifferenceBall::DifferenceBall(Eigen::VectorXd c_, double r_)
    : c(std::move(c_)), r(r_) {
  require(c.size() >= 1, "DifferenceBall: empty center");
  require(c.allFinite(), "DifferenceBall: non-finite center");
  require(std::isfinite(r) && r > 0.0, "DifferenceBall: radius must be > 0");
  // ||c|| = r (touching balls) is rejected along with overlap: the margin
  // and width machinery needs a strictly positive separation.
  require(c.norm() > r, "DifferenceBall: need ||c||_2 > r (disjoint sets)");
}

DifferenceBall difference_set(const Ball& c1, const Ball& c2) {
  require(c1.dim() == c2.dim(), "difference_set: dimension mismatch");
  return DifferenceBall(c1.center - c2.center, c1.radius + c2.radius);
}

double separation(const DifferenceBall& d) { return d.center_norm() - d.r; }

CapAngle cap_half_angle(const DifferenceBall& d) {
  return CapAngle{std::asin(d.r / d.center_norm())};
}

double width_sample(const Eigen::VectorXd& g, const DifferenceBall& d) {
  require(g.size() == d.dim(), "width_sample: dimension mismatch");
  double gn = g.norm();
  require(gn > 0.0 && g.allFinite(), "width_sample: g must be nonzero");

  double theta = cap_half_angle(d).theta;
  double ca = g.dot(d.c) / (gn * d.center_norm());
  ca = std::clamp(ca, -1.0, 1.0);
  double alpha = std::acos(ca);

  // sup over the cap of g.x is ||g|| cos(angular distance from g to the cap);
  // take the better of g and -g for the absolute value.
  auto side = [&](double ang) {
    return gn * std::cos(std::clamp(ang - theta, 0.0, 3.141592653589793238462643));
  };
  return std::max(side(alpha), side(3.141592653589793238462643 - alpha));
}

WidthEstimate mean_width_estimate(const DifferenceBall& d, std::int64_t samples,
                                  std::uint64_t seed) {
  require(samples >= 2, "mean_width_estimate: need samples >= 2");
  rng::Engine eng(seed);
  Eigen::VectorXd g(d.dim());
  double sum = 0.0, sumsq = 0.0;
  for (std::int64_t k = 0; k < samples; ++k) {
    for (std::int64_t i = 0; i < d.dim(); ++i) g[i] = eng.normal();
    double w = width_sample(g, d);
    sum += w;
    sumsq += w * w;
  }
  double mean = sum / static_cast<double>(samples);
  double var = (sumsq - sum * mean) / static_cast<double>(samples - 1);
  double se = std::sqrt(std::max(var, 0.0) / static_cast<double>(samples));
  return WidthEstimate{mean, se, samples};
}

}  // namespace qeclipse::geometry
