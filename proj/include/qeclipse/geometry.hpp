#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace qeclipse::geometry {

// Euclidean ball, radius strictly positive.
struct Ball {
  Eigen::VectorXd center;
  double radius;

  Ball(Eigen::VectorXd center_, double radius_);
  std::int64_t dim() const { return center.size(); }
};

// Minkowski difference C1 - C2 of two disjoint balls: a ball of radius
// r = r1 + r2 around c = c1 - c2, with ||c||_2 > r. Everything downstream
// (margins, widths, separability) is a statement about this one set.
struct DifferenceBall {
  Eigen::VectorXd c;
  double r;

  DifferenceBall(Eigen::VectorXd c_, double r_);
  std::int64_t dim() const { return c.size(); }
  double center_norm() const { return c.norm(); }
};

// Half-angle of the spherical cap cut out by the directions of the
// difference ball: sin(theta) = r / ||c||_2, theta in (0, pi/2).
struct CapAngle {
  double theta;
};

DifferenceBall difference_set(const Ball& c1, const Ball& c2);

// ||c||_2 - r, strictly positive for disjoint inputs.
double separation(const DifferenceBall& d);

CapAngle cap_half_angle(const DifferenceBall& d);

// One width sample: sup_{x in S} |g . x| where S is the unit-sphere cap of
// directions of the difference ball. Closed form via the angle between g
// and the cap axis. Rejects g = 0.
double width_sample(const Eigen::VectorXd& g, const DifferenceBall& d);

struct WidthEstimate {
  double estimate;
  double se;  // sample std / sqrt(samples)
  std::int64_t samples;
};

// Monte Carlo Gaussian mean width of the cap, deterministic per seed.
WidthEstimate mean_width_estimate(const DifferenceBall& d, std::int64_t samples,
                                  std::uint64_t seed);

}  // namespace qeclipse::geometry
