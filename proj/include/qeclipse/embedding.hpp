#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>

namespace qeclipse::embedding {

using SensingMatrix = Eigen::MatrixXd;   // m x n, iid standard normal entries
using DitherVector = Eigen::VectorXd;    // entries in [0, delta]
using Signature = Eigen::VectorXd;       // quantised image, entries in delta*Z

// (kappa0/m) E||Phi u||_1 = ||u||_2 for Gaussian Phi.
inline const double kKappa0 = std::sqrt(3.141592653589793238462643 / 2.0);

// y = Q_delta(Phi x + xi) with Q_delta(v) = delta * floor(v / delta).
struct QuantisedMap {
  Eigen::MatrixXd phi;
  Eigen::VectorXd dither;
  double delta;

  QuantisedMap(Eigen::MatrixXd phi_, Eigen::VectorXd dither_, double delta_);
  std::int64_t m() const { return phi.rows(); }
  std::int64_t n() const { return phi.cols(); }
};

// Soft inclusion band: thresholds count only when both endpoints clear the
// band by |t|; t < 0 widens instead. Strict inequalities, |t| < delta/2.
struct SoftDistanceParams {
  double t;
  double delta;
};

// Bit-reproducible draws: entries generated row-major from the seed.
SensingMatrix draw_sensing(std::int64_t m, std::int64_t n, std::uint64_t seed);
DitherVector draw_dither(std::int64_t m, double delta, std::uint64_t seed);

Eigen::VectorXd quantise(const Eigen::VectorXd& v, double delta);
Signature apply(const QuantisedMap& map, const Eigen::VectorXd& x);

// (1/m) ||a - b||_1
double l1_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// delta * #(delta*Z intersect [a, b]), closed interval.
double hard_distance(double a, double b, double delta);

// delta * #{k : (a - k*delta, b - k*delta) lands in the t-softened crossing
// region}; reduces to the hard count a.e. at t = 0.
double soft_distance(double a, double b, SoftDistanceParams p);

// (1/m) sum_i soft_distance(a_i, b_i, p)
double soft_l1_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                        SoftDistanceParams p);

// Debug serialisation: two little-endian uint64 dims then row-major doubles.
void save_matrix(const Eigen::MatrixXd& mat, const std::string& path);
Eigen::MatrixXd load_matrix(const std::string& path);

}  // namespace qeclipse::embedding
