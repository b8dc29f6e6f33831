#include "qeclipse/embedding.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <stdexcept>

#include "qeclipse/errors.hpp"
#include "qeclipse/rng.hpp"

namespace qeclipse::embedding {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

void check_delta(double delta) {
  require(std::isfinite(delta) && delta > 0.0, "delta must be > 0");
}

// integers strictly between x and y
double count_open(double x, double y) {
  if (!(y > x)) return 0.0;
  double lo = std::floor(x) + 1.0;  // smallest integer > x
  double hi = std::ceil(y) - 1.0;   // largest integer < y
  return std::max(0.0, hi - lo + 1.0);
}

}  // namespace

QuantisedMap::QuantisedMap(Eigen::MatrixXd phi_, Eigen::VectorXd dither_,
                           double delta_)
    : phi(std::move(phi_)), dither(std::move(dither_)), delta(delta_) {
  check_delta(delta);
  require(phi.rows() >= 1 && phi.cols() >= 1, "QuantisedMap: empty matrix");
  require(dither.size() == phi.rows(), "QuantisedMap: dither length != m");
  require(phi.allFinite() && dither.allFinite(), "QuantisedMap: non-finite");
  for (std::int64_t i = 0; i < dither.size(); ++i)
    require(dither[i] >= 0.0 && dither[i] <= delta,
            "QuantisedMap: dither outside [0, delta]");
}

SensingMatrix draw_sensing(std::int64_t m, std::int64_t n, std::uint64_t seed) {
  require(m >= 1 && n >= 1, "draw_sensing: need m, n >= 1");
  rng::Engine eng(seed);
  SensingMatrix phi(m, n);
  for (std::int64_t i = 0; i < m; ++i)
    for (std::int64_t j = 0; j < n; ++j) phi(i, j) = eng.normal();
  return phi;
}

DitherVector draw_dither(std::int64_t m, double delta, std::uint64_t seed) {
  require(m >= 1, "draw_dither: need m >= 1");
  check_delta(delta);
  rng::Engine eng(seed);
  DitherVector xi(m);
  for (std::int64_t i = 0; i < m; ++i) xi[i] = delta * eng.uniform01();
  return xi;
}

Eigen::VectorXd quantise(const Eigen::VectorXd& v, double delta) {
  check_delta(delta);
  require(v.allFinite(), "quantise: non-finite input");
  return v.unaryExpr([delta](double x) { return delta * std::floor(x / delta); });
}

Signature apply(const QuantisedMap& map, const Eigen::VectorXd& x) {
  require(x.size() == map.n(), "apply: dimension mismatch");
  require(x.allFinite(), "apply: non-finite input");
  Eigen::VectorXd v = map.phi * x + map.dither;
  return quantise(v, map.delta);
}

double l1_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  require(a.size() == b.size() && a.size() >= 1, "l1_distance: size mismatch");
  return (a - b).lpNorm<1>() / static_cast<double>(a.size());
}

double hard_distance(double a, double b, double delta) {
  check_delta(delta);
  require(std::isfinite(a) && std::isfinite(b), "hard_distance: non-finite");
  double lo = std::min(a, b), hi = std::max(a, b);
  double kmin = std::ceil(lo / delta);
  double kmax = std::floor(hi / delta);
  return delta * std::max(0.0, kmax - kmin + 1.0);
}

double soft_distance(double a, double b, SoftDistanceParams p) {
  check_delta(p.delta);
  require(std::isfinite(p.t) && std::abs(p.t) < p.delta / 2.0,
          "soft_distance: need |t| < delta/2");
  require(std::isfinite(a) && std::isfinite(b), "soft_distance: non-finite");
  // Branch 1 asks for a - k*delta < -t and b - k*delta > t, branch 2 swaps
  // the roles. Each is an open interval in k; for t < 0 they can overlap,
  // and a k in both still counts once.
  double d = p.delta, t = p.t;
  double b1 = count_open((a + t) / d, (b - t) / d);
  double b2 = count_open((b + t) / d, (a - t) / d);
  double both = count_open((std::max(a, b) + t) / d, (std::min(a, b) - t) / d);
  return d * (b1 + b2 - both);
}

double soft_l1_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                        SoftDistanceParams p) {
  require(a.size() == b.size() && a.size() >= 1,
          "soft_l1_distance: size mismatch");
  double sum = 0.0;
  for (std::int64_t i = 0; i < a.size(); ++i)
    sum += soft_distance(a[i], b[i], p);
  return sum / static_cast<double>(a.size());
}

void save_matrix(const Eigen::MatrixXd& mat, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw IoError("save_matrix: cannot open " + path);
  auto put_u64 = [&](std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    if (std::fwrite(buf, 1, 8, f) != 8) {
      std::fclose(f);
      throw IoError("save_matrix: short write on " + path);
    }
  };
  put_u64(static_cast<std::uint64_t>(mat.rows()));
  put_u64(static_cast<std::uint64_t>(mat.cols()));
  for (std::int64_t i = 0; i < mat.rows(); ++i)
    for (std::int64_t j = 0; j < mat.cols(); ++j) {
      double x = mat(i, j);
      std::uint64_t bits;
      std::memcpy(&bits, &x, 8);
      put_u64(bits);
    }
  if (std::fclose(f) != 0) throw IoError("save_matrix: close failed on " + path);
}

Eigen::MatrixXd load_matrix(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw IoError("load_matrix: cannot open " + path);
  auto get_u64 = [&](std::uint64_t& v) {
    unsigned char buf[8];
    if (std::fread(buf, 1, 8, f) != 8) {
      std::fclose(f);
      throw IoError("load_matrix: truncated file " + path);
    }
    v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  };
  std::uint64_t rows, cols;
  get_u64(rows);
  get_u64(cols);
  if (rows == 0 || cols == 0 || rows > (1ull << 32) || cols > (1ull << 32)) {
    std::fclose(f);
    throw IoError("load_matrix: implausible dimensions in " + path);
  }
  Eigen::MatrixXd mat(static_cast<std::int64_t>(rows),
                      static_cast<std::int64_t>(cols));
  for (std::int64_t i = 0; i < mat.rows(); ++i)
    for (std::int64_t j = 0; j < mat.cols(); ++j) {
      std::uint64_t bits;
      get_u64(bits);
      double x;
      std::memcpy(&x, &bits, 8);
      mat(i, j) = x;
    }
  std::fclose(f);
  return mat;
}

}  // namespace qeclipse::embedding
