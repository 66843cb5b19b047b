#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <vector>
#include <random>

#include "koopman/types.hpp"

namespace test_support {

inline koopman::Matrix gaussian(std::mt19937_64& rng, Eigen::Index rows,
                                Eigen::Index cols) {
  std::normal_distribution<double> g(0.0, 1.0);
  koopman::Matrix M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = g(rng);
  return M;
}

inline koopman::Matrix uniform(std::mt19937_64& rng, Eigen::Index rows,
                               Eigen::Index cols, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  koopman::Matrix M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = u(rng);
  return M;
}

inline koopman::Matrix random_orthogonal(std::mt19937_64& rng, Eigen::Index n) {
  Eigen::HouseholderQR<koopman::Matrix> qr(gaussian(rng, n, n));
  return qr.householderQ() * koopman::Matrix::Identity(n, n);
}

/// Square matrix with condition number exactly `cond` (log-spaced singular
/// values between 1 and 1/cond, random orthogonal factors).
inline koopman::Matrix conditioned_matrix(std::mt19937_64& rng, Eigen::Index n,
                                          double cond) {
  koopman::Matrix U = random_orthogonal(rng, n);
  koopman::Matrix V = random_orthogonal(rng, n);
  koopman::Vector s(n);
  for (Eigen::Index i = 0; i < n; ++i)
    s(i) = n > 1 ? std::pow(cond, -static_cast<double>(i) / (n - 1)) : 1.0;
  return U * s.asDiagonal() * V.transpose();
}

inline koopman::ComplexVector random_complex_unit(std::mt19937_64& rng,
                                                  Eigen::Index n) {
  std::normal_distribution<double> g(0.0, 1.0);
  koopman::ComplexVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = {g(rng), g(rng)};
  v /= v.norm();
  return v;
}

}  // namespace test_support

namespace test_support {

/// Greedy nearest-neighbour matching distance between two complex multisets;
/// adequate when the point spacing is far above the tolerance under test.
inline double multiset_match_distance(std::vector<std::complex<double>> a,
                                      std::vector<std::complex<double>> b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (const auto& p : a) {
    std::size_t jbest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < b.size(); ++j) {
      const double dist = std::abs(p - b[j]);
      if (dist < best) {
        best = dist;
        jbest = j;
      }
    }
    worst = std::max(worst, best);
    b.erase(b.begin() + static_cast<std::ptrdiff_t>(jbest));
  }
  return worst;
}

inline std::vector<std::complex<double>> to_std(const koopman::ComplexVector& v) {
  return {v.data(), v.data() + v.size()};
}

}  // namespace test_support
