#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace evsp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Absolute tolerance used for all feasibility comparisons on time/energy.
inline constexpr double kFeasEps = 1e-6;

using Rng = std::mt19937_64;

// Square dense matrix of doubles, row-major.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

inline bool nearly_equal(double a, double b, double tol = kFeasEps) {
  return std::fabs(a - b) <= tol;
}

}  // namespace evsp
