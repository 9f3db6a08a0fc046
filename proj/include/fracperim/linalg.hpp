#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <initializer_list>
#include <numbers>
#include <vector>

namespace fracperim {

/// Largest ambient dimension supported anywhere in the library.
inline constexpr int kMaxDim = 8;

/// Small dynamic vector with inline storage; never touches the heap.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;

inline Vec make_vec(std::initializer_list<double> values) {
  Vec v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

inline Vec make_vec(const std::vector<double>& values) {
  Vec v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v[static_cast<Eigen::Index>(i)] = values[i];
  return v;
}

inline Vec unit_vec(int dim, int axis) {
  Vec v = Vec::Zero(dim);
  v[axis] = 1.0;
  return v;
}

/// Volume of the unit ball in R^n (omega_n).
inline double unit_ball_volume(int n) {
  return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

/// Surface measure of S^{n-1}; equals 2 for n = 1 (counting measure on {-1, 1}).
inline double unit_sphere_area(int n) { return n * unit_ball_volume(n); }

/// Deterministic, nearly uniform directions on S^{n-1}. For n = 2 the points are
/// equally spaced angles, for n = 3 a Fibonacci spiral, for n = 1 alternating +-1.
std::vector<Vec> fibonacci_directions(int dim, int count);

}  // namespace fracperim
