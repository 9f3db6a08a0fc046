#pragma once

#include "fracperim/geometry.hpp"
#include "fracperim/kernels.hpp"
#include "fracperim/linalg.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace fracperim {

enum class MomentMethod { Exact, Quadrature, MonteCarlo };

const char* to_string(MomentMethod m);

/// Value and error bound of a moment-norm evaluation at a unit vector.
struct MomentValue {
  double value = 0.0;
  double error = 0.0;
};

/// |v|_{Z*B_k} = (n+1)/2 * integral over B_k of |x . v|, with B_k the unit ball
/// of the limit gauge.
///
/// Homogeneity is structural: the stored evaluator only sees unit vectors.
class MomentNorm {
 public:
  using UnitEval = std::function<MomentValue(const Vec& unit)>;

  MomentNorm(int dim, UnitEval unit_eval, MomentMethod method, double accuracy);

  int dim() const { return dim_; }
  MomentMethod method() const { return method_; }
  /// Error bound on unit vectors: absolute, one standard error for Monte Carlo.
  double accuracy() const { return accuracy_; }

  double operator()(const Vec& v) const;
  /// Value with the error bound of this particular evaluation.
  MomentValue evaluate(const Vec& v) const;

 private:
  int dim_;
  UnitEval unit_eval_;
  MomentMethod method_;
  double accuracy_;
};

struct MomentEngineSpec {
  /// Leave unset to pick exact when available, quadrature for n <= 3, Monte
  /// Carlo otherwise.
  std::optional<MomentMethod> method;
  double tolerance = 1e-10;
  std::size_t mc_points = 200000;
  std::uint64_t seed = 1;
};

/// Closed form available: Euclidean gauge (any n), every gauge in 1-D, and
/// polytope unit balls in 2-D and 3-D.
bool has_exact_moment_norm(const QuasiNorm& g);
MomentNorm moment_norm_exact(const QuasiNorm& g);
/// Spherical-radial reduction 1/2 * integral over S^{n-1} of |theta . v| g(theta)^{-(n+1)},
/// adaptive Gauss-Kronrod, n in {1, 2, 3}.
MomentNorm moment_norm_quadrature(const QuasiNorm& g, double tolerance = 1e-10);
/// Fixed sample of uniform points in B_k; the estimate is itself a norm.
MomentNorm moment_norm_montecarlo(const QuasiNorm& g, std::size_t points, std::uint64_t seed);
MomentNorm moment_norm_from_gauge(const QuasiNorm& g, const MomentEngineSpec& spec = {});

/// Integral of m(normal) over the reduced boundary of E inside D.
double anisotropic_perimeter(const SetRegion& e, const Domain& d, const MomentNorm& m);

/// omega_{n-1}, the volume of the unit ball of R^{n-1}.
double isotropic_constant(int n);

struct PolarSupportReport {
  double max_violation = 0.0;
  std::size_t checks = 0;
  bool passed = false;
};

/// Empirical convexity of {m <= 1}: for pairs of unit-level points and
/// t in {0.25, 0.5, 0.75}, m(t u + (1 - t) w) <= 1 + 2 * accuracy.
PolarSupportReport polar_support_check(const MomentNorm& m, const std::vector<Vec>& directions);

}  // namespace fracperim
