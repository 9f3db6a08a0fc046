#pragma once

#include "fracperim/expression.hpp"
#include "fracperim/linalg.hpp"
#include "fracperim/polytope.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace fracperim {

/// Positively 1-homogeneous, origin-symmetric gauge comparable to the Euclidean
/// norm: ||v|| / tau <= |v| <= tau ||v||.
struct QuasiNorm {
  int dim = 0;
  std::function<double(const Vec&)> gauge;
  double tau = 1.0;
  std::string label;
  /// Unit ball {|x| <= 1} when it is a polytope; lets exact engines skip quadrature.
  std::optional<Polytope> body;

  double operator()(const Vec& v) const { return gauge(v); }
  bool is_euclidean() const { return label == "euclidean"; }
};

QuasiNorm euclidean_norm(int dim);
/// l^p norm, 1 <= p <= inf (pass infinity for the max norm).
QuasiNorm lp_norm(int dim, double p);

/// Minkowski gauge of an origin-symmetric polytope {x : a_i . x <= b_i}.
/// Throws std::invalid_argument when the body is not symmetric under negation or
/// does not contain the origin in its interior.
QuasiNorm quasi_norm_from_convex_body(int dim, const std::vector<Halfspace>& halfspaces);
/// Same, from the vertices of the body (dimension 1 or 2).
QuasiNorm quasi_norm_from_vertices(int dim, const std::vector<Vec>& vertices);

/// |v| = ||v|| * profile(v / ||v||) for a profile given on the unit sphere. Tau
/// is estimated on a deterministic sphere sample unless given.
QuasiNorm quasi_norm_from_expression(const Expression& profile, std::optional<double> tau = std::nullopt);

/// z -> g(z)^{-(n+s)}. Evaluation at z = 0 throws std::domain_error.
std::function<double(const Vec&)> kernel_from_gauge(const QuasiNorm& g, double s);

/// Recovers |z| = k(z)^{-1/(n+s)}. Throws std::invalid_argument when k is not
/// positive and finite on the check sample.
QuasiNorm gauge_from_kernel(std::function<double(const Vec&)> k, int dim, double s);

/// Map s -> |.|_{k_s}, its limit gauge and the declared comparability constant.
class KernelFamily {
 public:
  using GaugeFn = std::function<double(double s, const Vec& z)>;

  /// s-independent family k_s = |z|^{-(n+s)}; c defaults to tau^{n+1}.
  static KernelFamily from_gauge(QuasiNorm limit, std::optional<double> c = std::nullopt);
  /// |z|_{k_s} = (1 - w) |z| + w ||z|| with w = drift * (1 - s), a family that
  /// moves with s and converges to `limit`. Requires 0 <= drift <= 1.
  static KernelFamily drifting(QuasiNorm limit, double drift, std::optional<double> c = std::nullopt);
  /// Fully general family; used by tests to inject faults.
  static KernelFamily custom(int dim, GaugeFn gauge_at, QuasiNorm limit, double c, std::string label);

  int dim() const { return dim_; }
  double c() const { return c_; }
  const QuasiNorm& limit_gauge() const { return limit_; }
  const std::string& label() const { return label_; }
  /// True when gauge_at(s) does not depend on s.
  bool s_independent() const { return s_independent_; }

  double gauge(double s, const Vec& z) const { return gauge_at_(s, z); }
  QuasiNorm gauge_at(double s) const;
  /// k_s(z); throws std::domain_error at z = 0.
  double kernel(double s, const Vec& z) const;
  /// k_s at a unit direction; equals the line weight of the slicing formula.
  double direction_weight(double s, const Vec& u) const { return std::pow(gauge_at_(s, u), -(dim_ + s)); }

 private:
  int dim_ = 0;
  GaugeFn gauge_at_;
  QuasiNorm limit_;
  double c_ = 1.0;
  std::string label_;
  bool s_independent_ = false;
};

struct ValidationReport {
  double symmetry_violation = 0.0;
  double homogeneity_violation = 0.0;
  double empirical_c = 1.0;
  double declared_c = 1.0;
  /// max relative gap |gauge_at(s) - limit| / limit at s = 1 - 1e-6.
  double limit_gap = 0.0;
  bool passed = false;
  /// Names of violated hypotheses: "h.0", "h.1", "h.2", "limit".
  std::vector<std::string> failures;
};

/// Checks symmetry, homogeneity at lambda in {0.5, 2, 10} and comparability on
/// the product grid s_samples x z_samples.
ValidationReport validate_hypotheses(const KernelFamily& fam, const std::vector<double>& s_samples,
                                     const std::vector<Vec>& z_samples, double tol);

/// Deterministic check sample: Fibonacci directions times radii {0.5, 1, 3}.
std::vector<Vec> default_check_points(int dim, int directions = 64);

}  // namespace fracperim
