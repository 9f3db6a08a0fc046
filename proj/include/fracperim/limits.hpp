#pragma once

#include "fracperim/geometry.hpp"
#include "fracperim/integration.hpp"
#include "fracperim/kernels.hpp"
#include "fracperim/momentbody.hpp"

#include <optional>
#include <vector>

namespace fracperim {

/// Affine fit of s * y against (1 - s) on the three largest grid points. For
/// E = (0, 1) the exact values y = 2/s make the fit exact.
struct Extrapolation {
  double limit = 0.0;
  /// Propagated standard errors plus the largest fit residual.
  double error = 0.0;
  /// Limit from the two largest grid points only.
  double refit_limit = 0.0;
  double max_residual = 0.0;
};

Extrapolation extrapolate_limit(const std::vector<double>& s, const std::vector<double>& y,
                                const std::vector<double>& sigma);

struct SweepResult {
  std::vector<double> s_grid;
  std::vector<EstimateResult> estimates;
  /// (1 - s) times the estimate and its standard error.
  std::vector<double> rescaled;
  std::vector<double> rescaled_error;
  double extrapolated_limit = 0.0;
  double extrapolation_error = 0.0;
  double refit_limit = 0.0;
  double target = 0.0;
  /// Relative tolerance of the verdict.
  double tolerance = 0.0;
  bool passed = false;
};

struct SweepOptions {
  /// Sweep P1 instead of the full perimeter.
  bool p1_only = false;
  /// Defaults to 1e-6 for the exact engine and 2% otherwise.
  std::optional<double> tolerance;
  /// Defaults to the anisotropic perimeter with the moment norm of the limit gauge.
  std::optional<double> target;
  MomentEngineSpec moment;
};

/// (1 - s) P_{k_s}(E, D) over the grid, extrapolated to s = 1 and compared with
/// the anisotropic perimeter. Passes when |limit - target| <= max(tol |target|, 3 err).
SweepResult sweep(const SetRegion& e, const Domain& d, const KernelFamily& fam, const std::vector<double>& s_grid,
                  const EngineSpec& spec, const SweepOptions& options = {});

/// Sweep of (1 - s) P1(H, Q) for H = {x_n <= 0} and the unit cube Q; the target
/// is the moment norm of e_n. Default tolerance 3% for sampled engines.
SweepResult halfspace_cube_limit(const KernelFamily& fam, const std::vector<double>& s_grid, const EngineSpec& spec,
                                 const SweepOptions& options = {});

struct BoundaryTermReport {
  std::vector<double> s_grid;
  std::vector<double> values;  // (1 - s) I(H n Q, H^c n Q^c)
  std::vector<double> errors;
  bool decreasing = false;
  double final_ratio = 0.0;  // last value over first
  bool passed = false;
};

/// Each step must decrease (an increase within 3 combined standard errors is
/// tolerated for sampled engines) and the last value must be at most 10% of the first.
BoundaryTermReport boundary_term_vanishing(const KernelFamily& fam, const std::vector<double>& s_grid,
                                           const EngineSpec& spec);

struct StripReport {
  double s = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double rescaled_p1 = 0.0;  // (1 - s) P1(H, strip)
  double rescaled_error = 0.0;
  double classical = 0.0;  // P(H, strip)
  double ratio = 0.0;
  double ratio_error = 0.0;
  /// Calibrated C(n) and the asserted bound 1.5 C(n), when a calibration was supplied.
  std::optional<double> constant;
  std::optional<double> bound;
  bool passed = false;
};

/// (1 - s) P1(H, Q_{d1,d2}) against the classical perimeter of H in the strip.
/// An empty strip reports zeros and passes.
StripReport strip_energy_bound(const KernelFamily& fam, double s, double d1, double d2, const EngineSpec& spec,
                               std::optional<double> calibrated_constant = std::nullopt);

/// C(n) from a halfspace-cube sweep: the largest of the rescaled values and the
/// extrapolated limit, divided by P(H, Q) = 1.
double calibrate_strip_constant(const SweepResult& halfspace_cube);

}  // namespace fracperim
