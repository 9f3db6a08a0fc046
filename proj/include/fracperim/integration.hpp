#pragma once

#include "fracperim/geometry.hpp"
#include "fracperim/intervals.hpp"
#include "fracperim/kernels.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fracperim {

enum class Engine { Exact1D, Slicing, MonteCarlo };

const char* to_string(Engine e);
std::optional<Engine> engine_from_string(const std::string& name);

struct Decomposition {
  double p1 = 0.0;
  double p2 = 0.0;
  double p1_error = 0.0;
  double p2_error = 0.0;
};

struct EstimateResult {
  double value = 0.0;
  /// Sampling standard error plus any certified truncation bound; 0 for exact engines.
  double std_error = 0.0;
  Engine engine = Engine::Exact1D;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  double s = 0.0;
  std::optional<Decomposition> decomposition;
  /// Bound on the near-diagonal mass skipped by the Monte Carlo engine.
  double truncation_bound = 0.0;
  /// Inner cutoff radius used by the Monte Carlo engine.
  double r_min = 0.0;
};

struct EngineSpec {
  Engine engine = Engine::Slicing;
  std::size_t n_lines = 100000;
  std::size_t n_pairs = 1000000;
  std::uint64_t seed = 1;
  int threads = 1;
  /// Monte Carlo inner cutoff; 0 selects it from a pilot run.
  double r_min = 0.0;
  /// Target ratio of the truncation bound to the estimate for automatic r_min.
  /// The automatic r_min is never below circumradius * (1000 / n_pairs)^{1/s},
  /// so near s = 1 the bound can exceed this target; it is always part of std_error.
  double r_min_target = 1e-3;
  std::size_t chunk_size = 4096;
};

// ---------------------------------------------------------------------------
// Exact one-dimensional formulas

/// Interaction of (a, b) with (c, d), b <= c, for the kernel |t|^{-1-s}:
/// [g(c-a) - g(c-b) - g(d-a) + g(d-b)] / (s (1 - s)), g(t) = t^{1-s}. Infinite
/// endpoints drop the terms that cancel in the limit.
double pair_interaction(const Interval& left, const Interval& right, double s);

/// Sum of pair_interaction over component pairs of disjoint sets. Pairs with
/// `a` to the left of `b` get weight w_left (kernel at negative arguments),
/// the others w_right.
double interaction_1d(const Intervals1D& a, const Intervals1D& b, double s, double w_left = 1.0,
                      double w_right = 1.0);

/// P_s(E, D) in one dimension with the exact pair formula; the kernel of `fam`
/// enters through its values at +-1 (Euclidean when fam is null).
EstimateResult perimeter_1d_exact(const Intervals1D& e, double s, const Domain& d,
                                  const KernelFamily* fam = nullptr);

// ---------------------------------------------------------------------------
// Line slicing

/// Uniform lines meeting a ball: direction uniform on S^{n-1}, base point
/// uniform in the (n-1)-disk of u-perp. The A(n,1) measure of these lines with
/// the 1/2 normalization is measure().
class LineMeasureSampler {
 public:
  LineMeasureSampler(int dim, Vec center, double radius);
  int dim() const { return dim_; }
  double measure() const;
  /// Returns (direction, base point).
  std::pair<Vec, Vec> sample(Rng& rng) const;

 private:
  int dim_;
  Vec center_;
  double radius_;
};

/// Estimates I(A_j, B_j) for several pairs and several s on the same lines.
/// Each pair's first set must be bounded. Result[si][j].
std::vector<std::vector<EstimateResult>> slicing_pairs(const std::vector<std::pair<SetRegion, SetRegion>>& pairs,
                                                       const KernelFamily& fam, const std::vector<double>& s_list,
                                                       const EngineSpec& spec,
                                                       const std::vector<std::vector<double>>& combos = {});

EstimateResult locality_defect_slicing(const SetRegion& a, const SetRegion& b, const KernelFamily& fam, double s,
                                       const EngineSpec& spec);

// ---------------------------------------------------------------------------
// Direct Monte Carlo

/// Importance-sampled I(A, B) with x uniform in A and y = x + r theta, r drawn
/// with density proportional to r^{-1-s} on [r_min, inf). A must be bounded.
EstimateResult locality_defect_mc(const SetRegion& a, const SetRegion& b, const KernelFamily& fam, double s,
                                  const EngineSpec& spec);

// ---------------------------------------------------------------------------
// Perimeters

/// P = P1 + P2 with the decomposition filled in; P2 = 0 for the whole space.
EstimateResult perimeter_full(const SetRegion& e, const Domain& d, const KernelFamily& fam, double s,
                              const EngineSpec& spec);

/// Same for several s. The slicing engine evaluates all s on common lines.
std::vector<EstimateResult> perimeter_full_multi(const SetRegion& e, const Domain& d, const KernelFamily& fam,
                                                 const std::vector<double>& s_list, const EngineSpec& spec);

/// P1 only: I(E inside D, E^c inside D), for several s.
std::vector<EstimateResult> perimeter_p1_multi(const SetRegion& e, const Domain& d, const KernelFamily& fam,
                                               const std::vector<double>& s_list, const EngineSpec& spec);

/// I(A, B) for several s with the requested engine.
std::vector<EstimateResult> locality_defect_multi(const SetRegion& a, const SetRegion& b, const KernelFamily& fam,
                                                  const std::vector<double>& s_list, const EngineSpec& spec);

struct AdditivityReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double discrepancy = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

/// P1(E, O1 u O2) = P1(E, O1) + P1(E, O2) + I(E n O1, E^c n O2) + I(E n O2, E^c n O1)
/// for disjoint O1, O2 (O2 may be empty).
AdditivityReport additivity_defect_check(const SetRegion& e, const SetRegion& o1, const SetRegion& o2,
                                         const KernelFamily& fam, double s, const EngineSpec& spec);

/// Piecewise-constant function on R: value on each interval, 0 elsewhere.
struct PiecewiseConstant {
  std::vector<std::pair<Interval, double>> pieces;
};

struct CoareaReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double relative_discrepancy = 0.0;
  bool passed = false;
};

/// 1/2 [u]_{W^{s,1}} against the integral over t of P_s({u > t}, R), both exact.
CoareaReport coarea_check_1d(const PiecewiseConstant& u, double s);

}  // namespace fracperim
