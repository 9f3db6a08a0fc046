#pragma once

#include "fracperim/intervals.hpp"
#include "fracperim/linalg.hpp"
#include "fracperim/polytope.hpp"
#include "fracperim/rng.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fracperim {

/// Axis-aligned box; entries may be infinite.
struct Box {
  Vec lo, hi;

  bool bounded() const;
  bool empty() const;
  Box intersect(const Box& other) const;
  Box hull(const Box& other) const;
  Vec center() const { return 0.5 * (lo + hi); }
  double circumradius() const { return 0.5 * (hi - lo).norm(); }
  double volume() const;
  double surface_area() const;
  /// Euclidean distance between two bounded-or-not boxes (0 when they touch).
  double gap(const Box& other) const;
};

struct BallData {
  Vec center;
  double radius = 0.0;
};

/// Boolean occupancy on a regular grid over an axis-aligned box, row-major with
/// the first axis varying slowest.
struct VoxelGrid {
  Vec lo, hi;
  std::vector<int> resolution;
  std::vector<std::uint8_t> occupancy;

  int dim() const { return static_cast<int>(resolution.size()); }
  std::size_t size() const;
  Vec cell_size() const;
  Vec center(std::size_t index) const;
  std::vector<int> coords(std::size_t index) const;
  std::size_t index(const std::vector<int>& coords) const;
  /// Index of the cell containing x, or nullopt outside the grid.
  std::optional<std::size_t> locate(const Vec& x) const;
  void validate() const;
};

/// Tagged immutable set representation. Copies share structure.
class SetRegion {
 public:
  enum class Kind { Empty, Intervals, Halfspace, Ball, Polytope, Voxels, Complement, Intersection };

  static SetRegion empty(int dim);
  static SetRegion intervals(Intervals1D parts);
  /// {x : normal . x <= offset}; the normal is normalized.
  static SetRegion halfspace(const Vec& normal, double offset);
  static SetRegion ball(const Vec& center, double radius);
  static SetRegion polytope(Polytope p);
  static SetRegion box(const Vec& lo, const Vec& hi);
  static SetRegion voxels(VoxelGrid grid);
  static SetRegion complement(const SetRegion& a);
  static SetRegion intersection(const SetRegion& a, const SetRegion& b);

  int dim() const;
  Kind kind() const;

  bool contains(const Vec& x) const;
  /// Exact parameter set {t : x + t u in the region}; u must be a unit vector.
  Intervals1D trace(const Vec& x, const Vec& u) const;
  Box bounding_box() const;

  // Variant accessors; each throws std::logic_error for the wrong kind.
  const Intervals1D& intervals_data() const;
  const Halfspace& halfspace_data() const;
  const BallData& ball_data() const;
  const Polytope& polytope_data() const;
  const VoxelGrid& voxel_data() const;
  const SetRegion& child(int i) const;

  std::string describe() const;

  struct Node;

 private:
  explicit SetRegion(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

SetRegion set_union(const SetRegion& a, const SetRegion& b);
SetRegion set_difference(const SetRegion& a, const SetRegion& b);

/// Halfspace description when the region is an intersection of halfspaces and
/// polytopes (possibly unbounded).
std::optional<std::vector<Halfspace>> halfspace_form(const SetRegion& r);

/// Whole space or a bounded open region with positive volume.
class Domain {
 public:
  static Domain whole(int dim);
  /// Throws std::invalid_argument for unbounded or null regions.
  static Domain bounded(SetRegion region);

  int dim() const { return dim_; }
  bool is_whole() const { return !region_; }
  const SetRegion& region() const;
  bool contains(const Vec& x) const { return !region_ || region_->contains(x); }
  std::string describe() const;

 private:
  int dim_ = 0;
  std::optional<SetRegion> region_;
};

/// The set restricted to the domain, and its complement restricted to it.
SetRegion restrict_to(const SetRegion& e, const Domain& d);

struct LineSegmentTrace {
  Vec direction;
  Vec base;
  Intervals1D inside_e;
  Intervals1D inside_domain;
};

LineSegmentTrace trace_line(const SetRegion& e, const Domain& d, const Vec& u, const Vec& x);

/// Lebesgue measure of E intersected with D. Exact for intervals, balls and
/// polytopes, adaptive Gauss-Kronrod over traced chords otherwise.
double region_volume(const SetRegion& e, const Domain& d);

/// Rejection sampling from the bounding box; throws std::runtime_error when the
/// acceptance rate falls below 1e-3.
std::vector<Vec> sample_uniform(const SetRegion& e, const Domain& d, Rng& rng, std::size_t count);

/// Upper bound on the classical perimeter of a bounded region.
double perimeter_upper_bound(const SetRegion& r);

using NormalWeight = std::function<double(const Vec& unit_normal)>;

/// Integral over the reduced boundary of E inside D of weight(normal).
double weighted_perimeter(const SetRegion& e, const Domain& d, const NormalWeight& weight);
double classical_perimeter(const SetRegion& e, const Domain& d);

/// Points of the cube (-1/2, 1/2)^n within distance d1 of its boundary, together
/// with the points outside it within Euclidean distance d2. Dimensions 1 and 2.
SetRegion cube_strip(int dim, double d1, double d2);
SetRegion unit_cube(int dim);
/// {x_n <= 0}.
SetRegion lower_halfspace(int dim);

}  // namespace fracperim
